"""Exact scalar arithmetic underlying the whole engine.

Everything here is over the rationals: sparse multivariate polynomials in a
fixed, ordered set of commuting parameter symbols, reduced rational functions
of those polynomials, and fraction-free linear algebra over them.  No floats
anywhere; equality of canonical forms is structural equality.

The parameter symbols live in one global ordered table ``a, b, c, d, e, h, t,
alpha0..alpha4, k1..kN`` (the ``k`` block grows on demand, existing indices
are never reassigned).  Term order is graded lexicographic with respect to
that table, so printed output is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cmp_to_key

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover
    from fractions import Fraction as QQ

__all__ = [
    "QQ",
    "SYMBOLS",
    "sym_index",
    "ensure_k_symbols",
    "ParamPoly",
    "ParamRat",
    "rat_normalize",
    "ZERO_POLY",
    "ONE_POLY",
    "RAT_ZERO",
    "RAT_ONE",
    "PolyMatrix",
    "LinearSolution",
    "solve_linear",
    "poly_gcd",
    "CoeffError",
    "SymbolTableError",
    "ZeroDenominatorError",
]


class CoeffError(ValueError):
    pass


class SymbolTableError(CoeffError):
    pass


class ZeroDenominatorError(CoeffError):
    pass


_BASE_SYMBOLS = (
    "a", "b", "c", "d", "e", "h", "t",
    "alpha0", "alpha1", "alpha2", "alpha3", "alpha4",
)

SYMBOLS: list[str] = list(_BASE_SYMBOLS)
_SYM_INDEX: dict[str, int] = {s: i for i, s in enumerate(SYMBOLS)}


def sym_index(name: str) -> int:
    try:
        return _SYM_INDEX[name]
    except KeyError:
        raise SymbolTableError(f"unknown symbol {name!r}") from None


def ensure_k_symbols(n: int) -> list[str]:
    """Make sure k1..kn exist in the table; return their names in order."""
    names = [f"k{i}" for i in range(1, n + 1)]
    for name in names:
        if name not in _SYM_INDEX:
            _SYM_INDEX[name] = len(SYMBOLS)
            SYMBOLS.append(name)
    return names


def is_symbol(name: str) -> bool:
    return name in _SYM_INDEX


# An exponent vector is a tuple of (symbol_index, exponent) pairs, sorted by
# index, exponents > 0.  The empty tuple is the constant monomial.

_EMPTY = ()


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        i1, e1 = m1[i]
        i2, e2 = m2[j]
        if i1 == i2:
            out.append((i1, e1 + e2))
            i += 1
            j += 1
        elif i1 < i2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_deg(m) -> int:
    return sum(e for _, e in m)


def _mono_cmp(m1, m2) -> int:
    """Graded lex: higher total degree wins, ties broken by the earlier
    symbol carrying the larger exponent."""
    d1, d2 = _mono_deg(m1), _mono_deg(m2)
    if d1 != d2:
        return -1 if d1 < d2 else 1
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        i1, e1 = m1[i]
        i2, e2 = m2[j]
        if i1 == i2:
            if e1 != e2:
                return 1 if e1 > e2 else -1
            i += 1
            j += 1
        elif i1 < i2:
            return 1
        else:
            return -1
    if i < n1:
        return 1
    if j < n2:
        return -1
    return 0


_mono_key = cmp_to_key(_mono_cmp)


def _mono_divides(m1, m2) -> bool:
    """Does m1 divide m2?"""
    d2 = dict(m2)
    for i, e in m1:
        if d2.get(i, 0) < e:
            return False
    return True


def _mono_div(m2, m1):
    d = dict(m2)
    for i, e in m1:
        r = d[i] - e
        if r:
            d[i] = r
        else:
            del d[i]
    return tuple(sorted(d.items()))


def _mono_gcd(m1, m2):
    d2 = dict(m2)
    out = []
    for i, e in m1:
        e2 = d2.get(i, 0)
        if e2:
            out.append((i, min(e, e2)))
    return tuple(out)


def _qq_gcd(x: QQ, y: QQ) -> QQ:
    # gcd of rationals: gcd of numerators over lcm of denominators
    xn, xd = abs(int(x.numerator)), int(x.denominator)
    yn, yd = abs(int(y.numerator)), int(y.denominator)
    g = math.gcd(xn, yn)
    l = xd * yd // math.gcd(xd, yd)
    return QQ(g, l)


class ParamPoly:
    """Sparse multivariate polynomial over Q in the global symbol table."""

    __slots__ = ("terms",)

    def __init__(self, terms=None, _trusted=False):
        if terms is None:
            self.terms = {}
        elif _trusted:
            self.terms = terms
        else:
            self.terms = {m: QQ(c) for m, c in terms.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @staticmethod
    def const(c) -> "ParamPoly":
        c = QQ(c)
        if c == 0:
            return ZERO_POLY
        return ParamPoly({_EMPTY: c}, _trusted=True)

    @staticmethod
    def sym(name: str, exp: int = 1) -> "ParamPoly":
        if exp < 0:
            raise CoeffError("polynomial exponents must be non-negative")
        if exp == 0:
            return ONE_POLY
        return ParamPoly({((sym_index(name), exp),): QQ(1)}, _trusted=True)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def as_const(self):
        """Return the rational value if constant, else None."""
        if not self.terms:
            return QQ(0)
        if len(self.terms) == 1 and _EMPTY in self.terms:
            return self.terms[_EMPTY]
        return None

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(_mono_deg(m) for m in self.terms)

    def deg_in(self, idx: int) -> int:
        best = 0
        for m in self.terms:
            for i, e in m:
                if i == idx and e > best:
                    best = e
        return best

    def has_sym(self, idx: int) -> bool:
        return any(i == idx for m in self.terms for i, _ in m)

    def symbols_present(self) -> set[int]:
        return {i for m in self.terms for i, _ in m}

    def leading(self):
        """(monomial, coeff) of the graded-lex leading term."""
        if not self.terms:
            raise CoeffError("zero polynomial has no leading term")
        m = max(self.terms, key=_mono_key)
        return m, self.terms[m]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)

    def key(self):
        """Hashable canonical key (for dedup tables)."""
        return tuple(sorted((m, str(c)) for m, c in self.terms.items()))

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, QQ)):
            other = ParamPoly.const(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        res = dict(self.terms)
        for m, c in other.terms.items():
            nc = res.get(m, 0) + c
            if nc:
                res[m] = nc
            elif m in res:
                del res[m]
        return ParamPoly(res, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        if isinstance(other, (int, QQ)):
            other = ParamPoly.const(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, QQ)):
            return self.scale(QQ(other))
        if not isinstance(other, ParamPoly):
            return NotImplemented
        if not self.terms or not other.terms:
            return ZERO_POLY
        if len(self.terms) > len(other.terms):
            self, other = other, self
        res: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                nc = res.get(m, 0) + c1 * c2
                if nc:
                    res[m] = nc
                elif m in res:
                    del res[m]
        return ParamPoly(res, _trusted=True)

    __rmul__ = __mul__

    def scale(self, c: QQ) -> "ParamPoly":
        if c == 0:
            return ZERO_POLY
        if c == 1:
            return self
        return ParamPoly({m: c * v for m, v in self.terms.items()}, _trusted=True)

    def mul_term(self, mono, c) -> "ParamPoly":
        if c == 0:
            return ZERO_POLY
        return ParamPoly({_mono_mul(m, mono): c * v for m, v in self.terms.items()},
                         _trusted=True)

    def __pow__(self, n: int):
        if n < 0:
            raise CoeffError("negative power of a ParamPoly")
        res = ONE_POLY
        base = self
        while n:
            if n & 1:
                res = res * base
            base = base * base
            n >>= 1
        return res

    def __eq__(self, other):
        if isinstance(other, (int, QQ)):
            other = ParamPoly.const(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset((m, c) for m, c in self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # -- calculus / substitution --------------------------------------------

    def diff(self, name: str) -> "ParamPoly":
        idx = sym_index(name)
        res: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(idx, 0)
            if not e:
                continue
            if e == 1:
                del d[idx]
            else:
                d[idx] = e - 1
            mm = tuple(sorted(d.items()))
            nc = res.get(mm, 0) + c * e
            if nc:
                res[mm] = nc
            elif mm in res:
                del res[mm]
        return ParamPoly(res, _trusted=True)

    def subs_polys(self, bindings: dict[str, "ParamPoly"]) -> "ParamPoly":
        """Substitute symbols by polynomials (pure polynomial result)."""
        idx_bind = {sym_index(n): p for n, p in bindings.items()}
        if not any(self.has_sym(i) for i in idx_bind):
            return self
        pow_cache: dict[tuple[int, int], ParamPoly] = {}

        def ppow(i, e):
            key = (i, e)
            r = pow_cache.get(key)
            if r is None:
                r = idx_bind[i] ** e
                pow_cache[key] = r
            return r

        out = ZERO_POLY
        for m, c in self.terms.items():
            keep = []
            factor = None
            for i, e in m:
                if i in idx_bind:
                    factor = ppow(i, e) if factor is None else factor * ppow(i, e)
                else:
                    keep.append((i, e))
            base = ParamPoly({tuple(keep): c}, _trusted=True)
            out = out + (base if factor is None else base * factor)
        return out

    def subs_zero(self, name: str) -> "ParamPoly":
        """Fast path for symbol -> 0."""
        idx = sym_index(name)
        res = {m: c for m, c in self.terms.items()
               if not any(i == idx for i, _ in m)}
        return ParamPoly(res, _trusted=True)

    def specialize(self, bindings: dict[str, "ParamRat"]) -> "ParamRat":
        """Substitute symbols by rational functions."""
        if all(isinstance(v, ParamPoly) for v in bindings.values()):
            return ParamRat.from_poly(self.subs_polys(bindings))
        idx_bind = {}
        for n, v in bindings.items():
            idx_bind[sym_index(n)] = v if isinstance(v, ParamRat) else ParamRat.from_poly(v)
        pow_cache: dict[tuple[int, int], ParamRat] = {}

        def rpow(i, e):
            key = (i, e)
            r = pow_cache.get(key)
            if r is None:
                r = idx_bind[i] ** e
                pow_cache[key] = r
            return r

        out = RAT_ZERO
        for m, c in self.terms.items():
            keep = []
            factor = RAT_ONE
            for i, e in m:
                if i in idx_bind:
                    factor = factor * rpow(i, e)
                else:
                    keep.append((i, e))
            term = ParamRat.from_poly(ParamPoly({tuple(keep): c}, _trusted=True))
            out = out + term * factor
        return out

    def t_decompose(self) -> dict[int, "ParamPoly"]:
        """Split into powers of t: {l: coefficient polynomial (t-free)}."""
        t_idx = sym_index("t")
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            l = 0
            rest = []
            for i, e in m:
                if i == t_idx:
                    l = e
                else:
                    rest.append((i, e))
            out.setdefault(l, {})[tuple(rest)] = c
        return {l: ParamPoly(d, _trusted=True) for l, d in out.items()}

    def div_sym_exact(self, name: str) -> "ParamPoly | None":
        """Divide by a symbol if every term contains it, else None."""
        idx = sym_index(name)
        res = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(idx, 0)
            if not e:
                return None
            if e == 1:
                del d[idx]
            else:
                d[idx] = e - 1
            res[tuple(sorted(d.items()))] = c
        return ParamPoly(res, _trusted=True)

    # -- content / division / gcd -------------------------------------------

    def rational_content(self) -> QQ:
        """Positive rational content (gcd of coefficients); 0 for the zero poly."""
        it = iter(self.terms.values())
        try:
            g = abs(next(it))
        except StopIteration:
            return QQ(0)
        for c in it:
            if g == 1:
                break
            g = _qq_gcd(g, c)
        return g

    def monomial_content(self):
        it = iter(self.terms)
        try:
            g = next(it)
        except StopIteration:
            return _EMPTY
        for m in it:
            if not g:
                break
            g = _mono_gcd(g, m)
        return g

    def primitive(self) -> tuple["ParamPoly", QQ]:
        """(primitive part with positive leading coefficient, content)."""
        if not self.terms:
            return self, QQ(0)
        c = self.rational_content()
        _, lc = self.leading()
        if lc < 0:
            c = -c
        if c == 1:
            return self, c
        inv = 1 / c
        return ParamPoly({m: v * inv for m, v in self.terms.items()}, _trusted=True), c

    def exact_div(self, other: "ParamPoly") -> "ParamPoly | None":
        """Exact polynomial quotient, or None if not divisible."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        oc = other.as_const()
        if oc is not None:
            return self.scale(1 / oc)
        if self.is_zero():
            return ZERO_POLY
        lm, lc = other.leading()
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            rm = max(rem, key=_mono_key)
            rc = rem[rm]
            if not _mono_divides(lm, rm):
                return None
            qm = _mono_div(rm, lm)
            qc = rc / lc
            quot[qm] = quot.get(qm, 0) + qc
            for m, c in other.terms.items():
                mm = _mono_mul(m, qm)
                nc = rem.get(mm, 0) - c * qc
                if nc:
                    rem[mm] = nc
                elif mm in rem:
                    del rem[mm]
        return ParamPoly(quot, _trusted=True)

    def monic(self) -> tuple["ParamPoly", QQ]:
        """(self / leading coefficient, leading coefficient)."""
        _, lc = self.leading()
        if lc == 1:
            return self, lc
        inv = 1 / lc
        return ParamPoly({m: c * inv for m, c in self.terms.items()}, _trusted=True), lc

    # -- printing ------------------------------------------------------------

    def text(self) -> str:
        from .grammar import poly_text
        return poly_text(self)

    __str__ = text

    def __repr__(self):
        return f"ParamPoly({self.text()})"


ZERO_POLY = ParamPoly({}, _trusted=True)
ONE_POLY = ParamPoly({_EMPTY: QQ(1)}, _trusted=True)


# ---------------------------------------------------------------------------
# multivariate gcd (content / primitive-part + primitive PRS)
# ---------------------------------------------------------------------------

def _to_univariate(p: ParamPoly, idx: int) -> dict[int, ParamPoly]:
    out: dict[int, dict] = {}
    for m, c in p.terms.items():
        e = 0
        rest = []
        for i, ee in m:
            if i == idx:
                e = ee
            else:
                rest.append((i, ee))
        out.setdefault(e, {})[tuple(rest)] = c
    return {e: ParamPoly(d, _trusted=True) for e, d in out.items()}


def _from_univariate(coeffs: dict[int, ParamPoly], idx: int) -> ParamPoly:
    res: dict = {}
    for e, p in coeffs.items():
        mono = ((idx, e),) if e else _EMPTY
        for m, c in p.terms.items():
            res[_mono_mul(m, mono)] = c
    return ParamPoly(res, _trusted=True)


def _uni_deg(u: dict[int, ParamPoly]) -> int:
    return max(u)


def _content_of_coeffs(u: dict[int, ParamPoly]) -> ParamPoly:
    g = ZERO_POLY
    for p in u.values():
        g = poly_gcd(g, p)
        if g.as_const() is not None and not g.is_zero():
            break
    return g


def _uni_primitive(u: dict[int, ParamPoly]) -> tuple[dict[int, ParamPoly], ParamPoly]:
    cont = _content_of_coeffs(u)
    if cont.as_const() == 1:
        return u, cont
    return {e: p.exact_div(cont) for e, p in u.items()}, cont


def _pseudo_rem(A: dict[int, ParamPoly], B: dict[int, ParamPoly]) -> dict[int, ParamPoly]:
    da, db = _uni_deg(A), _uni_deg(B)
    lb = B[db]
    R = dict(A)
    while R and _uni_deg(R) >= db:
        dr = _uni_deg(R)
        lr = R[dr]
        newR: dict[int, ParamPoly] = {}
        for e, p in R.items():
            if e == dr:
                continue
            newR[e] = p * lb
        for e, p in B.items():
            if e == db:
                continue
            ee = e + dr - db
            q = newR.get(ee, ZERO_POLY) - p * lr
            if q.is_zero():
                newR.pop(ee, None)
            else:
                newR[ee] = q
        R = newR
    return R


def poly_gcd(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    """gcd over Q, normalized monic (leading coefficient 1)."""
    if a.is_zero():
        return b.monic()[0] if not b.is_zero() else ZERO_POLY
    if b.is_zero():
        return a.monic()[0]
    ca, cb = a.as_const(), b.as_const()
    if ca is not None or cb is not None:
        return ONE_POLY
    if a.terms == b.terms:
        return a.monic()[0]
    # strip common monomial factor cheaply
    ma = a.monomial_content()
    mb = b.monomial_content()
    mg = _mono_gcd(ma, mb)
    if ma:
        a = ParamPoly({_mono_div(m, ma): c for m, c in a.terms.items()}, _trusted=True)
    if mb:
        b = ParamPoly({_mono_div(m, mb): c for m, c in b.terms.items()}, _trusted=True)
    gm = ParamPoly({mg: QQ(1)}, _trusted=True) if mg else ONE_POLY
    if a.as_const() is not None or b.as_const() is not None:
        return gm
    # one divides the other (common in reductions)
    if len(a.terms) <= len(b.terms):
        if b.exact_div(a) is not None:
            return (a.monic()[0]) * gm
    else:
        if a.exact_div(b) is not None:
            return (b.monic()[0]) * gm
    syms = a.symbols_present() & b.symbols_present()
    if not syms:
        return gm
    v = min(syms)
    A = _to_univariate(a, v)
    B = _to_univariate(b, v)
    if _uni_deg(A) < _uni_deg(B):
        A, B = B, A
    A, ca_ = _uni_primitive(A)
    B, cb_ = _uni_primitive(B)
    gcont = poly_gcd(ca_, cb_)
    while True:
        R = _pseudo_rem(A, B)
        if not R:
            prim = _from_univariate(B, v)
            break
        if _uni_deg(R) == 0:
            prim = ONE_POLY
            break
        A = B
        B, _ = _uni_primitive(R)
    g = gcont * prim * gm
    return g.monic()[0]


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

class ParamRat:
    """Reduced rational function num/den; den is monic under graded lex.

    Canonical form: gcd(num, den) = 1 and leading coefficient of den is 1,
    so equal values have equal representations.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: ParamPoly, den: ParamPoly, _trusted=False):
        if _trusted:
            self.num = num
            self.den = den
            return
        r = rat_normalize(num, den)
        self.num = r.num
        self.den = r.den

    @staticmethod
    def from_poly(p: ParamPoly) -> "ParamRat":
        return ParamRat(p, ONE_POLY, _trusted=True)

    @staticmethod
    def const(c) -> "ParamRat":
        return ParamRat.from_poly(ParamPoly.const(c))

    @staticmethod
    def sym(name: str) -> "ParamRat":
        return ParamRat.from_poly(ParamPoly.sym(name))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den == ONE_POLY

    def as_const(self):
        if self.den == ONE_POLY:
            return self.num.as_const()
        return None

    def __add__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return rat_normalize(self.num + other.num, self.den)
        if self.den == ONE_POLY:
            return rat_normalize(self.num * other.den + other.num, other.den)
        if other.den == ONE_POLY:
            return rat_normalize(self.num + other.num * self.den, self.den)
        g = poly_gcd(self.den, other.den)
        if g == ONE_POLY:
            return rat_normalize(self.num * other.den + other.num * self.den,
                                 self.den * other.den)
        db = other.den.exact_div(g)
        da = self.den.exact_div(g)
        num = self.num * db + other.num * da
        return rat_normalize(num, self.den * db)

    __radd__ = __add__

    def __neg__(self):
        return ParamRat(-self.num, self.den, _trusted=True)

    def __sub__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return RAT_ZERO
        if self.den == ONE_POLY and other.den == ONE_POLY:
            return ParamRat(self.num * other.num, ONE_POLY, _trusted=True)
        # cross-reduce before multiplying
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1 == ONE_POLY else self.num.exact_div(g1)
        d2 = other.den if g1 == ONE_POLY else other.den.exact_div(g1)
        n2 = other.num if g2 == ONE_POLY else other.num.exact_div(g2)
        d1 = self.den if g2 == ONE_POLY else self.den.exact_div(g2)
        return rat_normalize(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inv(self) -> "ParamRat":
        if self.num.is_zero():
            raise ZeroDenominatorError("inverse of zero")
        return rat_normalize(self.den, self.num)

    def __truediv__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def __rtruediv__(self, other):
        return _as_rat(other) * self.inv()

    def __pow__(self, n: int):
        if n == 0:
            return RAT_ONE
        if n < 0:
            return self.inv() ** (-n)
        return ParamRat(self.num ** n, self.den ** n, _trusted=True)

    def __eq__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.num.is_zero()

    def scale(self, c) -> "ParamRat":
        c = QQ(c)
        if c == 0:
            return RAT_ZERO
        return ParamRat(self.num.scale(c), self.den, _trusted=True)

    def diff_t(self) -> "ParamRat":
        nt = self.num.diff("t")
        if self.den == ONE_POLY:
            return ParamRat.from_poly(nt)
        dt = self.den.diff("t")
        return rat_normalize(nt * self.den - self.num * dt, self.den * self.den)

    def specialize(self, bindings: dict[str, "ParamRat"]) -> "ParamRat":
        num = self.num.specialize(bindings)
        if self.den == ONE_POLY:
            return num
        den = self.den.specialize(bindings)
        if den.is_zero():
            raise ZeroDenominatorError(
                "denominator vanishes identically under substitution")
        return num / den

    def div_sym_exact(self, name: str) -> "ParamRat | None":
        """Exact division by a symbol assumed absent from the denominator."""
        if self.den.div_sym_exact(name) is not None:
            return None
        n = self.num.div_sym_exact(name)
        if n is None:
            return None
        return ParamRat(n, self.den, _trusted=True)

    def text(self) -> str:
        from .grammar import rat_text
        return rat_text(self)

    __str__ = text

    def __repr__(self):
        return f"ParamRat({self.text()})"


def _as_rat(x):
    if isinstance(x, ParamRat):
        return x
    if isinstance(x, ParamPoly):
        return ParamRat.from_poly(x)
    if isinstance(x, (int, QQ)):
        return ParamRat.const(x)
    return NotImplemented


def rat_normalize(num: ParamPoly, den: ParamPoly) -> ParamRat:
    """Canonical rational function: reduced, monic denominator."""
    if den.is_zero():
        raise ZeroDenominatorError("zero denominator")
    if num.is_zero():
        return RAT_ZERO
    dc = den.as_const()
    if dc is not None:
        return ParamRat(num.scale(1 / dc), ONE_POLY, _trusted=True)
    g = poly_gcd(num, den)
    if g != ONE_POLY:
        num = num.exact_div(g)
        den = den.exact_div(g)
        dc = den.as_const()
        if dc is not None:
            return ParamRat(num.scale(1 / dc), ONE_POLY, _trusted=True)
    den, lc = den.monic()
    if lc != 1:
        num = num.scale(1 / lc)
    return ParamRat(num, den, _trusted=True)


RAT_ZERO = ParamRat(ZERO_POLY, ONE_POLY, _trusted=True)
RAT_ONE = ParamRat(ONE_POLY, ONE_POLY, _trusted=True)


# ---------------------------------------------------------------------------
# linear algebra over the polynomial ring
# ---------------------------------------------------------------------------

@dataclass
class PolyMatrix:
    """Rectangular matrix of ParamPoly entries."""
    rows: list[list[ParamPoly]]

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise CoeffError("matrix must have positive shape")
        w = len(self.rows[0])
        if any(len(r) != w for r in self.rows):
            raise CoeffError("matrix rows must have equal length")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])


@dataclass
class LinearSolution:
    status: str                      # "unique" | "underdetermined" | "inconsistent"
    solution: list | None            # list[ParamRat] (particular solution)
    rank: int
    nullity: int
    nullspace: list                  # list of list[ParamRat]
    pivot_cols: list[int] = field(default_factory=list)


def _strip_row(row: dict[int, ParamPoly], rhs: ParamPoly):
    """Divide a row through by its rational and monomial content."""
    polys = list(row.values())
    if not rhs.is_zero():
        polys.append(rhs)
    if not polys:
        return row, rhs
    cont = None
    for p in polys:
        c = p.rational_content()
        cont = c if cont is None else _qq_gcd(cont, c)
        if cont == 1:
            break
    mono = None
    for p in polys:
        m = p.monomial_content()
        mono = m if mono is None else _mono_gcd(mono, m)
        if not mono:
            break
    if (cont is None or cont == 1) and not mono:
        return row, rhs
    inv = 1 / cont if cont and cont != 1 else QQ(1)

    def fix(p: ParamPoly) -> ParamPoly:
        t = p.terms
        if mono:
            t = {_mono_div(m, mono): c for m, c in t.items()}
        if inv != 1:
            t = {m: c * inv for m, c in t.items()}
        return ParamPoly(dict(t), _trusted=True)

    return {j: fix(p) for j, p in row.items()}, fix(rhs)


def solve_linear(A, c: list[ParamPoly]) -> LinearSolution:
    """Solve A x = c exactly over the rational-function field.

    Fraction-free forward elimination over the polynomial ring (cross
    multiplication with content stripping, first-nonzero-column pivoting in
    input row order), then back substitution over the fraction field.  The
    returned solution is re-verified by exact multiplication.
    """
    if isinstance(A, PolyMatrix):
        rows_in = A.rows
    else:
        rows_in = A
    if len(rows_in) != len(c):
        raise CoeffError("matrix/right-hand-side shape mismatch")
    ncols = len(rows_in[0]) if rows_in else 0

    # pivots: col -> (row dict, rhs)
    pivots: dict[int, tuple[dict[int, ParamPoly], ParamPoly]] = {}
    inconsistent = False
    for r, rhs in zip(rows_in, c):
        row = {j: p for j, p in enumerate(r) if not p.is_zero()}
        rhs = rhs if isinstance(rhs, ParamPoly) else ParamPoly.const(rhs)
        while True:
            if not row:
                if not rhs.is_zero():
                    inconsistent = True
                break
            j = min(row)
            piv = pivots.get(j)
            if piv is None:
                row, rhs = _strip_row(row, rhs)
                pivots[j] = (row, rhs)
                break
            prow, prhs = piv
            plead = prow[j]
            rlead = row.pop(j)
            new_row: dict[int, ParamPoly] = {}
            for jj, p in row.items():
                q = p * plead - prow.get(jj, ZERO_POLY) * rlead
                if not q.is_zero():
                    new_row[jj] = q
            for jj, p in prow.items():
                if jj == j or jj in row:
                    continue
                q = -(p * rlead)
                if not q.is_zero():
                    new_row[jj] = q
            rhs = rhs * plead - prhs * rlead
            row, rhs = _strip_row(new_row, rhs)

    rank = len(pivots)
    nullity = ncols - rank
    pivot_cols = sorted(pivots)
    if inconsistent:
        return LinearSolution("inconsistent", None, rank, nullity, [], pivot_cols)

    free_cols = [j for j in range(ncols) if j not in pivots]

    def back_substitute(free_values: dict[int, ParamRat], rhs_on: bool):
        x: list[ParamRat] = [RAT_ZERO] * ncols
        for j, v in free_values.items():
            x[j] = v
        for j in reversed(pivot_cols):
            prow, prhs = pivots[j]
            acc = ParamRat.from_poly(prhs) if rhs_on else RAT_ZERO
            for jj, p in prow.items():
                if jj == j:
                    continue
                if x[jj].is_zero():
                    continue
                acc = acc - ParamRat.from_poly(p) * x[jj]
            x[j] = acc / ParamRat.from_poly(prow[j])
        return x

    solution = back_substitute({j: RAT_ZERO for j in free_cols}, True)
    nullspace = []
    for f in free_cols:
        vals = {j: (RAT_ONE if j == f else RAT_ZERO) for j in free_cols}
        nullspace.append(back_substitute(vals, False))

    # exact residual check: A . solution - c == 0
    for r, rhs in zip(rows_in, c):
        acc = RAT_ZERO
        for j, p in enumerate(r):
            if p.is_zero() or solution[j].is_zero():
                continue
            acc = acc + ParamRat.from_poly(p) * solution[j]
        rhs = rhs if isinstance(rhs, ParamPoly) else ParamPoly.const(rhs)
        if acc != ParamRat.from_poly(rhs):
            raise CoeffError("internal error: linear solve residual is nonzero")

    status = "unique" if nullity == 0 else "underdetermined"
    return LinearSolution(status, solution, rank, nullity, nullspace, pivot_cols)
