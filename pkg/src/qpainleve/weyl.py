"""The localized quantized Weyl algebra.

Elements are finite sums of normal-ordered monomials in a generator pair
``(v1, v2)`` obeying ``v1*v2 - v2*v1 = h`` with exact rational-function
coefficients.  At most one generator may carry negative (Laurent) exponents;
single-sided localization is what keeps every product a finite sum.

Two normal orders exist: FIRST_LEFT writes monomials ``v1^m v2^n`` and
SECOND_LEFT writes ``v2^n v1^m``.  Terms are always keyed ``(m, n)`` by
generator regardless of order.  The reordering identities used everywhere::

    v2 * v1^m = v1^m v2 - m h v1^(m-1)           (FIRST_LEFT building block)
    v1 * v2^n = v2^n v1 + n h v2^(n-1)           (SECOND_LEFT building block)

both valid for negative integer m, n as well.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeff import (
    QQ,
    ParamPoly,
    ParamRat,
    RAT_ONE,
    RAT_ZERO,
    ONE_POLY,
)

__all__ = [
    "FIRST_LEFT",
    "SECOND_LEFT",
    "Algebra",
    "WeylExpr",
    "WeylError",
    "FlowDerivation",
    "commutator",
    "hamilton_flow",
    "apply_derivation",
    "substitute",
    "laurent_split",
    "hamilton_partials",
    "classical_limit",
    "convert_convention",
    "Substituter",
]

FIRST_LEFT = "first_left"
SECOND_LEFT = "second_left"


class WeylError(ValueError):
    pass


_H = ParamPoly.sym("h")
_H_POWERS = [ONE_POLY, _H]


def _h_pow(j: int) -> ParamPoly:
    while len(_H_POWERS) <= j:
        _H_POWERS.append(_H_POWERS[-1] * _H)
    return _H_POWERS[j]


def _falling(m: int, j: int) -> int:
    r = 1
    for i in range(j):
        r *= (m - i)
    return r


def _gbinom(n: int, j: int) -> QQ:
    num = _falling(n, j)
    den = 1
    for i in range(2, j + 1):
        den *= i
    return QQ(num, den)


@dataclass(frozen=True)
class Algebra:
    """Signature of one copy of the algebra: generator names + Laurent side.

    The normal-order convention pairs with the Laurent side (first-variable
    Laurent prefers FIRST_LEFT, second-variable prefers SECOND_LEFT); for
    polynomial algebras the default is FIRST_LEFT.
    """

    names: tuple[str, str]
    laurent: str | None = None          # None | "first" | "second"
    convention: str = None              # type: ignore[assignment]

    def __post_init__(self):
        if self.laurent not in (None, "first", "second"):
            raise WeylError(f"bad laurent side {self.laurent!r}")
        if self.convention is None:
            conv = SECOND_LEFT if self.laurent == "second" else FIRST_LEFT
            object.__setattr__(self, "convention", conv)
        if self.convention not in (FIRST_LEFT, SECOND_LEFT):
            raise WeylError(f"bad convention {self.convention!r}")

    def zero(self) -> "WeylExpr":
        return WeylExpr(self, {})

    def scalar(self, c) -> "WeylExpr":
        if isinstance(c, ParamPoly):
            c = ParamRat.from_poly(c)
        elif not isinstance(c, ParamRat):
            c = ParamRat.const(c)
        if c.is_zero():
            return self.zero()
        return WeylExpr(self, {(0, 0): c})

    def one(self) -> "WeylExpr":
        return self.scalar(1)

    def var(self, which: int) -> "WeylExpr":
        if which == 0:
            return WeylExpr(self, {(1, 0): RAT_ONE})
        if which == 1:
            return WeylExpr(self, {(0, 1): RAT_ONE})
        raise WeylError("generator index must be 0 or 1")

    def gens(self) -> tuple["WeylExpr", "WeylExpr"]:
        return self.var(0), self.var(1)

    def monomial(self, m: int, n: int, c=1) -> "WeylExpr":
        e = WeylExpr(self, {(m, n): RAT_ONE})
        return e if c == 1 else e.scale(c)

    def env(self) -> dict:
        """Evaluation environment mapping generator names to generators."""
        return {self.names[0]: self.var(0), self.names[1]: self.var(1)}


def _check_exps(alg: Algebra, m: int, n: int):
    if m < 0 and alg.laurent != "first":
        raise WeylError(
            f"negative exponent on {alg.names[0]!r} outside its Laurent algebra")
    if n < 0 and alg.laurent != "second":
        raise WeylError(
            f"negative exponent on {alg.names[1]!r} outside its Laurent algebra")


class WeylExpr:
    """Normal-ordered element; terms map (m, n) -> ParamRat coefficient."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: Algebra, terms: dict, _trusted=False):
        self.algebra = algebra
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            for (m, n), c in terms.items():
                if c.is_zero():
                    continue
                _check_exps(algebra, m, n)
                clean[(m, n)] = c
            self.terms = clean

    # -- bookkeeping ---------------------------------------------------------

    def _join(self, other: "WeylExpr") -> Algebra:
        a, b = self.algebra, other.algebra
        if a.names != b.names:
            raise WeylError(f"algebra mismatch: {a.names} vs {b.names}")
        if a.convention != b.convention:
            raise WeylError("normal-order convention mismatch")
        if a.laurent == b.laurent:
            return a
        if a.laurent is None:
            return b
        if b.laurent is None:
            return a
        raise WeylError("Laurent-side mismatch")

    def is_zero(self) -> bool:
        return not self.terms

    def is_central(self) -> bool:
        return all(k == (0, 0) for k in self.terms)

    def constant_part(self) -> ParamRat:
        return self.terms.get((0, 0), RAT_ZERO)

    def coeff(self, m: int, n: int) -> ParamRat:
        return self.terms.get((m, n), RAT_ZERO)

    def __eq__(self, other):
        if not isinstance(other, WeylExpr):
            return NotImplemented
        return (self.algebra.names == other.algebra.names
                and self.algebra.convention == other.algebra.convention
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.algebra.names, self.algebra.convention,
                     frozenset(self.terms.items())))

    # -- linear structure ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            other = self.algebra.scalar(other)
        if not isinstance(other, WeylExpr):
            return NotImplemented
        alg = self._join(other)
        res = dict(self.terms)
        for k, c in other.terms.items():
            nc = res.get(k, RAT_ZERO) + c
            if nc.is_zero():
                res.pop(k, None)
            else:
                res[k] = nc
        return WeylExpr(alg, res, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return WeylExpr(self.algebra, {k: -c for k, c in self.terms.items()},
                        _trusted=True)

    def __sub__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            other = self.algebra.scalar(other)
        if not isinstance(other, WeylExpr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "WeylExpr":
        if isinstance(c, ParamPoly):
            c = ParamRat.from_poly(c)
        elif not isinstance(c, ParamRat):
            c = ParamRat.const(c)
        if c.is_zero():
            return self.algebra.zero()
        return WeylExpr(self.algebra, {k: v * c for k, v in self.terms.items()},
                        _trusted=True)

    def map_coeffs(self, fn) -> "WeylExpr":
        res = {}
        for k, c in self.terms.items():
            nc = fn(c)
            if not nc.is_zero():
                res[k] = nc
        return WeylExpr(self.algebra, res, _trusted=True)

    # -- multiplication ----------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            return self.scale(other)
        if not isinstance(other, WeylExpr):
            return NotImplemented
        alg = self._join(other)
        res: dict = {}
        first_left = alg.convention == FIRST_LEFT
        for (m1, n1), c1 in self.terms.items():
            for (m2, n2), c2 in other.terms.items():
                c12 = c1 * c2
                if first_left:
                    # (v1^m1 v2^n1)(v1^m2 v2^n2): reorder v2^n1 past v1^m2
                    if n1 >= 0:
                        jmax = n1 if m2 < 0 else min(n1, m2) if m2 >= 0 else n1
                    else:
                        jmax = m2  # m2 >= 0 guaranteed by Laurent discipline
                    for j in range(jmax + 1):
                        coef = _gbinom(n1, j) * _falling(m2, j)
                        if coef == 0:
                            continue
                        if j & 1:
                            coef = -coef
                        c = c12 * ParamRat.from_poly(_h_pow(j).scale(coef))
                        k = (m1 + m2 - j, n1 + n2 - j)
                        nc = res.get(k, RAT_ZERO) + c
                        if nc.is_zero():
                            res.pop(k, None)
                        else:
                            res[k] = nc
                else:
                    # (v2^n1 v1^m1)(v2^n2 v1^m2): reorder v1^m1 past v2^n2
                    if m1 >= 0:
                        jmax = m1 if n2 < 0 else min(m1, n2)
                    else:
                        jmax = n2  # n2 >= 0 guaranteed
                    for j in range(jmax + 1):
                        coef = _gbinom(m1, j) * _falling(n2, j)
                        if coef == 0:
                            continue
                        c = c12 * ParamRat.from_poly(_h_pow(j).scale(coef))
                        k = (m1 + m2 - j, n1 + n2 - j)
                        nc = res.get(k, RAT_ZERO) + c
                        if nc.is_zero():
                            res.pop(k, None)
                        else:
                            res[k] = nc
        return WeylExpr(alg, res, _trusted=True)

    def __rmul__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            return self.scale(other)
        return NotImplemented

    def int_pow(self, n: int) -> "WeylExpr":
        if n < 0:
            inv = self.monomial_inverse()
            if inv is None:
                raise WeylError("negative power of a non-invertible element")
            return inv.int_pow(-n)
        res = self.algebra.one()
        for _ in range(n):
            res = res * self
        return res

    def monomial_inverse(self) -> "WeylExpr | None":
        """Inverse when self is (central unit) * (single generator power)."""
        if len(self.terms) != 1:
            return None
        (m, n), c = next(iter(self.terms.items()))
        if m and n:
            return None
        alg = self.algebra
        if m:
            if alg.laurent != "first":
                return None
            return WeylExpr(alg, {(-m, 0): c.inv()}, _trusted=True)
        if n:
            if alg.laurent != "second":
                return None
            return WeylExpr(alg, {(0, -n): c.inv()}, _trusted=True)
        return WeylExpr(alg, {(0, 0): c.inv()}, _trusted=True)

    # -- structure ----------------------------------------------------------------

    def is_polynomial(self) -> bool:
        return all(m >= 0 and n >= 0 for m, n in self.terms)

    def min_degree(self) -> int:
        """Most negative exponent of the Laurent variable (0 if none)."""
        idx = 0 if self.algebra.laurent == "first" else 1
        degs = [k[idx] for k in self.terms if k[idx] < 0]
        return min(degs) if degs else 0

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0], kv[0][1]),
                      reverse=True)

    def text(self) -> str:
        from .grammar import coeff_prefix
        if not self.terms:
            return "0"
        first_left = self.algebra.convention == FIRST_LEFT
        n1, n2 = self.algebra.names
        chunks = []
        for (m, n), c in self.sorted_terms():
            parts = []
            if first_left:
                if m:
                    parts.append(n1 if m == 1 else f"{n1}^{m}")
                if n:
                    parts.append(n2 if n == 1 else f"{n2}^{n}")
            else:
                if n:
                    parts.append(n2 if n == 1 else f"{n2}^{n}")
                if m:
                    parts.append(n1 if m == 1 else f"{n1}^{m}")
            mono = "*".join(parts)
            if not mono:
                from .grammar import rat_text
                v = rat_text(c)
                body = f"({v})" if (" + " in v or " - " in v) else v
            else:
                body = f"{coeff_prefix(c)}{mono}"
            if not chunks:
                chunks.append(body)
            else:
                if body.startswith("-"):
                    chunks.append(f" - {body[1:]}")
                else:
                    chunks.append(f" + {body}")
        return "".join(chunks)

    __str__ = text

    def __repr__(self):
        return f"WeylExpr({self.text()})"


# -- operations ---------------------------------------------------------------------


def commutator(u: WeylExpr, v: WeylExpr) -> WeylExpr:
    """u v - v u in canonical form."""
    return u * v - v * u


def div_h(f: WeylExpr) -> WeylExpr:
    """Exact division of every coefficient by h.

    A non-divisible coefficient means the caller's commutator was not a
    multiple of h, which would indicate a normal-ordering bug: hard error.
    """
    res = {}
    for k, c in f.terms.items():
        d = c.div_sym_exact("h")
        if d is None:
            raise WeylError(f"coefficient {c.text()} at {k} is not divisible by h")
        res[k] = d
    return WeylExpr(f.algebra, res, _trusted=True)


def laurent_split(f: WeylExpr):
    """(polynomial part, principal part, most negative Laurent exponent)."""
    alg = f.algebra
    idx = 0 if alg.laurent == "first" else 1 if alg.laurent == "second" else None
    if idx is None:
        return f, alg.zero(), 0
    poly, princ = {}, {}
    for k, c in f.terms.items():
        (princ if k[idx] < 0 else poly)[k] = c
    mindeg = min((k[idx] for k in princ), default=0)
    return (WeylExpr(alg, poly, _trusted=True),
            WeylExpr(alg, princ, _trusted=True),
            mindeg)


def hamilton_partials(H: WeylExpr) -> tuple[WeylExpr, WeylExpr]:
    """Formal partials (dH/dv2, dH/dv1) on normal-ordered monomials.

    Contract (verified identity): (1/h)[v1, H] = dH/dv2 and
    (1/h)[v2, H] = -dH/dv1.
    """
    if not H.is_polynomial():
        raise WeylError("partials require a polynomial element")
    d2, d1 = {}, {}
    for (m, n), c in H.terms.items():
        if n:
            d2[(m, n - 1)] = d2.get((m, n - 1), RAT_ZERO) + c.scale(n)
        if m:
            d1[(m - 1, n)] = d1.get((m - 1, n), RAT_ZERO) + c.scale(m)
    alg = H.algebra
    return (WeylExpr(alg, {k: c for k, c in d2.items() if not c.is_zero()}, _trusted=True),
            WeylExpr(alg, {k: c for k, c in d1.items() if not c.is_zero()}, _trusted=True))


def formal_partial(f: WeylExpr, which: int) -> WeylExpr:
    """d/d(generator) on normal-ordered monomials, Laurent exponents included."""
    res = {}
    for (m, n), c in f.terms.items():
        if which == 0 and m:
            k = (m - 1, n)
            res[k] = res.get(k, RAT_ZERO) + c.scale(m)
        elif which == 1 and n:
            k = (m, n - 1)
            res[k] = res.get(k, RAT_ZERO) + c.scale(n)
    return WeylExpr(f.algebra, {k: c for k, c in res.items() if not c.is_zero()},
                    _trusted=True)


def convert_convention(f: WeylExpr) -> WeylExpr:
    """Rewrite in the opposite normal order (same algebra element).

    Defined whenever the rewriting series terminates, i.e. always for
    single-sided Laurent elements; polynomial round trips are exact.
    """
    alg = f.algebra
    target_conv = SECOND_LEFT if alg.convention == FIRST_LEFT else FIRST_LEFT
    out_alg = Algebra(alg.names, alg.laurent, target_conv)
    res: dict = {}
    for (m, n), c in f.terms.items():
        if alg.convention == FIRST_LEFT:
            # v1^m v2^n = sum_j C(m,j) ff(n,j) h^j [v2^(n-j) v1^(m-j)]
            if m >= 0:
                jmax = m if n < 0 else min(m, n)
            elif n >= 0:
                jmax = n
            else:  # pragma: no cover - single-sided rules out both negative
                raise WeylError("conversion would need an infinite series")
            for j in range(jmax + 1):
                coef = _gbinom(m, j) * _falling(n, j)
                if coef == 0:
                    continue
                cc = c * ParamRat.from_poly(_h_pow(j).scale(coef))
                k = (m - j, n - j)
                nc = res.get(k, RAT_ZERO) + cc
                if nc.is_zero():
                    res.pop(k, None)
                else:
                    res[k] = nc
        else:
            # v2^n v1^m = sum_j C(n,j) ff(m,j) (-h)^j [v1^(m-j) v2^(n-j)]
            if n >= 0:
                jmax = n if m < 0 else min(m, n)
            elif m >= 0:
                jmax = m
            else:  # pragma: no cover
                raise WeylError("conversion would need an infinite series")
            for j in range(jmax + 1):
                coef = _gbinom(n, j) * _falling(m, j)
                if coef == 0:
                    continue
                if j & 1:
                    coef = -coef
                cc = c * ParamRat.from_poly(_h_pow(j).scale(coef))
                k = (m - j, n - j)
                nc = res.get(k, RAT_ZERO) + cc
                if nc.is_zero():
                    res.pop(k, None)
                else:
                    res[k] = nc
    return WeylExpr(out_alg, res, _trusted=True)


def to_convention(f: WeylExpr, convention: str) -> WeylExpr:
    return f if f.algebra.convention == convention else convert_convention(f)


class Substituter:
    """Order-preserving substitution with cached image powers.

    Maps each normal-ordered monomial u1^m u2^n to img1^m img2^n (in the
    source convention's order).  Negative source powers go through the
    monomial inverse of the corresponding image, which must exist.
    """

    def __init__(self, img1: WeylExpr, img2: WeylExpr, check: bool = False):
        alg = img1._join(img2)
        self.algebra = alg
        self.images = (img1, img2)
        self.inverses: list[WeylExpr | None] = [None, None]
        self.pow_cache: list[dict[int, WeylExpr]] = [
            {0: alg.one(), 1: img1},
            {0: alg.one(), 1: img2},
        ]
        if check:
            br = commutator(img1, img2) - alg.scalar(ParamPoly.sym("h"))
            if not br.is_zero():
                raise WeylError("substitution images are not canonical")

    def power(self, which: int, e: int) -> WeylExpr:
        cache = self.pow_cache[which]
        got = cache.get(e)
        if got is not None:
            return got
        if e > 0:
            r = self.power(which, e - 1) * self.images[which]
        else:
            inv = self.inverses[which]
            if inv is None:
                inv = self.images[which].monomial_inverse()
                if inv is None:
                    raise WeylError(
                        f"image of generator {which} is not invertible; "
                        "cannot map a negative power")
                self.inverses[which] = inv
                cache[-1] = inv
            r = self.power(which, e + 1) * inv
        cache[e] = r
        return r

    def __call__(self, f: WeylExpr) -> WeylExpr:
        first_left = f.algebra.convention == FIRST_LEFT
        out = self.algebra.zero()
        for (m, n), c in f.terms.items():
            if first_left:
                w = self.power(0, m) * self.power(1, n) if m and n else (
                    self.power(0, m) if m else self.power(1, n))
            else:
                w = self.power(1, n) * self.power(0, m) if m and n else (
                    self.power(1, n) if n else self.power(0, m))
            out = out + w.scale(c)
        return out


def substitute(f: WeylExpr, img1: WeylExpr, img2: WeylExpr,
               check: bool = False) -> WeylExpr:
    """Algebra homomorphism sending the generators of f to (img1, img2)."""
    return Substituter(img1, img2, check=check)(f)


@dataclass
class FlowDerivation:
    """Derivation given by generator images plus weighted explicit-time action.

    On coefficients it acts as g(t) * d/dt; on generators as the stored
    images; everything else follows from the order-preserving Leibniz rule
    and d(v^-1) = -v^-1 d(v) v^-1 for Laurent powers.
    """

    algebra: Algebra
    images: tuple[WeylExpr, WeylExpr]
    weight: ParamPoly

    def apply(self, f: WeylExpr) -> WeylExpr:
        alg = f.algebra
        img1 = to_convention(self.images[0], alg.convention)
        img2 = to_convention(self.images[1], alg.convention)
        if alg.laurent is not None:
            img1 = WeylExpr(Algebra(alg.names, alg.laurent, alg.convention),
                            img1.terms, _trusted=True)
            img2 = WeylExpr(Algebra(alg.names, alg.laurent, alg.convention),
                            img2.terms, _trusted=True)
        walg = img1.algebra
        one = walg.one()
        gens = (walg.var(0), walg.var(1))
        images = (img1, img2)
        cache: list[dict[int, WeylExpr]] = [{0: walg.zero()}, {0: walg.zero()}]
        pows: list[dict[int, WeylExpr]] = [{0: one, 1: gens[0]}, {0: one, 1: gens[1]}]
        weight = ParamRat.from_poly(self.weight)

        def vpow(which, e):
            cache_p = pows[which]
            r = cache_p.get(e)
            if r is None:
                if e > 0:
                    r = cache_p[1].int_pow(e)
                else:
                    r = walg.monomial(*((e, 0) if which == 0 else (0, e)))
                cache_p[e] = r
            return r

        def dpow(which, e):
            got = cache[which].get(e)
            if got is not None:
                return got
            if e > 0:
                # d(v^e) = d(v^(e-1)) v + v^(e-1) d(v)
                r = dpow(which, e - 1) * gens[which] + vpow(which, e - 1) * images[which]
            else:
                # d(v^e) = -v^e d(v^-e) v^e
                r = -(vpow(which, e) * dpow(which, -e) * vpow(which, e))
            cache[which][e] = r
            return r

        out = walg.zero()
        first_left = alg.convention == FIRST_LEFT
        for (m, n), c in f.terms.items():
            dc = c.diff_t() * weight
            if first_left:
                a, b = vpow(0, m), vpow(1, n)
                term = walg.zero()
                if m:
                    term = term + dpow(0, m) * b
                if n:
                    term = term + a * dpow(1, n)
                base = a * b
            else:
                a, b = vpow(1, n), vpow(0, m)
                term = walg.zero()
                if n:
                    term = term + dpow(1, n) * b
                if m:
                    term = term + a * dpow(0, m)
                base = a * b
            out = out + term.scale(c)
            if not dc.is_zero():
                out = out + base.scale(dc)
        return out


def hamilton_flow(H: WeylExpr, g: ParamPoly) -> FlowDerivation:
    """Derivation of the weighted Hamiltonian system attached to H."""
    if not H.is_polynomial():
        raise WeylError("Hamiltonian must be polynomial in the generators")
    alg = H.algebra
    v1, v2 = alg.gens()
    d1 = div_h(commutator(v1, H))
    d2 = div_h(commutator(v2, H))
    return FlowDerivation(alg, (d1, d2), g)


def apply_derivation(d: FlowDerivation, f: WeylExpr) -> WeylExpr:
    if d.algebra.names != f.algebra.names:
        raise WeylError("derivation/expression algebra mismatch")
    return d.apply(f)


def classical_limit(f: WeylExpr):
    """h -> 0 specialization as a commutative (Poisson) element."""
    from .classical import CExpr
    res = {}
    for k, c in f.terms.items():
        if c.den.subs_zero("h").is_zero():
            raise WeylError(f"coefficient {c.text()} has a pole at h = 0")
        nc = c.specialize({"h": ParamPoly.const(0)})
        if not nc.is_zero():
            res[k] = nc
    return CExpr(f.algebra.names, f.algebra.laurent, res)
