"""Commutative Poisson counterpart of the quantum engine.

Deliberately independent of the noncommutative code paths: multiplication
adds exponents, the bracket is the Poisson bracket of the plane, flows are
classical Hamiltonian vector fields.  Used as the second route of every
quantum-vs-classical cross-check, so it must not share the reordering
machinery it is checking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeff import ParamPoly, ParamRat, RAT_ONE, RAT_ZERO, QQ

__all__ = ["CExpr", "CAlgebra", "poisson", "c_substitute", "CFlow", "c_reconstruct"]


class ClassicalError(ValueError):
    pass


@dataclass(frozen=True)
class CAlgebra:
    names: tuple[str, str]
    laurent: str | None = None

    def zero(self):
        return CExpr(self.names, self.laurent, {})

    def scalar(self, c):
        if isinstance(c, ParamPoly):
            c = ParamRat.from_poly(c)
        elif not isinstance(c, ParamRat):
            c = ParamRat.const(c)
        return CExpr(self.names, self.laurent, {} if c.is_zero() else {(0, 0): c})

    def one(self):
        return self.scalar(1)

    def var(self, which: int):
        k = (1, 0) if which == 0 else (0, 1)
        return CExpr(self.names, self.laurent, {k: RAT_ONE})

    def env(self):
        return {self.names[0]: self.var(0), self.names[1]: self.var(1)}


class CExpr:
    """Commutative Laurent polynomial in two variables over ParamRat."""

    __slots__ = ("names", "laurent", "terms")

    def __init__(self, names, laurent, terms):
        self.names = tuple(names)
        self.laurent = laurent
        self.terms = {k: c for k, c in terms.items() if not c.is_zero()}

    @property
    def algebra(self):
        return CAlgebra(self.names, self.laurent)

    def is_zero(self):
        return not self.terms

    def is_central(self):
        return all(k == (0, 0) for k in self.terms)

    def is_polynomial(self):
        return all(m >= 0 and n >= 0 for m, n in self.terms)

    def coeff(self, m, n):
        return self.terms.get((m, n), RAT_ZERO)

    def __eq__(self, other):
        if not isinstance(other, CExpr):
            return NotImplemented
        return self.names == other.names and self.terms == other.terms

    def __hash__(self):
        return hash((self.names, frozenset(self.terms.items())))

    def __add__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            other = self.algebra.scalar(other)
        res = dict(self.terms)
        for k, c in other.terms.items():
            nc = res.get(k, RAT_ZERO) + c
            if nc.is_zero():
                res.pop(k, None)
            else:
                res[k] = nc
        return CExpr(self.names, self.laurent or other.laurent, res)

    __radd__ = __add__

    def __neg__(self):
        return CExpr(self.names, self.laurent, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            other = self.algebra.scalar(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, QQ, ParamPoly, ParamRat)):
            return self.scale(other)
        res: dict = {}
        for (m1, n1), c1 in self.terms.items():
            for (m2, n2), c2 in other.terms.items():
                k = (m1 + m2, n1 + n2)
                nc = res.get(k, RAT_ZERO) + c1 * c2
                if nc.is_zero():
                    res.pop(k, None)
                else:
                    res[k] = nc
        return CExpr(self.names, self.laurent or other.laurent, res)

    __rmul__ = __mul__

    def scale(self, c):
        if isinstance(c, ParamPoly):
            c = ParamRat.from_poly(c)
        elif not isinstance(c, ParamRat):
            c = ParamRat.const(c)
        if c.is_zero():
            return self.algebra.zero()
        return CExpr(self.names, self.laurent, {k: v * c for k, v in self.terms.items()})

    def int_pow(self, n):
        if n < 0:
            inv = self.monomial_inverse()
            if inv is None:
                raise ClassicalError("negative power of a non-monomial")
            return inv.int_pow(-n)
        r = self.algebra.one()
        for _ in range(n):
            r = r * self
        return r

    def monomial_inverse(self):
        if len(self.terms) != 1:
            return None
        (m, n), c = next(iter(self.terms.items()))
        if m and n:
            return None
        return CExpr(self.names, self.laurent, {(-m, -n): c.inv()})

    def diff(self, which: int):
        res = {}
        for (m, n), c in self.terms.items():
            if which == 0 and m:
                res[(m - 1, n)] = c.scale(m)
            elif which == 1 and n:
                res[(m, n - 1)] = c.scale(n)
        return CExpr(self.names, self.laurent, res)

    def diff_t(self):
        res = {}
        for k, c in self.terms.items():
            dc = c.diff_t()
            if not dc.is_zero():
                res[k] = dc
        return CExpr(self.names, self.laurent, res)

    def map_coeffs(self, fn):
        res = {}
        for k, c in self.terms.items():
            nc = fn(c)
            if not nc.is_zero():
                res[k] = nc
        return CExpr(self.names, self.laurent, res)

    def principal_part(self):
        idx = 0 if self.laurent == "first" else 1
        princ = {k: c for k, c in self.terms.items() if k[idx] < 0}
        mindeg = min((k[idx] for k in princ), default=0)
        return CExpr(self.names, self.laurent, princ), mindeg

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0], kv[0][1]),
                      reverse=True)

    def text(self):
        from .grammar import coeff_prefix, rat_text
        if not self.terms:
            return "0"
        chunks = []
        for (m, n), c in self.sorted_terms():
            parts = []
            if m:
                parts.append(self.names[0] if m == 1 else f"{self.names[0]}^{m}")
            if n:
                parts.append(self.names[1] if n == 1 else f"{self.names[1]}^{n}")
            mono = "*".join(parts)
            if not mono:
                v = rat_text(c)
                body = f"({v})" if (" + " in v or " - " in v) else v
            else:
                body = f"{coeff_prefix(c)}{mono}"
            if not chunks:
                chunks.append(body)
            elif body.startswith("-"):
                chunks.append(f" - {body[1:]}")
            else:
                chunks.append(f" + {body}")
        return "".join(chunks)

    __str__ = text

    def __repr__(self):
        return f"CExpr({self.text()})"


def poisson(u: CExpr, v: CExpr) -> CExpr:
    """{u, v} = du/dx dv/dy - du/dy dv/dx."""
    return u.diff(0) * v.diff(1) - u.diff(1) * v.diff(0)


def c_substitute(f: CExpr, img1: CExpr, img2: CExpr) -> CExpr:
    out = img1.algebra.zero()
    cache1: dict[int, CExpr] = {}
    cache2: dict[int, CExpr] = {}

    def pw(img, cache, e):
        r = cache.get(e)
        if r is None:
            r = img.int_pow(e)
            cache[e] = r
        return r

    for (m, n), c in f.terms.items():
        w = pw(img1, cache1, m) * pw(img2, cache2, n)
        out = out + w.scale(c)
    return out


@dataclass
class CFlow:
    """Classical flow: generator images plus g(t) d/dt on coefficients."""

    images: tuple[CExpr, CExpr]
    weight: ParamPoly

    @staticmethod
    def from_hamiltonian(H: CExpr, g: ParamPoly) -> "CFlow":
        return CFlow((H.diff(1), -H.diff(0)), g)

    def apply(self, f: CExpr) -> CExpr:
        dx, dy = self.images
        alg = f.algebra
        out = f.diff(0) * dx + f.diff(1) * dy
        dt = f.diff_t().scale(ParamRat.from_poly(self.weight))
        return out + dt if not dt.is_zero() else out


def c_reconstruct(vx: CExpr, vy: CExpr) -> CExpr:
    """Classical Hamiltonian with dH/dy = vx and dH/dx = -vy (no constant)."""
    if not (vx.is_polynomial() and vy.is_polynomial()):
        raise ClassicalError("reconstruction needs polynomial components")
    H1 = {}
    for (m, n), c in vx.terms.items():
        H1[(m, n + 1)] = c.scale(QQ(1, n + 1))
    H1 = CExpr(vx.names, vx.laurent, H1)
    rem = -vy - H1.diff(0)
    if any(n for (_, n) in rem.terms):
        raise ClassicalError("vector field is not Hamiltonian")
    f = {}
    for (m, _), c in rem.terms.items():
        f[(m + 1, 0)] = c.scale(QQ(1, m + 1))
    return H1 + CExpr(vx.names, vx.laurent, f)
