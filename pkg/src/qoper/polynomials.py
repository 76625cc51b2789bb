"""Univariate polynomials and rational functions over complex scalars.

Coefficients may be Python complex/float numbers (the default, double
precision) or ``fractions.Fraction`` values (the exact-rational shadow mode
used by identity tests).  All ring operations are generic over the scalar
type; only root extraction and least-squares solving require floating point.

Polynomials are stored lowest degree first.  The zero polynomial has an
empty coefficient tuple and degree -1 by convention.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

#: Default comparison tolerance.  Comparisons are relative with scale
#: ``(1 + magnitude)`` throughout the package.
TAU = 1e-10


def is_exact(x) -> bool:
    """True if x lives in the exact-rational domain."""
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def close(a, b, tol: float = TAU) -> bool:
    """Relative comparison with scale 1 + max magnitude."""
    a = complex(a)
    b = complex(b)
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def ensure_finite(x) -> complex:
    cx = complex(x)
    if not (np.isfinite(cx.real) and np.isfinite(cx.imag)):
        raise ValueError(f"non-finite scalar: {x!r}")
    return cx


class Poly:
    """Univariate polynomial, coefficients lowest degree first.

    Immutable.  Trailing (near-)zero coefficients are trimmed on
    construction; in floating mode "zero" means modulus below ``tol``
    relative to the largest coefficient.
    """

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs: Iterable, tol: float = TAU):
        cs = list(coeffs)
        exact = all(is_exact(c) for c in cs)
        if exact:
            cs = [Fraction(c) for c in cs]
            while cs and cs[-1] == 0:
                cs.pop()
        else:
            cs = [ensure_finite(c) for c in cs]
            scale = max((abs(c) for c in cs), default=0.0)
            while cs and abs(cs[-1]) <= tol * (1.0 + scale):
                cs.pop()
        self.coeffs = tuple(cs)
        self.exact = exact

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero() -> "Poly":
        return Poly([])

    @staticmethod
    def one() -> "Poly":
        return Poly([1])

    @staticmethod
    def x() -> "Poly":
        return Poly([0, 1])

    @staticmethod
    def constant(c) -> "Poly":
        return Poly([c])

    @staticmethod
    def from_roots(roots: Sequence, leading=1.0) -> "Poly":
        p = Poly([leading])
        for r in roots:
            p = p * Poly([-r, 1])
        return p

    # -- basic queries -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def leading(self):
        if self.is_zero():
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __call__(self, z):
        acc = Fraction(0) if (self.exact and is_exact(z)) else 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly([(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0)
                     for k in range(n)])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return Poly.zero()
        a, b = self.coeffs, other.coeffs
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return Poly(out)

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial powers are not defined")
        out = Poly.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c) -> "Poly":
        return Poly([c * ck for ck in self.coeffs])

    def monic(self) -> "Poly":
        """Rescale so the leading coefficient is 1."""
        lc = self.leading()
        return Poly([c / lc for c in self.coeffs])

    def norm(self) -> float:
        return max((abs(complex(c)) for c in self.coeffs), default=0.0)

    def to_float(self) -> "Poly":
        return Poly([complex(c) for c in self.coeffs])


def q_shift(p: Poly, q) -> Poly:
    """Return p(qz): coefficient c_k picks up a factor q**k.

    The substitution z -> qz is the basic dilation the whole theory is
    built on; it is a ring morphism, inverted by shifting with 1/q.
    """
    if complex(q) == 0:
        raise ValueError("q must be nonzero")
    out = []
    f = 1 if (p.exact and is_exact(q)) else ensure_finite(q) / ensure_finite(q)
    qk = f  # q**0, in the matching domain
    for c in p.coeffs:
        out.append(c * qk)
        qk = qk * q
    return Poly(out)


def poly_roots(p: Poly, tol: float = TAU) -> list[complex]:
    """All roots with multiplicity, via companion-matrix eigenvalues.

    Eigenvalues are polished with two Newton steps; the residual of every
    returned root satisfies |p(root)| <= tol * (1 + max|coeff|).
    """
    if p.degree < 1:
        raise ValueError("root extraction needs degree >= 1")
    cs = [complex(c) for c in p.coeffs]
    lc = cs[-1]
    monic = [c / lc for c in cs]
    n = len(monic) - 1
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = [-monic[k] for k in range(n)]
    roots = np.linalg.eigvals(comp)

    dcs = [k * cs[k] for k in range(1, len(cs))]

    def ev(coeffs, z):
        acc = 0j
        for c in reversed(coeffs):
            acc = acc * z + c
        return acc

    polished = []
    for r in roots:
        for _ in range(2):
            d = ev(dcs, r)
            if abs(d) > 1e-14:
                r = r - ev(cs, r) / d
        polished.append(r)
    scale = 1.0 + max(abs(c) for c in cs)
    for r in polished:
        if abs(ev(cs, r)) > max(tol, 1e-8) * scale:
            raise ArithmeticError(
                f"root polishing failed: residual {abs(ev(cs, r)):.3e} at {r}")
    return sorted(polished, key=lambda w: (round(w.real, 12), round(w.imag, 12)))


def q_distinct(p1: Poly, p2: Poly, q, K: int, tol: float = TAU):
    """Check that no root of p1 equals q**k times a root of p2, |k| <= K.

    Returns (True, None) when the root sets are q-distinct within the
    window, else (False, (z1, z2, k)) with a violating triple.
    Constant polynomials have no roots and are trivially q-distinct.
    """
    if p1.is_zero() or p2.is_zero():
        raise ValueError("q_distinct requires nonzero polynomials")
    if K < 1:
        raise ValueError("K must be >= 1")
    r1 = poly_roots(p1.to_float()) if p1.degree >= 1 else []
    r2 = poly_roots(p2.to_float()) if p2.degree >= 1 else []
    qc = complex(q)
    for z1 in r1:
        for z2 in r2:
            for k in range(-K, K + 1):
                if abs(z1 - qc**k * z2) <= tol * (1.0 + abs(z2)):
                    return False, (z1, z2, k)
    return True, None


def linear_coeff_solve(constraints, degree_bound: int, tol: float = TAU) -> Poly:
    """Interpolation-style solve for a polynomial of bounded degree.

    ``constraints`` is a list of (point, weight_fn, rhs) triples imposing
    sum_k c_k * weight_fn(point, k) = rhs, or simply (point, rhs) pairs for
    plain interpolation p(point) = rhs.

    Raises ValueError("underdetermined") on rank deficiency and
    ValueError("no polynomial solution at this degree bound") when the
    least-squares residual exceeds tolerance.
    """
    rows = []
    rhs = []
    for con in constraints:
        if len(con) == 2:
            pt, b = con
            rows.append([complex(pt) ** k for k in range(degree_bound + 1)])
        else:
            pt, wfn, b = con
            rows.append([complex(wfn(pt, k)) for k in range(degree_bound + 1)])
        rhs.append(complex(b))
    if len(rows) < degree_bound + 1:
        raise ValueError("underdetermined")
    M = np.array(rows, dtype=complex)
    b = np.array(rhs, dtype=complex)
    sol, _, rank, _ = np.linalg.lstsq(M, b, rcond=None)
    if rank < degree_bound + 1:
        raise ValueError("underdetermined")
    scale = 1.0 + max(abs(b).max(initial=0.0), abs(M).max(initial=0.0))
    resid = np.abs(M @ sol - b).max(initial=0.0)
    if resid > max(tol, 1e-9) * scale:
        raise ValueError("no polynomial solution at this degree bound")
    return Poly(list(sol))


def solve_poly_q_difference(alpha, beta, rhs, q, max_degree: int,
                            tol: float = TAU, seed: int = 7):
    """Minimal-degree polynomial f with alpha(z) f(z) + beta(z) f(qz) = rhs(z).

    alpha, beta, rhs are callables evaluating scalar functions.  The
    equation is sampled at generic points and solved for the coefficients
    of f by least squares, increasing the trial degree until the system is
    consistent.  Returns None when no polynomial of degree <= max_degree
    satisfies the equation, which signals resonance or degeneracy upstream.
    """
    qc = complex(q)
    rng = np.random.default_rng(seed)
    for d in range(max_degree + 1):
        npts = d + 8
        pts = 1.1 * np.exp(2j * np.pi * rng.random(npts))
        M = np.zeros((npts, d + 1), dtype=complex)
        b = np.zeros(npts, dtype=complex)
        ok = True
        for s, x in enumerate(pts):
            try:
                av, bv, rv = complex(alpha(x)), complex(beta(x)), complex(rhs(x))
            except ZeroDivisionError:
                ok = False
                break
            for k in range(d + 1):
                M[s, k] = av * x**k + bv * (qc * x) ** k
            b[s] = rv
        if not ok:
            continue
        sol, *_ = np.linalg.lstsq(M, b, rcond=None)
        scale = 1.0 + np.abs(b).max(initial=0.0)
        if np.abs(M @ sol - b).max(initial=0.0) <= max(tol, 1e-9) * scale:
            return Poly(list(sol))
    return None


class RatFun:
    """Ratio of two polynomials; denominator normalized to leading 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.one()
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not num.is_zero():
            lc = den.leading()
            num = Poly([c / lc for c in num.coeffs])
            den = Poly([c / lc for c in den.coeffs])
        else:
            den = Poly.one()
        self.num = num
        self.den = den

    @staticmethod
    def from_scalar(c) -> "RatFun":
        return RatFun(Poly([c]))

    @staticmethod
    def zero() -> "RatFun":
        return RatFun(Poly.zero())

    @staticmethod
    def one() -> "RatFun":
        return RatFun(Poly.one())

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def is_zero(self, tol: float = TAU) -> bool:
        if self.num.is_zero():
            return True
        if self.num.exact:
            return False
        return self.num.norm() <= tol * (1.0 + self.den.norm())

    def __add__(self, other: "RatFun") -> "RatFun":
        return RatFun(self.num * other.den + other.num * self.den,
                      self.den * other.den)

    def __sub__(self, other: "RatFun") -> "RatFun":
        return self + (-other)

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den)

    def __mul__(self, other) -> "RatFun":
        if isinstance(other, RatFun):
            return RatFun(self.num * other.num, self.den * other.den)
        return RatFun(self.num.scale(other), self.den)

    def __rmul__(self, other) -> "RatFun":
        return self * other

    def inv(self) -> "RatFun":
        if self.num.is_zero():
            raise ZeroDivisionError("inverting zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other: "RatFun") -> "RatFun":
        return self * other.inv()

    def shift(self, q) -> "RatFun":
        return RatFun(q_shift(self.num, q), q_shift(self.den, q))

    def __repr__(self):
        return f"RatFun({self.num!r}, {self.den!r})"
