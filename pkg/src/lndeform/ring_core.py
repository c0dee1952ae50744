"""Finite-rank commutative rings, their additive maps and Hochschild cohomology.

Conventions
-----------
* A ring of rank ``r`` has structure constants ``mult[i, j, k]`` with
  ``e_i e_j = sum_k mult[i, j, k] e_k``.
* An additive map is an ``r x r`` matrix whose column ``j`` is the image of
  ``e_j``.
* A multilinear map ``A^{(x)n} -> A`` is an array of shape ``(r,)*n + (r,)``:
  ``f[i1, ..., in, :]`` holds the coordinates of ``f(e_i1 (x) ... (x) e_in)``.
* Batched maps carry one extra leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from string import ascii_lowercase

import numpy as np

from .base import BaseRing, Z
from .linalg import CohomologyResult, cohomology_of, kernel

__all__ = [
    "FiniteRing",
    "RingReport",
    "validate_ring",
    "integers",
    "monogenic_ring",
    "truncated_polynomial_ring",
    "square_zero_ring",
    "product_ring",
    "leibniz_defect",
    "is_derivation",
    "derivation_basis",
    "hochschild_differential",
    "hochschild_matrix",
    "hochschild_cohomology",
    "CohomologyResult",
]


@dataclass
class FiniteRing:
    base: BaseRing
    basis: list[str]
    mult: np.ndarray
    unit: np.ndarray

    def __post_init__(self):
        r = len(self.basis)
        if r < 1:
            raise ValueError("rank must be at least 1")
        self.mult = self.base.array(self.mult)
        self.unit = self.base.array(self.unit)
        if self.mult.shape != (r, r, r):
            raise ValueError(f"mult has shape {self.mult.shape}, expected {(r, r, r)}")
        if self.unit.shape != (r,):
            raise ValueError(f"unit has shape {self.unit.shape}, expected {(r,)}")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def multiply(self, u, v) -> np.ndarray:
        """Product of coordinate vectors (leading batch axes allowed)."""
        return _mul(self, u, v)

    def left_matrix(self, u) -> np.ndarray:
        """Matrix of ``x -> u x``."""
        return self.base.einsum("i,ijk->kj", self.base.array(u), self.mult)

    def element(self, coords) -> np.ndarray:
        return self.base.array(coords)

    def basis_vector(self, i: int) -> np.ndarray:
        v = self.base.zeros(self.rank)
        v[i] = self.base.coerce(1)
        return v

    def identity_map(self) -> np.ndarray:
        return self.base.identity(self.rank)

    def with_base(self, base: BaseRing) -> "FiniteRing":
        return FiniteRing(base, list(self.basis), self.mult, self.unit)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteRing)
            and self.base == other.base
            and self.basis == other.basis
            and np.array_equal(self.mult, other.mult)
            and np.array_equal(self.unit, other.unit)
        )

    def to_document(self) -> dict:
        r = self.rank
        return {
            "base": self.base.to_document(),
            "rank": r,
            "basis": list(self.basis),
            "unit": [_plain(x) for x in self.unit],
            "mult": [[[_plain(x) for x in self.mult[i, j]] for j in range(r)] for i in range(r)],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "FiniteRing":
        base = BaseRing.parse(doc.get("base", "Z"))
        r = int(doc["rank"])
        basis = list(doc.get("basis") or [f"e{i + 1}" for i in range(r)])
        mult = np.array(doc["mult"], dtype=object)
        unit = np.array(doc["unit"], dtype=object)
        if len(basis) != r or mult.shape != (r, r, r) or unit.shape != (r,):
            raise ValueError(f"ring document does not match rank {r}")
        return cls(base, basis, mult, unit)


def _plain(x):
    from fractions import Fraction

    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return int(x)


def _mul(ring: FiniteRing, u, v):
    u = np.asarray(u, dtype=object)
    v = np.asarray(v, dtype=object)
    batch = np.broadcast_shapes(u.shape[:-1], v.shape[:-1])
    u = np.broadcast_to(u, batch + u.shape[-1:]).reshape(-1, ring.rank)
    v = np.broadcast_to(v, batch + v.shape[-1:]).reshape(-1, ring.rank)
    out = ring.base.einsum("zi,zj,ijk->zk", u, v, ring.mult)
    return out.reshape(batch + (ring.rank,))


@dataclass
class RingReport:
    ok: bool
    law: str = ""
    where: tuple = ()
    detail: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ring: pass"
        return f"ring: FAIL {self.law} at {self.where}: {self.detail}"


def validate_ring(A: FiniteRing) -> RingReport:
    """Check commutativity, associativity and the unit law on all basis elements."""
    r, mu, base = A.rank, A.mult, A.base
    for i in range(r):
        for j in range(i + 1, r):
            if any(mu[i, j, k] != mu[j, i, k] for k in range(r)):
                return RingReport(False, "commutativity", (i + 1, j + 1), f"e{i + 1}e{j + 1} != e{j + 1}e{i + 1}")
    left = base.einsum("ijm,mkn->ijkn", mu, mu)
    right = base.einsum("jkm,imn->ijkn", mu, mu)
    bad = np.argwhere(np.asarray(left != right, dtype=bool).any(axis=-1))
    if bad.size:
        i, j, k = (int(x) for x in bad[0])
        return RingReport(False, "associativity", (i + 1, j + 1, k + 1), "(e_i e_j) e_k != e_i (e_j e_k)")
    unit_left = base.einsum("i,ijk->jk", A.unit, mu)
    for j in range(r):
        expected = A.basis_vector(j)
        if any(unit_left[j, k] != expected[k] for k in range(r)):
            return RingReport(False, "unit", (j + 1,), f"1 * e{j + 1} != e{j + 1}")
    return RingReport(True)


# ---------------------------------------------------------------------------
# Built-in rings
# ---------------------------------------------------------------------------


def integers(base: BaseRing = Z) -> FiniteRing:
    return FiniteRing(base, ["1"], [[[1]]], [1])


def monogenic_ring(lower: list[int], base: BaseRing = Z, var: str = "x") -> FiniteRing:
    """``base[x] / (x^k + c_{k-1} x^{k-1} + ... + c_0)`` with ``lower = [c_0, ..., c_{k-1}]``."""
    k = len(lower)
    if k < 1:
        raise ValueError("need a polynomial of degree >= 1")
    # reduce x^n for n < 2k - 1 into the basis 1, x, ..., x^(k-1)
    powers = []
    for n in range(2 * k - 1):
        if n < k:
            v = [0] * k
            v[n] = 1
        else:
            prev = powers[n - 1]
            v = [0] + prev[:-1]
            top = prev[-1]
            v = [v[i] - top * lower[i] for i in range(k)]
        powers.append(v)
    mult = [[powers[i + j] for j in range(k)] for i in range(k)]
    names = ["1"] + [var if n == 1 else f"{var}^{n}" for n in range(1, k)]
    return FiniteRing(base, names, mult, powers[0])


def truncated_polynomial_ring(k: int, base: BaseRing = Z, var: str = "x") -> FiniteRing:
    """``base[x] / (x^k)``."""
    return monogenic_ring([0] * k, base, var)


def square_zero_ring(gens: int, base: BaseRing = Z) -> FiniteRing:
    """``base[x_1..x_g] / (x_i x_j)``; for ``g = 2`` this is ``Z[x, y]/(x^2, xy, y^2)``."""
    r = gens + 1
    mult = np.zeros((r, r, r), dtype=np.int64)
    for i in range(r):
        mult[0, i, i] = 1
        mult[i, 0, i] = 1
    names = ["1"] + ([f"x{i + 1}" for i in range(gens)] if gens > 2 else ["x", "y"][:gens])
    unit = [1] + [0] * gens
    return FiniteRing(base, names, mult, unit)


def product_ring(copies: int, base: BaseRing = Z) -> FiniteRing:
    """``base^k`` with the idempotent basis."""
    mult = np.zeros((copies, copies, copies), dtype=np.int64)
    for i in range(copies):
        mult[i, i, i] = 1
    return FiniteRing(base, [f"e{i + 1}" for i in range(copies)], mult, [1] * copies)


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------


def leibniz_defect(A: FiniteRing, f) -> np.ndarray:
    """``f(e_i e_j) - e_i f(e_j) - f(e_i) e_j`` for all ``i, j`` (batched over leading axes)."""
    f = np.asarray(f, dtype=object)
    batch = f.shape[:-2]
    F = f.reshape((-1, A.rank, A.rank))
    base, mu = A.base, A.mult
    lhs = base.einsum("ijc,zkc->zijk", mu, F)
    t1 = base.einsum("imk,zmj->zijk", mu, F)
    t2 = base.einsum("mjk,zmi->zijk", mu, F)
    out = base.reduce(lhs - t1 - t2)
    return out.reshape(batch + (A.rank,) * 3)


def is_derivation(A: FiniteRing, f) -> bool:
    return not np.any(leibniz_defect(A, f) != 0)


def derivation_basis(A: FiniteRing) -> list[np.ndarray]:
    """Basis of ``Der(A)`` (a free group over Z: the integral kernel of the Leibniz system)."""
    r = A.rank
    eye = A.base.identity(r * r).reshape(r * r, r, r)
    L = leibniz_defect(A, eye).reshape(r * r, -1).T
    K = kernel(A.base, L)
    return [A.base.array(K[:, k]).reshape(r, r) for k in range(K.shape[1])]


# ---------------------------------------------------------------------------
# Hochschild complex
# ---------------------------------------------------------------------------


def _letters(n):
    return ascii_lowercase[:n]


def mult_slots(A: FiniteRing, F, i: int, n: int) -> np.ndarray:
    """Batched ``F(..., a_i a_{i+1}, ...)``: ``F`` has shape ``(B,) + (r,)*n + (r,)``.

    Returns shape ``(B,) + (r,)*(n+1) + (r,)`` with slots ``i, i+1`` (1-based)
    multiplied before feeding ``F``.
    """
    ins = _letters(n + 1)
    fin = ins[: i - 1] + "y" + ins[i + 1:]
    spec = f"{ins[i - 1]}{ins[i]}y,Z{fin}w->Z{ins}w"
    return A.base.einsum(spec, A.mult, F)


def left_product(A: FiniteRing, P, F, n: int) -> np.ndarray:
    """Batched ``P(a_1) * F(a_2, ..., a_{n+1})``.

    ``P`` has shape ``(B, r, r)`` (an additive map per batch entry, or shared
    when ``B`` is 1); ``F`` has shape ``(B,) + (r,)*n + (r,)``.
    """
    ins = _letters(n + 1)
    spec = f"Zu{ins[0]},Z{ins[1:]}v,uvw->Z{ins}w"
    return A.base.einsum(spec, P, F, A.mult)


def right_product(A: FiniteRing, F, P, n: int) -> np.ndarray:
    """Batched ``F(a_1, ..., a_n) * P(a_{n+1})``."""
    ins = _letters(n + 1)
    spec = f"Z{ins[:-1]}u,Zv{ins[-1]},uvw->Z{ins}w"
    return A.base.einsum(spec, F, P, A.mult)


def _broadcast_batch(P, B):
    P = np.asarray(P, dtype=object)
    if P.ndim == 2:
        P = P[None]
    if P.shape[0] == 1 and B != 1:
        P = np.broadcast_to(P, (B,) + P.shape[1:])
    return P


def hochschild_differential(A: FiniteRing, f, n: int) -> np.ndarray:
    """``b_{n-1} f`` for ``f`` in ``C^{n-1}(A, A)`` of shape ``(r,)*(n-1) + (r,)``."""
    f = A.base.array(f)
    return hochschild_differential_batched(A, f[None], n)[0]


def hochschild_differential_batched(A: FiniteRing, F, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    base = A.base
    F = np.asarray(F, dtype=object)
    B = F.shape[0]
    ident = _broadcast_batch(A.identity_map(), B)
    if n == 1:
        # b_0 f (a) = a f - f a, with f an element of A
        left = base.einsum("zj,ijk->zik", F, A.mult)
        right = base.einsum("zj,jik->zik", F, A.mult)
        return base.reduce(left - right)
    m = n - 1
    out = left_product(A, ident, F, m)
    for i in range(1, n):
        term = mult_slots(A, F, i, m)
        out = out + term if i % 2 == 0 else out - term
    last = right_product(A, F, ident, m)
    out = out + last if n % 2 == 0 else out - last
    return base.reduce(out)


def hochschild_matrix(A: FiniteRing, n: int) -> np.ndarray:
    """Matrix of ``b_{n-1}: C^{n-1} -> C^n`` on flattened cochains."""
    r = A.rank
    src = r ** n  # dim C^{n-1} = r^(n-1) * r
    eye = A.base.identity(src).reshape((src,) + (r,) * n)
    img = hochschild_differential_batched(A, eye, n)
    return img.reshape(src, -1).T


def hochschild_cohomology(A: FiniteRing, n: int, representatives: int = 0) -> CohomologyResult:
    """``HH^n(A) = ker b_n / im b_{n-1}`` computed exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    r = A.rank
    dim = r ** (n + 1)
    incoming = hochschild_matrix(A, n) if n >= 1 else np.zeros((dim, 0), dtype=object)
    outgoing = hochschild_matrix(A, n + 1)
    return cohomology_of(A.base, incoming, outgoing, dim, representatives)
