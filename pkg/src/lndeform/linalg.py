"""Exact linear algebra over Z, Q and Z/p.

Matrices act on column vectors.  Over Z everything goes through the Smith
normal form; over fields through reduced row echelon form.  Linear solves
either return the canonical solution (free variables set to zero) or raise
:class:`Unsolvable` carrying a checkable certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .base import BaseRing

__all__ = [
    "Certificate",
    "Unsolvable",
    "CohomologyResult",
    "smith_normal_form",
    "invariant_factors",
    "hermite_normal_form",
    "rref",
    "rank",
    "kernel",
    "solve",
    "in_span",
    "reduce_mod_span",
    "cohomology_of",
]


def _obj(M) -> np.ndarray:
    return np.array(M, dtype=object)


def _as_matrix(M, rows=None, cols=None) -> np.ndarray:
    M = _obj(M)
    if M.ndim == 1:
        M = M.reshape(-1, 1) if cols is None else M.reshape(rows, cols)
    return M


# ---------------------------------------------------------------------------
# Integer normal forms
# ---------------------------------------------------------------------------


def smith_normal_form(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(U, D, V)`` with ``U @ M @ V == D`` diagonal, ``d1 | d2 | ...``, U and V unimodular."""
    M = _obj(M)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    m, n = M.shape
    if m == 0 or n == 0:
        return _obj(np.eye(m, dtype=np.int64)), M.copy(), _obj(np.eye(n, dtype=np.int64))
    try:
        U, D, V = _kernels.smith_int64(M.astype(np.int64) if _fits(M) else _overflow())
        return U.astype(object), D.astype(object), V.astype(object)
    except (_kernels.KernelOverflow, OverflowError):
        return _kernels.smith_object(M)


def _overflow():
    raise _kernels.KernelOverflow


def _fits(M) -> bool:
    return M.size == 0 or int(np.abs(M).max()) < _kernels.LIMIT


def invariant_factors(M) -> list[int]:
    """Nonzero diagonal entries of the Smith form."""
    _, D, _ = smith_normal_form(M)
    out = []
    for i in range(min(D.shape)):
        if D[i, i] != 0:
            out.append(int(D[i, i]))
    return out


def hermite_normal_form(M) -> np.ndarray:
    """Row-style Hermite form of the row lattice of ``M`` (zero rows dropped).

    Pivots are positive and strictly to the right of the previous row's; the
    entries above each pivot lie in ``[0, pivot)``.  The result depends only
    on the lattice spanned by the rows.
    """
    H = _obj(M).copy()
    if H.ndim != 2:
        raise ValueError("expected a matrix")
    k, n = H.shape
    r = 0
    for c in range(n):
        if r >= k:
            break
        while True:
            nz = [i for i in range(r, k) if H[i, c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(H[i, c]), i))
            if piv != r:
                H[[r, piv]] = H[[piv, r]]
            if H[r, c] < 0:
                H[r] = -H[r]
            done = True
            for i in range(r + 1, k):
                if H[i, c] != 0:
                    H[i] = H[i] - (H[i, c] // H[r, c]) * H[r]
                    if H[i, c] != 0:
                        done = False
            if done:
                break
        if r < k and H[r, c] != 0:
            for i in range(r):
                H[i] = H[i] - (H[i, c] // H[r, c]) * H[r]
            r += 1
    return H[:r]


# ---------------------------------------------------------------------------
# Row echelon form over fields
# ---------------------------------------------------------------------------


def _rref_fraction(M, npiv):
    A = _obj(M).copy()
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(npiv):
        if r >= m:
            break
        piv = next((i for i in range(r, m) if A[i, c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * (1 / Fraction(A[r, c]))
        for i in range(m):
            if i != r and A[i, c] != 0:
                A[i] = A[i] - A[i, c] * A[r]
        pivots.append(c)
        r += 1
    return A, pivots


def rref(base: BaseRing, M, npiv: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over a field; pivots only in the first ``npiv`` columns."""
    M = _obj(M)
    npiv = M.shape[1] if npiv is None else npiv
    if base.kind == "Zmod":
        if M.size == 0:
            return M.copy(), []
        try:
            R, piv = _kernels.rref_mod_p(M, base.p, npiv)
            return R.astype(object), piv
        except _kernels.KernelOverflow:
            pass
        A, piv = _rref_fraction(M % base.p, npiv)  # pragma: no cover - only for huge p
        return base.array(A), piv
    if base.kind == "Q":
        return _rref_fraction(base.array(M), npiv)
    raise ValueError("rref needs a field")


# ---------------------------------------------------------------------------
# Rank, kernel, solve
# ---------------------------------------------------------------------------


def _clear_denominators(M):
    M = _obj(M)
    out = M.copy()
    for i in range(M.shape[0]):
        den = 1
        for x in M[i]:
            den = np.lcm(den, Fraction(x).denominator)
        out[i] = [int(Fraction(x) * den) for x in M[i]]
    return out


def rank(base: BaseRing, M) -> int:
    M = _obj(M)
    if M.size == 0:
        return 0
    if base.kind == "Zmod":
        return len(rref(base, M)[1])
    if base.kind == "Q":
        M = _clear_denominators(M)
    return len(invariant_factors(M))


def kernel(base: BaseRing, M) -> np.ndarray:
    """Basis of ``{x : M x = 0}`` as the columns of the returned matrix.

    Over Z the basis spans the full integral kernel and is put in Hermite
    form, so it is canonical.
    """
    M = _obj(M)
    m, n = M.shape
    if n == 0:
        return _obj(np.zeros((0, 0), dtype=np.int64))
    if m == 0:
        return base.identity(n)
    if base.kind == "Z":
        _, D, V = smith_normal_form(M)
        r = sum(1 for i in range(min(m, n)) if D[i, i] != 0)
        K = V[:, r:]
        if K.shape[1] == 0:
            return K
        H = hermite_normal_form(K.T)
        return _obj(H.T)
    R, piv = rref(base, M)
    free = [c for c in range(n) if c not in piv]
    K = base.zeros((n, len(free)))
    for k, c in enumerate(free):
        K[c, k] = base.coerce(1)
        for row, pc in enumerate(piv):
            K[pc, k] = base.coerce(-R[row, c])
    return K


@dataclass
class Certificate:
    """Proof that ``M x = b`` has no solution.

    ``functional @ M`` vanishes (mod ``modulus`` when it is nonzero) while
    ``functional @ b`` does not.  ``modulus == 0`` means exact vanishing.
    """

    functional: np.ndarray
    modulus: int = 0

    def verify(self, base: BaseRing, M, b) -> bool:
        y = _obj(self.functional)
        M = _obj(M)
        b = _obj(b).reshape(-1)
        yM = base.reduce(y @ M) if M.size else _obj([])
        yb = base.reduce(y @ b) if b.size else 0
        if self.modulus:
            return all(v % self.modulus == 0 for v in yM) and yb % self.modulus != 0
        return all(v == 0 for v in yM) and yb != 0


class Unsolvable(ValueError):
    def __init__(self, certificate: Certificate, message: str = "linear system has no solution"):
        super().__init__(message)
        self.certificate = certificate


@dataclass
class _SmithCache:
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    rank: int


_SMITH_CACHE: dict[int, tuple[np.ndarray, _SmithCache]] = {}


def _smith_cached(M) -> _SmithCache:
    key = id(M)
    hit = _SMITH_CACHE.get(key)
    if hit is not None and hit[0] is M:
        return hit[1]
    U, D, V = smith_normal_form(M)
    r = sum(1 for i in range(min(D.shape)) if D[i, i] != 0)
    entry = _SmithCache(U, D, V, r)
    if len(_SMITH_CACHE) > 32:
        _SMITH_CACHE.clear()
    _SMITH_CACHE[key] = (M, entry)
    return entry


def solve(base: BaseRing, M, b) -> np.ndarray:
    """Canonical solution of ``M x = b``; raises :class:`Unsolvable` with a certificate.

    Over Z solvability is decided integrally.
    """
    M = _obj(M)
    b = _obj(b).reshape(-1)
    m, n = M.shape
    if b.shape[0] != m:
        raise ValueError(f"rhs has length {b.shape[0]}, expected {m}")
    if n == 0:
        nz = [i for i in range(m) if b[i] != 0]
        if nz:
            y = base.zeros(m)
            y[nz[0]] = base.coerce(1)
            raise Unsolvable(Certificate(y, 0))
        return base.zeros(0)
    if base.kind == "Z":
        sc = _smith_cached(M)
        c = sc.U @ b
        y = base.zeros(n)
        for i in range(m):
            d = sc.D[i, i] if i < min(m, n) else 0
            if d == 0:
                if c[i] != 0:
                    raise Unsolvable(Certificate(_obj(sc.U[i]).copy(), 0))
            else:
                if c[i] % d != 0:
                    raise Unsolvable(Certificate(_obj(sc.U[i]).copy(), int(d)))
                y[i] = c[i] // d
        return sc.V @ y
    aug = np.concatenate([base.array(M), base.array(b).reshape(-1, 1), base.identity(m)], axis=1)
    R, piv = rref(base, aug, npiv=n)
    r = len(piv)
    for i in range(r, m):
        if R[i, n] != 0:
            raise Unsolvable(Certificate(base.array(R[i, n + 1:]), 0))
    x = base.zeros(n)
    for row, c in enumerate(piv):
        x[c] = R[row, n]
    return x


def in_span(base: BaseRing, M, v) -> bool:
    try:
        solve(base, M, v)
        return True
    except Unsolvable:
        return False


def reduce_mod_span(base: BaseRing, M, v) -> np.ndarray:
    """Canonical representative of ``v`` modulo the column span of ``M``."""
    v = base.array(_obj(v).reshape(-1)).copy()
    M = _obj(M)
    if M.size == 0:
        return v
    if base.kind == "Z":
        H = hermite_normal_form(M.T)
        for row in H:
            c = next(j for j in range(len(row)) if row[j] != 0)
            v = v - (v[c] // row[c]) * row
        return v
    R, piv = rref(base, _obj(M).T)
    for row, c in enumerate(piv):
        if v[c] != 0:
            v = base.reduce(v - v[c] * R[row])
    return v


# ---------------------------------------------------------------------------
# Cohomology of C^{n-1} --A--> C^n --B--> C^{n+1}
# ---------------------------------------------------------------------------


@dataclass
class CohomologyResult:
    """``ker B / im A`` as free rank plus torsion invariants.

    Over a field ``free_rank`` is the dimension and ``torsion`` is empty.
    """

    free_rank: int
    torsion: list[int] = field(default_factory=list)
    base: str = "Z"
    representatives: list = field(default_factory=list, repr=False)

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        return f"rank={self.free_rank} torsion=[{','.join(str(t) for t in self.torsion)}]"


def cohomology_of(base: BaseRing, A, B, dim: int, representatives: int = 0) -> CohomologyResult:
    """Cohomology at the middle term of ``A`` (into ``dim``-space) then ``B``.

    ``A`` has shape ``(dim, *)`` and ``B`` shape ``(*, dim)``; either may have a
    zero-length axis.
    """
    A = _obj(A).reshape(dim, -1) if _obj(A).size else _obj(np.zeros((dim, 0), dtype=np.int64))
    B = _obj(B).reshape(-1, dim) if _obj(B).size else _obj(np.zeros((0, dim), dtype=np.int64))
    rb = rank(base, B) if B.size else 0
    if base.kind == "Z":
        divisors = invariant_factors(A) if A.size else []
        ra = len(divisors)
        torsion = [d for d in divisors if d > 1]
    else:
        ra = rank(base, A) if A.size else 0
        torsion = []
    res = CohomologyResult(dim - rb - ra, torsion, str(base))
    if representatives and not res.is_zero:
        K = kernel(base, B) if B.shape[0] else base.identity(dim)
        for k in range(K.shape[1]):
            v = K[:, k]
            if A.shape[1] and in_span(base, A, v):
                continue
            res.representatives.append(reduce_mod_span(base, A, v) if A.shape[1] else v)
            if len(res.representatives) >= representatives:
                break
    return res
