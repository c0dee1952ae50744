"""Hot elimination kernels with a numba path and a vectorised numpy path.

The backend is chosen by the ``LN_DEFORM_KERNELS`` environment variable
(``numba`` or ``numpy``); the default is ``numba`` when it imports.  Both
paths run the same pivoting rules, so they return identical matrices.

Integer kernels work on ``int64`` and keep every entry below ``2**31`` in
absolute value, which keeps every intermediate product below ``2**62``.  When
an entry would leave that range the kernel gives up and the caller reruns the
numpy path on Python integers (``dtype=object``), which never overflows.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "LIMIT",
    "KernelOverflow",
    "set_backend",
    "smith_int64",
    "smith_object",
    "rref_mod_p",
    "apply_thread_cap",
]

LIMIT = 1 << 31

try:  # pragma: no cover - exercised implicitly
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False


def _default_backend() -> str:
    requested = os.environ.get("LN_DEFORM_KERNELS", "").strip().lower()
    if requested in ("numba", "numpy"):
        if requested == "numba" and not _HAVE_NUMBA:
            return "numpy"
        return requested
    return "numba" if _HAVE_NUMBA else "numpy"


BACKEND = _default_backend()


def set_backend(name: str) -> str:
    """Switch kernel backend at runtime; returns the previous one."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    prev, BACKEND = BACKEND, name
    return prev


class KernelOverflow(ArithmeticError):
    """An int64 kernel left the safe range; rerun on Python integers."""


def _njit(fn):
    if _HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@_njit
def _smith_loop(A, U, V, limit):
    # returns 0 on success, 1 on overflow; A, U, V are modified in place
    m, n = A.shape
    t = 0
    while t < min(m, n):
        bi = -1
        bj = -1
        best = 0
        for i in range(t, m):
            for j in range(t, n):
                a = abs(A[i, j])
                if a != 0 and (best == 0 or a < best):
                    best = a
                    bi = i
                    bj = j
        if bi < 0:
            break
        if bi != t:
            for j in range(n):
                A[t, j], A[bi, j] = A[bi, j], A[t, j]
            for j in range(m):
                U[t, j], U[bi, j] = U[bi, j], U[t, j]
        if bj != t:
            for i in range(m):
                A[i, t], A[i, bj] = A[i, bj], A[i, t]
            for i in range(n):
                V[i, t], V[i, bj] = V[i, bj], V[i, t]
        while True:
            if A[t, t] < 0:
                for j in range(n):
                    A[t, j] = -A[t, j]
                for j in range(m):
                    U[t, j] = -U[t, j]
            p = A[t, t]
            for i in range(t + 1, m):
                if A[i, t] != 0:
                    q = (2 * A[i, t] + p) // (2 * p)
                    if q != 0:
                        for j in range(n):
                            A[i, j] -= q * A[t, j]
                            if abs(A[i, j]) >= limit:
                                return 1
                        for j in range(m):
                            U[i, j] -= q * U[t, j]
                            if abs(U[i, j]) >= limit:
                                return 1
            for j in range(t + 1, n):
                if A[t, j] != 0:
                    q = (2 * A[t, j] + p) // (2 * p)
                    if q != 0:
                        for i in range(m):
                            A[i, j] -= q * A[i, t]
                            if abs(A[i, j]) >= limit:
                                return 1
                        for i in range(n):
                            V[i, j] -= q * V[i, t]
                            if abs(V[i, j]) >= limit:
                                return 1
            # smallest leftover in pivot column, then pivot row
            best = 0
            bi = -1
            bj = -1
            for i in range(t + 1, m):
                a = abs(A[i, t])
                if a != 0 and (best == 0 or a < best):
                    best = a
                    bi = i
                    bj = -1
            for j in range(t + 1, n):
                a = abs(A[t, j])
                if a != 0 and (best == 0 or a < best):
                    best = a
                    bi = -1
                    bj = j
            if bi >= 0:
                for j in range(n):
                    A[t, j], A[bi, j] = A[bi, j], A[t, j]
                for j in range(m):
                    U[t, j], U[bi, j] = U[bi, j], U[t, j]
                continue
            if bj >= 0:
                for i in range(m):
                    A[i, t], A[i, bj] = A[i, bj], A[i, t]
                for i in range(n):
                    V[i, t], V[i, bj] = V[i, bj], V[i, t]
                continue
            fi = -1
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i, j] % p != 0:
                        fi = i
                        break
                if fi >= 0:
                    break
            if fi >= 0:
                for j in range(n):
                    A[t, j] += A[fi, j]
                    if abs(A[t, j]) >= limit:
                        return 1
                for j in range(m):
                    U[t, j] += U[fi, j]
                    if abs(U[t, j]) >= limit:
                        return 1
                continue
            break
        if A[t, t] < 0:
            for j in range(n):
                A[t, j] = -A[t, j]
            for j in range(m):
                U[t, j] = -U[t, j]
        t += 1
    return 0


def _argmin_nonzero_abs(vals):
    nz = np.flatnonzero(vals != 0)
    if nz.size == 0:
        return -1
    return int(nz[int(np.argmin(np.abs(vals[nz])))])


def _check(arr, guarded):
    if guarded and arr.size and np.abs(arr).max() >= LIMIT:
        raise KernelOverflow


def _smith_vectorised(A, U, V, guarded):
    m, n = A.shape
    t = 0
    while t < min(m, n):
        sub = A[t:, t:]
        k = _argmin_nonzero_abs(sub.ravel())
        if k < 0:
            break
        bi, bj = t + k // (n - t), t + k % (n - t)
        if bi != t:
            A[[t, bi]] = A[[bi, t]]
            U[[t, bi]] = U[[bi, t]]
        if bj != t:
            A[:, [t, bj]] = A[:, [bj, t]]
            V[:, [t, bj]] = V[:, [bj, t]]
        while True:
            if A[t, t] < 0:
                A[t] = -A[t]
                U[t] = -U[t]
            p = A[t, t]
            rows = t + 1 + np.flatnonzero(A[t + 1:, t] != 0)
            if rows.size:
                q = (2 * A[rows, t] + p) // (2 * p)
                keep = q != 0
                rows, q = rows[keep], q[keep]
                if rows.size:
                    A[rows] -= np.outer(q, A[t])
                    U[rows] -= np.outer(q, U[t])
                    _check(A[rows], guarded)
                    _check(U[rows], guarded)
            cols = t + 1 + np.flatnonzero(A[t, t + 1:] != 0)
            if cols.size:
                q = (2 * A[t, cols] + p) // (2 * p)
                keep = q != 0
                cols, q = cols[keep], q[keep]
                if cols.size:
                    A[:, cols] -= np.outer(A[:, t], q)
                    V[:, cols] -= np.outer(V[:, t], q)
                    _check(A[:, cols], guarded)
                    _check(V[:, cols], guarded)
            leftover = np.concatenate([A[t + 1:, t], A[t, t + 1:]])
            k = _argmin_nonzero_abs(leftover)
            if k >= 0:
                if k < m - t - 1:
                    bi = t + 1 + k
                    A[[t, bi]] = A[[bi, t]]
                    U[[t, bi]] = U[[bi, t]]
                else:
                    bj = t + 1 + (k - (m - t - 1))
                    A[:, [t, bj]] = A[:, [bj, t]]
                    V[:, [t, bj]] = V[:, [bj, t]]
                continue
            rest = A[t + 1:, t + 1:]
            bad = np.flatnonzero((rest % p).ravel() != 0) if rest.size else np.array([], dtype=int)
            if bad.size:
                fi = t + 1 + int(bad[0]) // (n - t - 1)
                A[t] += A[fi]
                U[t] += U[fi]
                _check(A[t], guarded)
                _check(U[t], guarded)
                continue
            break
        if A[t, t] < 0:
            A[t] = -A[t]
            U[t] = -U[t]
        t += 1


def smith_int64(M: np.ndarray):
    """Smith form of an int64 matrix; raises :class:`KernelOverflow` if unsafe."""
    A = np.array(M, dtype=np.int64, copy=True)
    if A.size and np.abs(A).max() >= LIMIT:
        raise KernelOverflow
    m, n = A.shape
    U = np.eye(m, dtype=np.int64)
    V = np.eye(n, dtype=np.int64)
    if BACKEND == "numba":
        if _smith_loop(A, U, V, LIMIT):
            raise KernelOverflow
    else:
        _smith_vectorised(A, U, V, guarded=True)
    return U, A, V


def smith_object(M: np.ndarray):
    """Smith form on Python integers (no overflow possible)."""
    A = np.array(M, dtype=object, copy=True)
    m, n = A.shape
    U = np.eye(m, dtype=np.int64).astype(object)
    V = np.eye(n, dtype=np.int64).astype(object)
    _smith_vectorised(A, U, V, guarded=False)
    return U, A, V


# ---------------------------------------------------------------------------
# Row reduction over Z/p
# ---------------------------------------------------------------------------


@_njit
def _rref_mod_p_loop(A, p, npiv):
    m, n = A.shape
    pivots = np.empty(min(m, npiv), dtype=np.int64)
    r = 0
    for c in range(npiv):
        if r >= m:
            break
        piv = -1
        for i in range(r, m):
            if A[i, c] % p != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(n):
                A[r, j], A[piv, j] = A[piv, j], A[r, j]
        # modular inverse via Fermat
        a = A[r, c] % p
        inv = 1
        e = p - 2
        b = a
        while e > 0:
            if e & 1:
                inv = (inv * b) % p
            b = (b * b) % p
            e >>= 1
        for j in range(n):
            A[r, j] = (A[r, j] * inv) % p
        for i in range(m):
            if i != r:
                f = A[i, c] % p
                if f != 0:
                    for j in range(n):
                        A[i, j] = (A[i, j] - f * A[r, j]) % p
        pivots[r] = c
        r += 1
    return pivots[:r]


def _rref_mod_p_vectorised(A, p, npiv):
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(npiv):
        if r >= m:
            break
        nz = np.flatnonzero(A[r:, c] % p)
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]) % p, -1, p)
        A[r] = (A[r] * inv) % p
        f = A[:, c].copy()
        f[r] = 0
        rows = np.flatnonzero(f)
        if rows.size:
            A[rows] = (A[rows] - np.outer(f[rows], A[r])) % p
        pivots.append(c)
        r += 1
    return np.array(pivots, dtype=np.int64)


def rref_mod_p(M: np.ndarray, p: int, npiv: int | None = None):
    """Reduced row echelon form mod ``p``; pivots are sought in the first ``npiv`` columns."""
    if p >= LIMIT:
        raise KernelOverflow
    A = np.array(M, dtype=object) % p
    A = A.astype(np.int64)
    npiv = A.shape[1] if npiv is None else npiv
    if BACKEND == "numba":
        piv = _rref_mod_p_loop(A, np.int64(p), np.int64(npiv))
    else:
        piv = _rref_mod_p_vectorised(A, p, npiv)
    return A, [int(c) for c in piv]


def apply_thread_cap() -> int | None:
    """Honour ``LN_DEFORM_THREADS`` by capping numba's thread pool; returns the cap."""
    raw = os.environ.get("LN_DEFORM_THREADS", "").strip()
    if not raw:
        return None
    n = max(1, int(raw))
    if _HAVE_NUMBA:
        n = min(n, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(n)
    return n
