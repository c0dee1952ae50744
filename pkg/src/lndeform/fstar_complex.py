"""The cochain complex F* of an S-algebra, truncated at a degree bound.

Layouts (``E`` = sequences of degree ``<= N`` in canonical order, ``r`` = rank):

* ``F^0``: an ``r x r`` derivation matrix.
* ``F^1``: array ``(|E|, r, r)``; entry ``k`` is the matrix of ``f_alpha``
  (columns are images, like action tables).
* ``F^n`` for ``n >= 2``: pair ``(f0, f1)`` with ``f0`` of shape ``(|E^n_N|, r, r)``
  indexed by tuples of total degree ``<= N`` and ``f1`` of shape
  ``(|E|,) + (r,)*n + (r,)`` holding one multilinear map per sequence.

Flattened coordinates put ``f0`` before ``f1``.  Every differential has a
batched form whose leading axis runs over cochains; matrices are obtained by
pushing a batched identity through it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product as iproduct
from string import ascii_lowercase

import numpy as np

from .errors import BoundMismatch
from .exp_seq import ExpSeq, enumerate_seqs, splittings
from .linalg import CohomologyResult, cohomology_of, kernel
from .ln_structure import StructureTable
from .ring_core import derivation_basis, is_derivation, mult_slots
from .s_algebra import ActionTable

__all__ = ["Cochain", "FStar", "tuples"]


def tuples(n: int, bound: int) -> tuple[tuple[ExpSeq, ...], ...]:
    """All ``n``-tuples of sequences with total degree ``<= bound``, canonically ordered."""
    seqs = enumerate_seqs(bound)
    out = [t for t in iproduct(seqs, repeat=n) if sum(a.degree for a in t) <= bound]
    out.sort(key=lambda t: (sum(a.degree for a in t), tuple(a.sort_key() for a in t)))
    return tuple(out)


@dataclass
class Cochain:
    """An element of ``F^n``; ``parts`` is one array for ``n <= 1`` and ``(f0, f1)`` above."""

    n: int
    parts: tuple

    @property
    def f0(self):
        return self.parts[0]

    @property
    def f1(self):
        return self.parts[-1]

    def is_zero(self) -> bool:
        return all(not np.any(p != 0) for p in self.parts)

    def __eq__(self, other):
        return (
            isinstance(other, Cochain)
            and self.n == other.n
            and all(np.array_equal(a, b) for a, b in zip(self.parts, other.parts))
        )


class FStar:
    """The truncated complex attached to an action table and structure constants."""

    BLOCK = 128

    def __init__(self, T: ActionTable, S: StructureTable, bound: int | None = None):
        bound = T.bound if bound is None else bound
        if bound > T.bound or bound > S.bound:
            raise BoundMismatch(f"bound {bound} exceeds action ({T.bound}) or structure ({S.bound}) bound")
        self.T = T if bound == T.bound else T.restrict(bound)
        self.S = S
        self.bound = bound
        self.ring = T.ring
        self.base = T.ring.base
        self.r = T.ring.rank
        self.seqs = enumerate_seqs(bound)
        self.seq_index = {a: k for k, a in enumerate(self.seqs)}
        self._tuples: dict[int, tuple] = {}
        self._tuple_index: dict[int, dict] = {}
        self._matrices: dict[int, np.ndarray] = {}
        self._dn0_plans: dict[int, tuple] = {}

    # -- indexing ------------------------------------------------------------

    def tuples(self, n: int):
        if n not in self._tuples:
            ts = tuples(n, self.bound)
            self._tuples[n] = ts
            self._tuple_index[n] = {t: k for k, t in enumerate(ts)}
        return self._tuples[n]

    def tuple_index(self, n: int) -> dict:
        self.tuples(n)
        return self._tuple_index[n]

    @cached_property
    def splits(self):
        """Arrays ``(alpha, beta, gamma)`` of indices over all ``beta + gamma = alpha``."""
        a, b, g = [], [], []
        for k, alpha in enumerate(self.seqs):
            for beta, gamma in splittings(alpha):
                a.append(k)
                b.append(self.seq_index[beta])
                g.append(self.seq_index[gamma])
        agg = np.zeros((len(self.seqs), len(a)), dtype=np.int64)
        agg[a, np.arange(len(a))] = 1
        return np.array(a), np.array(b), np.array(g), agg.astype(object)

    def shape(self, n: int) -> list[tuple]:
        r, nE = self.r, len(self.seqs)
        if n == 0:
            return [(r, r)]
        if n == 1:
            return [(nE, r, r)]
        return [(len(self.tuples(n)), r, r), (nE,) + (r,) * (n + 1)]

    def dim(self, n: int) -> int:
        return sum(int(np.prod(s)) for s in self.shape(n))

    def zero(self, n: int) -> Cochain:
        return Cochain(n, tuple(self.base.zeros(s) for s in self.shape(n)))

    def flatten(self, c: Cochain) -> np.ndarray:
        return np.concatenate([np.asarray(p, dtype=object).reshape(-1) for p in c.parts])

    def unflatten(self, n: int, v) -> Cochain:
        v = np.asarray(v, dtype=object).reshape(-1)
        parts, at = [], 0
        for s in self.shape(n):
            size = int(np.prod(s))
            parts.append(v[at:at + size].reshape(s))
            at += size
        if at != v.size:
            raise ValueError(f"vector of length {v.size} does not fit F^{n} (dimension {at})")
        return Cochain(n, tuple(parts))

    def random(self, n: int, rng: np.random.Generator, scale: int = 3) -> Cochain:
        """Random cochain; degree 0 draws an integer combination of a derivation basis."""
        if n == 0:
            phi = self.base.zeros((self.r, self.r))
            for D in self.derivations:
                phi = phi + int(rng.integers(-scale, scale + 1)) * D
            return Cochain(0, (self.base.reduce(phi),))
        return Cochain(n, tuple(self.base.random_array(rng, s, scale) for s in self.shape(n)))

    @cached_property
    def derivations(self) -> list[np.ndarray]:
        return derivation_basis(self.ring)

    # -- differentials -------------------------------------------------------

    def d(self, c: Cochain) -> Cochain:
        """Apply the differential to one cochain."""
        batched = [np.asarray(p, dtype=object)[None] for p in c.parts]
        out = self.d_batched(c.n, batched, check=True)
        return Cochain(c.n + 1, tuple(p[0] for p in out))

    def d0(self, phi) -> Cochain:
        return self.d(Cochain(0, (self.base.array(phi),)))

    def d_batched(self, n: int, parts, check: bool = False):
        """Differential on a batch: each part carries a leading batch axis."""
        if n == 0:
            (Phi,) = parts
            if check and not is_derivation(self.ring, Phi[0]):
                raise ValueError("d0 needs a derivation")
            return [self._d0_batched(Phi)]
        if n == 1:
            F = parts[0]
            return [self._dn0_batched(1, F), self._dn1_batched(1, np.swapaxes(F, -1, -2))]
        return [self._dn0_batched(n, parts[0]), self._dn1_batched(n, parts[1])]

    def _d0_batched(self, Phi):
        S, base = self.T.action, self.base
        left = base.einsum("eij,Bjk->Beik", S, Phi)
        right = base.einsum("Bij,ejk->Beik", Phi, S)
        return base.reduce(left - right)

    def _dn0_indices(self, n: int):
        plan = self._dn0_plans
        if n in plan:
            return plan[n]
        outs = self.tuples(n + 1)
        src = self.tuple_index(n)
        first = np.array([self.seq_index[x[0]] for x in outs], dtype=np.int64)
        head = np.array([src[x[1:]] for x in outs], dtype=np.int64)
        tail = np.array([src[x[:-1]] for x in outs], dtype=np.int64)
        last = np.array([self.seq_index[x[-1]] for x in outs], dtype=np.int64)
        inner = np.zeros((len(outs), len(src)), dtype=object)
        for o, x in enumerate(outs):
            for i in range(1, n + 1):
                sign = -1 if i % 2 else 1
                for beta, c in self.S.constants(x[i - 1], x[i]).items():
                    y = x[: i - 1] + (beta,) + x[i + 1:]
                    inner[o, src[y]] += sign * c
        plan[n] = (first, head, tail, last, inner)
        return plan[n]

    def _dn0_batched(self, n: int, F0):
        """``F0`` has shape ``(B, |E^n|, r, r)``."""
        first, head, tail, last, inner = self._dn0_indices(n)
        S, base = self.T.action, self.base
        out = base.einsum("oij,Bojk->Boik", S[first], F0[:, head])
        out = out + base.einsum("ot,Btij->Boij", inner, F0)
        end = base.einsum("Boij,ojk->Boik", F0[:, tail], S[last])
        out = out + end if (n + 1) % 2 == 0 else out - end
        return base.reduce(out)

    def _dn1_batched(self, n: int, F1):
        """``F1`` has shape ``(B, |E|) + (r,)*n + (r,)`` (multilinear layout)."""
        base, S, mu = self.base, self.T.action, self.ring.mult
        a_idx, b_idx, g_idx, agg = self.splits
        B, nE, r = F1.shape[0], F1.shape[1], self.r
        ins = ascii_lowercase[: n + 1]
        # sum_{beta+gamma=alpha} s_beta(a_1) f(gamma)(a_2, ...)
        lead = base.einsum(f"Ku{ins[0]},BK{ins[1:]}v,uvw->BK{ins}w", S[b_idx], F1[:, g_idx], mu)
        out = base.einsum(f"AK,BK{ins}w->BA{ins}w", agg, lead)
        flat = F1.reshape((B * nE,) + F1.shape[2:])
        for i in range(1, n + 1):
            term = mult_slots(self.ring, flat, i, n).reshape((B, nE) + (r,) * (n + 2))
            out = out + term if i % 2 == 0 else out - term
        trail = base.einsum(
            f"BK{ins[:-1]}u,Kv{ins[-1]},uvw->BK{ins}w", F1[:, b_idx], S[g_idx], mu
        )
        trail = base.einsum(f"AK,BK{ins}w->BA{ins}w", agg, trail)
        out = out + trail if (n + 1) % 2 == 0 else out - trail
        return base.reduce(out)

    def is_cocycle(self, c: Cochain) -> bool:
        return self.d(c).is_zero()

    # -- matrices and cohomology --------------------------------------------

    def d0_matrix(self) -> np.ndarray:
        """Columns are ``d0`` of the derivation basis, flattened into ``F^1``."""
        D = self.derivations
        if not D:
            return np.zeros((self.dim(1), 0), dtype=object)
        Phi = np.stack(D)
        img = self._d0_batched(Phi)
        return img.reshape(len(D), -1).T

    def matrix(self, n: int) -> np.ndarray:
        """Matrix of ``d^n`` on flattened coordinates (``n = 0`` uses the derivation basis)."""
        if n in self._matrices:
            return self._matrices[n]
        if n == 0:
            M = self.d0_matrix()
        else:
            src = self.dim(n)
            M = np.empty((self.dim(n + 1), src), dtype=object)
            # push the identity through in column blocks to bound intermediates
            for lo in range(0, src, self.BLOCK):
                hi = min(src, lo + self.BLOCK)
                eye = self.base.zeros((hi - lo, src))
                eye[np.arange(hi - lo), np.arange(lo, hi)] = self.base.coerce(1)
                parts, at = [], 0
                for s in self.shape(n):
                    size = int(np.prod(s))
                    parts.append(eye[:, at:at + size].reshape((hi - lo,) + s))
                    at += size
                out = self.d_batched(n, parts)
                M[:, lo:hi] = np.concatenate([p.reshape(hi - lo, -1) for p in out], axis=1).T
        self._matrices[n] = M
        return M

    def cocycle_basis(self, n: int = 1) -> np.ndarray:
        """Columns span ``ker d^n`` (a saturated lattice basis over Z)."""
        key = ("ker", n)
        if key not in self._matrices:
            self._matrices[key] = kernel(self.base, self.matrix(n))
        return self._matrices[key]

    def cohomology(self, n: int, representatives: int = 0) -> CohomologyResult:
        """``H^n`` of the truncated complex for ``n`` in ``{0, 1, 2}``."""
        if n == 0:
            M = self.matrix(0)
            k = M.shape[1]
            return cohomology_of(self.base, np.zeros((k, 0), dtype=object), M, k, representatives)
        if n not in (1, 2):
            raise ValueError("cohomology is provided for n in {0, 1, 2}")
        return cohomology_of(self.base, self.matrix(n - 1), self.matrix(n), self.dim(n), representatives)
