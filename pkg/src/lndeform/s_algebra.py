"""S-algebras as finite action tables ``alpha -> s_alpha`` over a finite ring."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .base import BaseRing, Z
from .errors import BoundMismatch, DegreeOverflow, DocumentError, RankMismatch
from .exp_seq import ExpSeq, ZERO, enumerate_seqs, parse, splittings
from .ln_structure import StructureTable, TruncatedPolynomial
from .ring_core import FiniteRing, _plain

__all__ = [
    "ActionTable",
    "ActionReport",
    "validate_action",
    "trivial_instance",
    "canonical_instance",
    "load_action",
    "save_action",
]


class ActionTable:
    """``s_*`` restricted to sequences of degree ``<= bound``.

    ``action[k]`` is the matrix of ``s_alpha`` for ``alpha = seqs[k]``.
    """

    def __init__(self, ring: FiniteRing, bound: int, action):
        self.ring = ring
        self.bound = bound
        self.seqs = enumerate_seqs(bound)
        self.index = {a: k for k, a in enumerate(self.seqs)}
        action = ring.base.array(action)
        r = ring.rank
        if action.shape != (len(self.seqs), r, r):
            raise RankMismatch(f"action has shape {action.shape}, expected {(len(self.seqs), r, r)}")
        self.action = action

    def __getitem__(self, alpha: ExpSeq) -> np.ndarray:
        return self.action[self.index[alpha]]

    @property
    def base(self) -> BaseRing:
        return self.ring.base

    def restrict(self, bound: int) -> "ActionTable":
        if bound > self.bound:
            raise BoundMismatch(f"cannot restrict bound {self.bound} to {bound}")
        n = len(enumerate_seqs(bound))
        return ActionTable(self.ring, bound, self.action[:n])

    def __eq__(self, other):
        return (
            isinstance(other, ActionTable)
            and self.bound == other.bound
            and self.ring == other.ring
            and np.array_equal(self.action, other.action)
        )

    def __repr__(self):
        return f"ActionTable(rank={self.ring.rank}, bound={self.bound}, base={self.base})"


@dataclass
class ActionReport:
    ok: bool
    law: str = ""
    where: tuple = ()
    detail: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "action: pass"
        where = ", ".join(str(w) for w in self.where)
        return f"action: FAIL {self.law} at ({where}): {self.detail}"


def _basis_name(ring, i):
    return ring.basis[i]


def validate_action(T: ActionTable, S: StructureTable) -> ActionReport:
    """Exhaustively check the identity, product, Cartan and unit laws.

    Violations are reported in that order; within a law the first failure
    in canonical enumeration order is returned.
    """
    if S.bound < T.bound:
        raise BoundMismatch(f"structure table bound {S.bound} < action bound {T.bound}")
    A, base = T.ring, T.base
    r = A.rank
    if np.any(T[ZERO] != A.identity_map()):
        return ActionReport(False, "identity", (ZERO,), "s_[] is not the identity")
    for alpha in T.seqs:
        for beta in enumerate_seqs(T.bound - alpha.degree):
            lhs = base.matmul(T[alpha], T[beta])
            rhs = base.zeros((r, r))
            for gamma, n in S.constants(alpha, beta).items():
                rhs = rhs + n * T[gamma]
            rhs = base.reduce(rhs)
            if np.any(lhs != rhs):
                return ActionReport(False, "product", (alpha, beta), "s_a s_b != sum n_g s_g")
    mu = A.mult
    for alpha in T.seqs:
        lhs = base.einsum("kc,abc->abk", T[alpha], mu)
        rhs = base.zeros((r, r, r))
        for beta, gamma in splittings(alpha):
            rhs = rhs + base.einsum("ia,jb,ijk->abk", T[beta], T[gamma], mu)
        rhs = base.reduce(rhs)
        bad = np.argwhere(np.asarray(lhs != rhs, dtype=bool).any(axis=-1))
        if bad.size:
            a, b = (int(x) for x in bad[0])
            return ActionReport(
                False, "cartan", (alpha, A.basis[a], A.basis[b]), "s_a(xy) != sum s_b(x) s_g(y)"
            )
    for alpha in T.seqs[1:]:
        if np.any(base.matmul(T[alpha], A.unit) != 0):
            return ActionReport(False, "unit", (alpha,), "s_a(1) != 0")
    return ActionReport(True)


def trivial_instance(A: FiniteRing, bound: int) -> ActionTable:
    """Identity at the zero sequence, zero elsewhere."""
    n = len(enumerate_seqs(bound))
    action = A.base.zeros((n, A.rank, A.rank))
    action[0] = A.identity_map()
    return ActionTable(A, bound, action)


# ---------------------------------------------------------------------------
# Canonical instance: truncated Chern-class ring with the total operation
# s_t(x) = x + sum t_i x^(i+1) extended multiplicatively.
# ---------------------------------------------------------------------------


def _monomial_name(seq: ExpSeq) -> str:
    if seq.is_zero():
        return "1"
    return "*".join(f"c{i}" if a == 1 else f"c{i}^{a}" for i, a in seq.pairs)


def chern_ring(ring_bound: int, base: BaseRing = Z) -> FiniteRing:
    """``base[c1, c2, ...] / (weight > ring_bound)`` with ``c_i`` of weight ``i``.

    Basis monomials are indexed by exponent sequences, in canonical order.
    """
    basis = enumerate_seqs(ring_bound)
    index = {m: k for k, m in enumerate(basis)}
    r = len(basis)
    mult = np.zeros((r, r, r), dtype=np.int64)
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            if a.degree + b.degree <= ring_bound:
                mult[i, j, index[a + b]] = 1
    unit = [1] + [0] * (r - 1)
    return FiniteRing(base, [_monomial_name(m) for m in basis], mult, unit)


@lru_cache(maxsize=8)
def _total_operation(bound: int, ring_bound: int):
    """``s_t(c_k)`` for ``k = 1..ring_bound`` as polynomials in ``t_1..t_bound, e_1..e_R``."""
    N, R = bound, ring_bound
    weights = (0,) * N + tuple(range(1, R + 1))

    def t_weight(mono):
        return sum((i + 1) * e for i, e in enumerate(mono[:N]))

    def trunc(p):
        return TruncatedPolynomial(weights, R, {m: c for m, c in p.terms.items() if t_weight(m) <= N})

    one = TruncatedPolynomial.constant(weights, R)
    zero = TruncatedPolynomial(weights, R)

    def tvar(i):
        return TruncatedPolynomial.variable(weights, R, i - 1)

    def evar(i):
        return TruncatedPolynomial.variable(weights, R, N + i - 1)

    # power sums in elementary symmetric functions (Newton's identities)
    p = [zero]
    for n in range(1, R + 1):
        acc = evar(n).scale((-1) ** (n - 1) * n)
        for i in range(1, n):
            acc = acc + (evar(i) * p[n - i]).scale((-1) ** (i - 1))
        p.append(acc)
    # g(x) = 1 + sum t_j x^j ; gm[j] = coefficient of x^j in g^m
    g = [one] + [tvar(j) if j <= N else zero for j in range(1, R + 1)]
    log_terms = [zero] * (R + 1)
    gm = [one] + [zero] * R
    for m in range(1, R + 1):
        nxt = [zero] * (R + 1)
        for a in range(R + 1):
            if gm[a].is_zero():
                continue
            for b in range(R + 1 - a):
                if not g[b].is_zero():
                    nxt[a + b] = nxt[a + b] + trunc(gm[a] * g[b])
        gm = nxt
        acc = zero
        for j in range(0, R - m + 1):
            if not gm[j].is_zero():
                acc = acc + trunc(gm[j] * p[m + j])
        log_terms[m] = acc.scale(Fraction((-1) ** (m - 1), m))
    # E'(z) = exp(L(z)):  k E'_k = sum_{m=1}^k m L_m E'_{k-m}
    E = [one]
    for k in range(1, R + 1):
        acc = zero
        for m in range(1, k + 1):
            acc = acc + trunc((log_terms[m] * E[k - m]).scale(m))
        E.append(acc.scale(Fraction(1, k)))
    for k, poly in enumerate(E):
        for c in poly.terms.values():
            if Fraction(c).denominator != 1:
                raise ArithmeticError(f"non-integral coefficient in s_t(c_{k})")
    E = [TruncatedPolynomial(weights, R, {m: int(c) for m, c in P.terms.items()}) for P in E]
    return E, weights


def canonical_instance(bound: int, ring_bound: int | None = None, base: BaseRing = Z):
    """The truncated Chern-class ring with its Landweber-Novikov action.

    The ring is ``Z[c1, ..., cR] / (weight > R)`` (``R = ring_bound``, default
    ``bound``), the ring of symmetric power series truncated in degree.  The
    action is the multiplicative total operation determined by
    ``x -> x + sum t_i x^(i+1)`` on each Chern root.  Returns ``(ring, table)``.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    R = bound if ring_bound is None else ring_bound
    ring = chern_ring(R, base)
    basis = enumerate_seqs(R)
    index = {m: k for k, m in enumerate(basis)}
    N = bound
    E, weights = _total_operation(N, R)
    seqs = enumerate_seqs(N)
    seq_index = {a: k for k, a in enumerate(seqs)}
    r = len(basis)
    action = np.zeros((len(seqs), r, r), dtype=object)
    images = {ZERO: TruncatedPolynomial.constant(weights, R)}
    for col, lam in enumerate(basis):
        if lam not in images:
            # peel off one generator: lam = (lam - e_i) + e_i for its largest index
            i = lam.pairs[-1][0]
            rest = ExpSeq.from_pairs([(j, a - (1 if j == i else 0)) for j, a in lam.pairs])
            images[lam] = images[rest] * E[i]
        for mono, c in images[lam].terms.items():
            beta = ExpSeq(mono[:N])
            if beta.degree > N:
                continue
            target = ExpSeq(mono[N:])
            action[seq_index[beta], index[target], col] += c
    return ring, ActionTable(ring, N, action)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def save_action(T: ActionTable, ring_ref: str | None = None) -> dict:
    """Action document; the ring is inlined unless ``ring_ref`` (a path) is given."""
    entries = []
    for alpha in T.seqs:
        M = T[alpha]
        entries.append({
            "alpha": list(alpha.dense()),
            "matrix": [[_plain(x) for x in row] for row in M],
        })
    return {
        "ring": ring_ref if ring_ref is not None else T.ring.to_document(),
        "bound": T.bound,
        "action": entries,
    }


def load_action(doc: dict, ring: FiniteRing | None = None) -> ActionTable:
    """Parse an action document.  Validation is a separate step."""
    try:
        bound = int(doc["bound"])
        entries = doc["action"]
        if ring is None:
            ring_doc = doc["ring"]
            if not isinstance(ring_doc, dict):
                raise DocumentError("ring given by reference; resolve it before loading")
            ring = FiniteRing.from_document(ring_doc)
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed action document: {exc}") from exc
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    if bound < 0:
        raise DocumentError("bound must be non-negative")
    seqs = enumerate_seqs(bound)
    index = {a: k for k, a in enumerate(seqs)}
    r = ring.rank
    action = ring.base.zeros((len(seqs), r, r))
    seen = set()
    for e in entries:
        try:
            alpha = parse(e["alpha"])
            M = np.array(e["matrix"], dtype=object)
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed action entry: {exc}") from exc
        if alpha.degree > bound:
            raise DegreeOverflow(f"alpha {alpha} has degree {alpha.degree} > bound {bound}")
        if M.shape != (r, r):
            raise RankMismatch(f"matrix for {alpha} has shape {M.shape}, ring rank is {r}")
        if alpha in seen:
            raise DocumentError(f"duplicate entry for {alpha}")
        seen.add(alpha)
        action[index[alpha]] = ring.base.array(M)
    return ActionTable(ring, bound, action)
