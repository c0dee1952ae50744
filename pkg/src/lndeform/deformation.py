"""Formal deformations and automorphisms truncated at a finite order.

A deformation of order ``m`` is ``s_* + t s^1 + ... + t^m s^m`` with every
``s^i`` a 1-cochain (array ``(|E|, r, r)``); an automorphism of order ``m`` is
``1 + t phi_1 + ... + t^m phi_m`` with every ``phi_i`` an ``r x r`` matrix.
Extension problems are exact linear systems; over Z they are decided
integrally and a failed solve carries a certificate that the obstruction
class is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundMismatch, DegreeOverflow, DocumentError, InternalInconsistency, RankMismatch
from .exp_seq import parse
from .fstar_complex import Cochain, FStar
from .linalg import Certificate, CohomologyResult, Unsolvable, in_span, reduce_mod_span, solve
from .ln_structure import StructureTable
from .ring_core import (
    FiniteRing,
    _plain,
    derivation_basis,
    hochschild_cohomology,
    hochschild_differential,
    hochschild_matrix,
    is_derivation,
)
from .s_algebra import ActionTable, load_action, save_action

__all__ = [
    "Deformation",
    "Automorphism",
    "Report",
    "ObstructionClass",
    "Extension",
    "complex_for",
    "validate_deformation",
    "validate_automorphism",
    "first_nonzero_is_derivation",
    "invert_automorphism",
    "compose_automorphisms",
    "conjugate",
    "infinitesimal_class",
    "same_class",
    "deformation_obstruction",
    "extend_deformation",
    "obstruction_sequence",
    "automorphism_obstruction",
    "extend_automorphism",
    "gauge_step",
    "gauge_to_trivial",
    "rigidity_certificate",
    "equivalent_extensions",
    "random_cocycle",
    "random_derivation",
    "random_deformation",
    "random_automorphism",
]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass
class Deformation:
    action: ActionTable
    coeffs: list = field(default_factory=list)

    def __post_init__(self):
        shape = self.action.action.shape
        self.coeffs = [self.action.base.array(c) for c in self.coeffs]
        for i, c in enumerate(self.coeffs, 1):
            if c.shape != shape:
                raise BoundMismatch(f"s^{i} has shape {c.shape}, expected {shape}")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def ring(self) -> FiniteRing:
        return self.action.ring

    def coefficient(self, n: int) -> np.ndarray:
        return self.action.action if n == 0 else self.coeffs[n - 1]

    def truncate(self, m: int) -> "Deformation":
        return Deformation(self.action, self.coeffs[:m])

    def first_nonzero(self) -> int | None:
        for i, c in enumerate(self.coeffs, 1):
            if np.any(c != 0):
                return i
        return None

    def __eq__(self, other):
        return (
            isinstance(other, Deformation)
            and self.action == other.action
            and self.order == other.order
            and all(np.array_equal(a, b) for a, b in zip(self.coeffs, other.coeffs))
        )


@dataclass
class Automorphism:
    ring: FiniteRing
    coeffs: list = field(default_factory=list)

    def __post_init__(self):
        r = self.ring.rank
        self.coeffs = [self.ring.base.array(c) for c in self.coeffs]
        for i, c in enumerate(self.coeffs, 1):
            if c.shape != (r, r):
                raise BoundMismatch(f"phi_{i} has shape {c.shape}, expected {(r, r)}")

    @classmethod
    def identity(cls, ring: FiniteRing, order: int = 0) -> "Automorphism":
        return cls(ring, [ring.base.zeros((ring.rank, ring.rank)) for _ in range(order)])

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def coefficient(self, n: int) -> np.ndarray:
        if n == 0:
            return self.ring.identity_map()
        if n <= self.order:
            return self.coeffs[n - 1]
        raise IndexError(f"coefficient {n} is beyond order {self.order}")

    def truncate(self, m: int) -> "Automorphism":
        return Automorphism(self.ring, self.coeffs[:m])

    def first_nonzero(self) -> int | None:
        for i, c in enumerate(self.coeffs, 1):
            if np.any(c != 0):
                return i
        return None

    def __eq__(self, other):
        return (
            isinstance(other, Automorphism)
            and self.ring == other.ring
            and self.order == other.order
            and all(np.array_equal(a, b) for a, b in zip(self.coeffs, other.coeffs))
        )


@dataclass
class Report:
    ok: bool
    law: str = ""
    where: tuple = ()
    detail: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "pass"
        return f"FAIL {self.law} at ({', '.join(str(w) for w in self.where)}): {self.detail}"


@dataclass
class ObstructionClass:
    """An obstruction cochain, certified to be a cocycle when built.

    ``kind`` is ``"fstar"`` (a :class:`Cochain` of degree 2) or
    ``"hochschild"`` (a multilinear map ``(r, r, r)``).
    """

    kind: str
    order: int
    cochain: object

    def is_zero(self) -> bool:
        if isinstance(self.cochain, Cochain):
            return self.cochain.is_zero()
        return not np.any(self.cochain != 0)


@dataclass
class Extension:
    """Outcome of an extension attempt.

    On success ``result`` is the extended object; otherwise ``certificate``
    shows the obstruction is not a coboundary.
    """

    ok: bool
    obstruction: ObstructionClass
    result: object = None
    certificate: Certificate | None = None

    def __bool__(self):
        return self.ok


_COMPLEXES: dict = {}


def complex_for(T: ActionTable, S: StructureTable) -> FStar:
    """Shared :class:`FStar` instance (so differential matrices are built once)."""
    key = (id(T), id(S))
    hit = _COMPLEXES.get(key)
    if hit is not None and hit[0] is T and hit[1] is S:
        return hit[2]
    if len(_COMPLEXES) > 16:
        _COMPLEXES.clear()
    C = FStar(T, S)
    _COMPLEXES[key] = (T, S, C)
    return C


_HOCHSCHILD: dict = {}


def _hochschild_b1(A: FiniteRing) -> np.ndarray:
    hit = _HOCHSCHILD.get(id(A))
    if hit is not None and hit[0] is A:
        return hit[1]
    if len(_HOCHSCHILD) > 16:
        _HOCHSCHILD.clear()
    M = hochschild_matrix(A, 2)
    _HOCHSCHILD[id(A)] = (A, M)
    return M


# ---------------------------------------------------------------------------
# Truncated laws
# ---------------------------------------------------------------------------


def _pair_plan(C: FStar):
    pairs = C.tuples(2)
    first = np.array([C.seq_index[p[0]] for p in pairs], dtype=np.int64)
    second = np.array([C.seq_index[p[1]] for p in pairs], dtype=np.int64)
    P = np.zeros((len(pairs), len(C.seqs)), dtype=object)
    for k, (a, b) in enumerate(pairs):
        for g, n in C.S.constants(a, b).items():
            P[k, C.seq_index[g]] = n
    return pairs, first, second, P


def _split_product(C: FStar, X, Y):
    """``sum_{beta+gamma=alpha} X_beta(a) Y_gamma(b)`` as an array ``(|E|, r, r, r)``."""
    _, b_idx, g_idx, agg = C.splits
    base = C.base
    t = base.einsum("Kia,Kjb,ijk->Kabk", X[b_idx], Y[g_idx], C.ring.mult)
    return base.einsum("AK,Kabk->Aabk", agg, t)


def validate_deformation(D: Deformation, S: StructureTable) -> Report:
    """Check the product and Cartan laws for every order ``n <= m``.

    Violations are located as ``(n, alpha, beta)`` or ``(n, alpha, a, b)``.
    """
    C = complex_for(D.action, S)
    base, mu = C.base, C.ring.mult
    pairs, first, second, P = _pair_plan(C)
    for n in range(D.order + 1):
        sn = D.coefficient(n)
        lhs = base.zeros((len(pairs), C.r, C.r))
        for i in range(n + 1):
            lhs = lhs + base.einsum("pij,pjk->pik", D.coefficient(i)[first], D.coefficient(n - i)[second])
        rhs = base.einsum("pe,eij->pij", P, sn)
        bad = np.flatnonzero(np.asarray(base.reduce(lhs - rhs) != 0, dtype=bool).reshape(len(pairs), -1).any(axis=1))
        if bad.size:
            a, b = pairs[int(bad[0])]
            return Report(False, "product", (n, a, b), "sum_i s^i_a s^(n-i)_b != sum n_g s^n_g")
        lhs = base.einsum("Ekc,abc->Eabk", sn, mu)
        rhs = base.zeros(lhs.shape)
        for i in range(n + 1):
            rhs = rhs + _split_product(C, D.coefficient(i), D.coefficient(n - i))
        bad = np.argwhere(np.asarray(base.reduce(lhs - rhs) != 0, dtype=bool).any(axis=-1))
        if bad.size:
            e, a, b = (int(x) for x in bad[0])
            where = (n, C.seqs[e], C.ring.basis[a], C.ring.basis[b])
            return Report(False, "cartan", where, "s^n_a(xy) != sum s^i_b(x) s^(n-i)_g(y)")
    return Report(True)


def validate_automorphism(Phi: Automorphism) -> Report:
    """Check ``phi_n(ab) = sum_i phi_i(a) phi_(n-i)(b)`` on basis pairs for ``n <= m``."""
    A = Phi.ring
    base, mu = A.base, A.mult
    for n in range(1, Phi.order + 1):
        lhs = base.einsum("kc,abc->abk", Phi.coefficient(n), mu)
        rhs = base.zeros(lhs.shape)
        for i in range(n + 1):
            rhs = rhs + base.einsum("ia,jb,ijk->abk", Phi.coefficient(i), Phi.coefficient(n - i), mu)
        bad = np.argwhere(np.asarray(base.reduce(lhs - rhs) != 0, dtype=bool).any(axis=-1))
        if bad.size:
            a, b = (int(x) for x in bad[0])
            return Report(False, "multiplicativity", (n, A.basis[a], A.basis[b]), "phi_n(xy) != sum phi_i(x) phi_(n-i)(y)")
    return Report(True)


def first_nonzero_is_derivation(Phi: Automorphism) -> bool:
    k = Phi.first_nonzero()
    return k is None or is_derivation(Phi.ring, Phi.coefficient(k))


# ---------------------------------------------------------------------------
# Automorphism algebra and conjugation
# ---------------------------------------------------------------------------


def compose_automorphisms(Phi: Automorphism, Psi: Automorphism) -> Automorphism:
    """``Phi Psi`` (apply ``Psi`` first), truncated at the smaller order."""
    if Phi.ring != Psi.ring:
        raise BoundMismatch("automorphisms live on different rings")
    m = min(Phi.order, Psi.order)
    base = Phi.ring.base
    coeffs = []
    for n in range(1, m + 1):
        acc = base.zeros((Phi.ring.rank,) * 2)
        for i in range(n + 1):
            acc = acc + base.matmul(Phi.coefficient(i), Psi.coefficient(n - i))
        coeffs.append(base.reduce(acc))
    return Automorphism(Phi.ring, coeffs)


def invert_automorphism(Phi: Automorphism) -> Automorphism:
    """Formal inverse: ``psi_n = -sum_{k=1}^{n} phi_k psi_(n-k)``."""
    base = Phi.ring.base
    psi = [Phi.ring.identity_map()]
    for n in range(1, Phi.order + 1):
        acc = base.zeros((Phi.ring.rank,) * 2)
        for k in range(1, n + 1):
            acc = acc - base.matmul(Phi.coefficient(k), psi[n - k])
        psi.append(base.reduce(acc))
    return Automorphism(Phi.ring, psi[1:])


def conjugate(D: Deformation, Phi: Automorphism) -> Deformation:
    """``Phi^-1 sigma Phi`` truncated at the order of ``D``."""
    if Phi.ring != D.ring:
        raise BoundMismatch("automorphism and deformation live on different rings")
    if Phi.order < D.order:
        raise BoundMismatch(f"automorphism order {Phi.order} < deformation order {D.order}")
    m = D.order
    Phi = Phi.truncate(m)
    Psi = invert_automorphism(Phi)
    base = D.action.base
    coeffs = []
    for n in range(1, m + 1):
        acc = base.zeros(D.action.action.shape)
        for i in range(n + 1):
            for j in range(n + 1 - i):
                k = n - i - j
                acc = acc + base.einsum(
                    "ij,ejk,kl->eil", Psi.coefficient(i), D.coefficient(j), Phi.coefficient(k)
                )
        coeffs.append(base.reduce(acc))
    return Deformation(D.action, coeffs)


# ---------------------------------------------------------------------------
# Infinitesimals
# ---------------------------------------------------------------------------


@dataclass
class InfinitesimalClass:
    """Class of the coefficient ``s^order`` modulo the image of ``d0``."""

    order: int | None
    cocycle: np.ndarray
    representative: np.ndarray

    @property
    def is_zero(self) -> bool:
        return not np.any(self.representative != 0)


def infinitesimal_class(D: Deformation, S: StructureTable, order: int | None = None) -> InfinitesimalClass:
    """Reduce ``s^order`` (default: the first nonzero coefficient) modulo coboundaries.

    The coefficient is first certified to be a 1-cocycle.
    """
    if not validate_deformation(D, S):
        raise ValueError("invalid deformation")
    C = complex_for(D.action, S)
    k = D.first_nonzero() if order is None else order
    if k is None:
        z = C.base.zeros(C.dim(1))
        return InfinitesimalClass(None, z, z)
    if order is not None and any(np.any(D.coefficient(i) != 0) for i in range(1, order)):
        raise ValueError(f"s^{order} is not the first nonzero coefficient")
    c = Cochain(1, (D.coefficient(k),))
    if not C.is_cocycle(c):
        raise InternalInconsistency(f"leading coefficient s^{k} of a valid deformation is not a 1-cocycle")
    v = C.flatten(c)
    return InfinitesimalClass(k, v, reduce_mod_span(C.base, C.matrix(0), v))


def same_class(C: FStar, x, y) -> bool:
    """Whether two 1-cocycles differ by an element of ``im d0`` (decided integrally over Z)."""
    diff = C.base.reduce(np.asarray(x, dtype=object).reshape(-1) - np.asarray(y, dtype=object).reshape(-1))
    return in_span(C.base, C.matrix(0), diff)


# ---------------------------------------------------------------------------
# Obstructions and extensions
# ---------------------------------------------------------------------------


def deformation_obstruction(D: Deformation, S: StructureTable) -> ObstructionClass:
    """The 2-cochain obstructing extension of ``D`` to order ``m + 1``."""
    C = complex_for(D.action, S)
    base, m = C.base, D.order
    _, first, second, _ = _pair_plan(C)
    ob0 = base.zeros((len(first), C.r, C.r))
    ob1 = base.zeros((len(C.seqs),) + (C.r,) * 3)
    for i in range(1, m + 1):
        X, Y = D.coefficient(i), D.coefficient(m + 1 - i)
        ob0 = ob0 - base.einsum("pij,pjk->pik", X[first], Y[second])
        ob1 = ob1 - _split_product(C, X, Y)
    ob = Cochain(2, (base.reduce(ob0), base.reduce(ob1)))
    if not C.is_cocycle(ob):
        raise InternalInconsistency("deformation obstruction is not a 2-cocycle")
    return ObstructionClass("fstar", m, ob)


def extend_deformation(D: Deformation, S: StructureTable, shift=None) -> Extension:
    """Solve ``d1 s^(m+1) = Ob(D)``.

    The canonical solution is used; ``shift`` (a 1-cocycle) is added to it
    when given, to explore other choices.
    """
    C = complex_for(D.action, S)
    ob = deformation_obstruction(D, S)
    try:
        x = solve(C.base, C.matrix(1), C.flatten(ob.cochain))
    except Unsolvable as exc:
        return Extension(False, ob, certificate=exc.certificate)
    top = C.unflatten(1, x).parts[0]
    if shift is not None:
        top = C.base.reduce(top + C.base.array(shift))
    E = Deformation(D.action, D.coeffs + [top])
    if not validate_deformation(E, S):
        raise InternalInconsistency("solution of d1 x = Ob does not extend the deformation")
    return Extension(True, ob, result=E)


@dataclass
class SequenceStep:
    order: int
    vanishes: bool
    obstruction: ObstructionClass
    certificate: Certificate | None = None


def obstruction_sequence(T: ActionTable, s1, S: StructureTable, max_order: int) -> list[SequenceStep]:
    """Extend ``s_* + t s1`` order by order towards ``max_order``.

    Step ``n`` records whether the obstruction to passing from order ``n`` to
    ``n + 1`` vanishes; the run stops at the first one that does not.
    """
    C = complex_for(T, S)
    s1 = C.base.array(s1)
    if not C.is_cocycle(Cochain(1, (s1,))):
        raise ValueError("s1 is not a 1-cocycle")
    D = Deformation(T, [s1])
    steps = []
    for n in range(1, max_order):
        ext = extend_deformation(D, S)
        steps.append(SequenceStep(n, ext.ok, ext.obstruction, ext.certificate))
        if not ext.ok:
            break
        D = ext.result
    return steps


def automorphism_obstruction(Phi: Automorphism) -> ObstructionClass:
    """``Ob(a (x) b) = -sum_{i=1}^{m} phi_i(a) phi_(m+1-i)(b)`` as a Hochschild 2-cochain."""
    A = Phi.ring
    base, m = A.base, Phi.order
    ob = base.zeros((A.rank,) * 3)
    for i in range(1, m + 1):
        ob = ob - base.einsum("ia,jb,ijk->abk", Phi.coefficient(i), Phi.coefficient(m + 1 - i), A.mult)
    ob = base.reduce(ob)
    if np.any(hochschild_differential(A, ob, 3) != 0):
        raise InternalInconsistency("automorphism obstruction is not a Hochschild 2-cocycle")
    return ObstructionClass("hochschild", m, ob)


def extend_automorphism(Phi: Automorphism, shift=None) -> Extension:
    """Solve ``b1 phi_(m+1) = Ob(Phi)``; ``shift`` (a derivation) is added when given."""
    A = Phi.ring
    ob = automorphism_obstruction(Phi)
    try:
        x = solve(A.base, _hochschild_b1(A), ob.cochain.reshape(-1))
    except Unsolvable as exc:
        return Extension(False, ob, certificate=exc.certificate)
    phi = A.base.array(x).reshape(A.rank, A.rank).T.copy()
    if shift is not None:
        phi = A.base.reduce(phi + A.base.array(shift))
    E = Automorphism(A, Phi.coeffs + [phi])
    if not validate_automorphism(E):
        raise InternalInconsistency("solution of b1 x = Ob does not extend the automorphism")
    return Extension(True, ob, result=E)


# ---------------------------------------------------------------------------
# Gauge steps and rigidity
# ---------------------------------------------------------------------------


@dataclass
class GaugeResult:
    ok: bool
    order: int | None
    automorphism: Automorphism | None = None
    result: Deformation | None = None
    stage: str = ""
    certificate: Certificate | None = None


def _derivation_from(C: FStar, coords) -> np.ndarray:
    phi = C.base.zeros((C.r, C.r))
    for c, Dk in zip(coords, C.derivations):
        phi = phi + c * Dk
    return C.base.reduce(phi)


def gauge_step(D: Deformation, S: StructureTable) -> GaugeResult:
    """Kill the first nonzero coefficient ``s^k`` by conjugation.

    Solves ``d0 phi = s^k``, extends ``1 - t^k phi`` to an automorphism of the
    order of ``D`` and conjugates.  Failure reports the stage.
    """
    C = complex_for(D.action, S)
    k = D.first_nonzero()
    m = D.order
    if k is None:
        return GaugeResult(True, None, Automorphism.identity(D.ring, m), D)
    try:
        x = solve(C.base, C.matrix(0), C.flatten(Cochain(1, (D.coefficient(k),))))
    except Unsolvable as exc:
        return GaugeResult(False, k, stage="coboundary", certificate=exc.certificate)
    phi = _derivation_from(C, x)
    zero = C.base.zeros((C.r, C.r))
    Phi = Automorphism(D.ring, [zero] * (k - 1) + [C.base.reduce(-phi)])
    while Phi.order < m:
        ext = extend_automorphism(Phi)
        if not ext.ok:
            return GaugeResult(False, k, Phi, stage=f"automorphism-extension:{Phi.order + 1}", certificate=ext.certificate)
        Phi = ext.result
    E = conjugate(D, Phi)
    if any(np.any(E.coefficient(i) != 0) for i in range(1, k + 1)):
        raise InternalInconsistency("gauge step left a nonzero coefficient at or below its order")
    return GaugeResult(True, k, Phi, E)


def gauge_to_trivial(D: Deformation, S: StructureTable) -> tuple[bool, list[GaugeResult]]:
    """Iterate :func:`gauge_step` until ``D`` is trivial or a step fails."""
    steps = []
    while D.first_nonzero() is not None:
        g = gauge_step(D, S)
        steps.append(g)
        if not g.ok:
            return False, steps
        D = g.result
    return True, steps


@dataclass
class RigidityReport:
    rigid: bool
    bound: int
    max_order: int
    seed: int
    h1: CohomologyResult
    hh2: CohomologyResult
    h1_representative: np.ndarray | None = None
    h1_certificate: Certificate | None = None
    hh2_representative: np.ndarray | None = None
    demonstration: list = field(default_factory=list)
    deformation: Deformation | None = None

    def lines(self) -> list[str]:
        out = [f"H^1 {self.h1}", f"HH^2 {self.hh2}"]
        if self.rigid:
            out.append(f"RIGID-at-(N={self.bound},M={self.max_order})")
            orders = [g.order for g in self.demonstration]
            out.append(f"gauged seed={self.seed} deformation to trivial via steps at orders {orders}")
        else:
            which = [name for name, h in (("H^1", self.h1), ("HH^2", self.hh2)) if not h.is_zero]
            out.append(f"NOT-CERTIFIED nonzero: {', '.join(which)}")
        return out


def rigidity_certificate(
    T: ActionTable, S: StructureTable, max_order: int, seed: int = 0, bound: int | None = None
) -> RigidityReport:
    """Compute ``H^1`` of the truncated complex and ``HH^2``; gauge a random deformation when both vanish."""
    if bound is not None and bound != T.bound:
        T = T.restrict(bound)
    C = complex_for(T, S)
    h1 = C.cohomology(1, representatives=1)
    hh2 = hochschild_cohomology(T.ring, 2, representatives=1)
    rep = rep_cert = None
    if not h1.is_zero:
        rep = h1.representatives[0]
        if not C.is_cocycle(C.unflatten(1, rep)):
            raise InternalInconsistency("H^1 representative is not a cocycle")
        try:
            solve(C.base, C.matrix(0), rep)
            raise InternalInconsistency("H^1 representative is a coboundary")
        except Unsolvable as exc:
            rep_cert = exc.certificate
    hh2_rep = hh2.representatives[0] if hh2.representatives else None
    report = RigidityReport(h1.is_zero and hh2.is_zero, T.bound, max_order, seed, h1, hh2, rep, rep_cert, hh2_rep)
    if report.rigid:
        rng = np.random.default_rng(seed)
        D = random_deformation(T, S, max_order, rng)
        ok, steps = gauge_to_trivial(D, S)
        if not ok:
            raise InternalInconsistency("gauging failed although H^1 and HH^2 vanish")
        report.demonstration = steps
        report.deformation = D
    return report


# ---------------------------------------------------------------------------
# Equivalence of extensions
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceResult:
    """``verdict`` is ``"equivalent"`` (with ``witness``) or ``"unknown"`` (with the class)."""

    verdict: str
    difference: np.ndarray
    witness: Automorphism | None = None
    representative: np.ndarray | None = None
    certificate: Certificate | None = None


def equivalent_extensions(Dt: Deformation, Db: Deformation, S: StructureTable) -> EquivalenceResult:
    """Compare two extensions of the same deformation by one order.

    If the difference of the top coefficients is ``d0 phi`` the witness is
    ``1 + t^(m+1) phi`` with ``conjugate(Db, witness) == Dt``.  Otherwise the
    difference class is returned and no verdict is made.
    """
    if Dt.action != Db.action or Dt.order != Db.order or Dt.order < 1:
        raise ValueError("extensions must share the action table and have the same order >= 1")
    m = Dt.order - 1
    for i in range(1, m + 1):
        if np.any(Dt.coefficient(i) != Db.coefficient(i)):
            raise ValueError(f"inputs differ at order {i}, so they do not extend the same deformation")
    C = complex_for(Dt.action, S)
    diff = C.base.reduce(Dt.coefficient(m + 1) - Db.coefficient(m + 1))
    if not C.is_cocycle(Cochain(1, (diff,))):
        raise ValueError("top coefficients do not differ by a 1-cocycle; inputs are not both extensions")
    v = C.flatten(Cochain(1, (diff,)))
    try:
        x = solve(C.base, C.matrix(0), v)
    except Unsolvable as exc:
        return EquivalenceResult("unknown", diff, representative=reduce_mod_span(C.base, C.matrix(0), v), certificate=exc.certificate)
    phi = _derivation_from(C, x)
    zero = C.base.zeros((C.r, C.r))
    Phi = Automorphism(Dt.ring, [zero] * m + [phi])
    if not validate_automorphism(Phi) or conjugate(Db, Phi) != Dt:
        raise InternalInconsistency("equivalence witness does not conjugate one extension to the other")
    return EquivalenceResult("equivalent", diff, witness=Phi)


# ---------------------------------------------------------------------------
# Random valid objects (built by the extension solvers)
# ---------------------------------------------------------------------------


def random_cocycle(C: FStar, rng: np.random.Generator, scale: int = 2) -> np.ndarray:
    """Random integer combination of a basis of ``ker d1``, as an array ``(|E|, r, r)``."""
    K = C.cocycle_basis()
    v = C.base.zeros(C.dim(1))
    for k in range(K.shape[1]):
        v = v + int(rng.integers(-scale, scale + 1)) * K[:, k]
    return C.unflatten(1, C.base.reduce(v)).parts[0]


def random_derivation(A: FiniteRing, rng: np.random.Generator, scale: int = 2) -> np.ndarray:
    phi = A.base.zeros((A.rank, A.rank))
    for Dk in derivation_basis(A):
        phi = phi + int(rng.integers(-scale, scale + 1)) * Dk
    return A.base.reduce(phi)


def random_deformation(
    T: ActionTable, S: StructureTable, order: int, rng: np.random.Generator,
    start: int = 1, scale: int = 2, attempts: int = 20,
) -> Deformation:
    """A valid deformation of the given order whose first ``start - 1`` coefficients vanish.

    ``s^start`` is a random 1-cocycle and later coefficients are solver
    solutions shifted by random cocycles.  Obstructed draws are retried; the
    final fallback shrinks the random cocycles to zero.
    """
    C = complex_for(T, S)
    zero = C.base.zeros(T.action.shape)
    for attempt in range(attempts + 1):
        s = scale if attempt < attempts else 0
        D = Deformation(T, [zero] * (start - 1))
        if order >= start:
            D = Deformation(T, D.coeffs + [random_cocycle(C, rng, s)])
        while D.order < order:
            ext = extend_deformation(D, S, shift=random_cocycle(C, rng, s))
            if not ext.ok:
                break
            D = ext.result
        if D.order >= order:
            return D.truncate(order)
    raise RuntimeError("could not build a deformation")  # pragma: no cover


def random_automorphism(
    A: FiniteRing, order: int, rng: np.random.Generator,
    start: int = 1, scale: int = 2, attempts: int = 20,
) -> Automorphism:
    """A valid automorphism whose first nonzero coefficient is a random derivation at ``start``."""
    zero = A.base.zeros((A.rank, A.rank))
    for attempt in range(attempts + 1):
        s = scale if attempt < attempts else 0
        Phi = Automorphism(A, [zero] * (start - 1))
        if order >= start:
            Phi = Automorphism(A, Phi.coeffs + [random_derivation(A, rng, s)])
        while Phi.order < order:
            ext = extend_automorphism(Phi, shift=random_derivation(A, rng, s))
            if not ext.ok:
                break
            Phi = ext.result
        if Phi.order >= order:
            return Phi.truncate(order)
    raise RuntimeError("could not build an automorphism")  # pragma: no cover


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def cochain1_to_document(T: ActionTable, f) -> dict:
    """Nonzero entries only, in canonical order; missing entries mean zero."""
    entries = []
    for k, alpha in enumerate(T.seqs):
        M = f[k]
        if np.any(M != 0):
            entries.append({"alpha": list(alpha.dense()), "matrix": [[_plain(x) for x in row] for row in M]})
    return {"bound": T.bound, "entries": entries}


def cochain1_from_document(T: ActionTable, doc: dict) -> np.ndarray:
    try:
        bound = int(doc["bound"])
        entries = doc["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed cochain document: {exc}") from exc
    if bound != T.bound:
        raise BoundMismatch(f"cochain bound {bound} != action bound {T.bound}")
    r = T.ring.rank
    out = T.base.zeros(T.action.shape)
    seen = set()
    for e in entries:
        try:
            alpha = parse(e["alpha"])
            M = np.array(e["matrix"], dtype=object)
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed cochain entry: {exc}") from exc
        if alpha not in T.index:
            raise DegreeOverflow(f"alpha {alpha} has degree {alpha.degree} > bound {T.bound}")
        if M.shape != (r, r):
            raise RankMismatch(f"matrix for {alpha} has shape {M.shape}, ring rank is {r}")
        if alpha in seen:
            raise DocumentError(f"duplicate entry for {alpha}")
        seen.add(alpha)
        out[T.index[alpha]] = T.base.array(M)
    return out


def deformation_to_document(D: Deformation, action_ref=None) -> dict:
    return {
        "action": action_ref if action_ref is not None else save_action(D.action),
        "order": D.order,
        "coeffs": [cochain1_to_document(D.action, c) for c in D.coeffs],
    }


def deformation_from_document(doc: dict, action: ActionTable | None = None) -> Deformation:
    try:
        order = int(doc["order"])
        coeffs = doc["coeffs"]
        if action is None:
            if not isinstance(doc["action"], dict):
                raise DocumentError("action given by reference; resolve it before loading")
            action = load_action(doc["action"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"malformed deformation document: {exc}") from exc
    if len(coeffs) != order:
        raise DocumentError(f"order {order} but {len(coeffs)} coefficients")
    return Deformation(action, [cochain1_from_document(action, c) for c in coeffs])


def automorphism_to_document(Phi: Automorphism, ring_ref=None) -> dict:
    return {
        "ring": ring_ref if ring_ref is not None else Phi.ring.to_document(),
        "order": Phi.order,
        "coeffs": [[[_plain(x) for x in row] for row in c] for c in Phi.coeffs],
    }


def automorphism_from_document(doc: dict, ring: FiniteRing | None = None) -> Automorphism:
    try:
        order = int(doc["order"])
        coeffs = doc["coeffs"]
        if ring is None:
            if not isinstance(doc["ring"], dict):
                raise DocumentError("ring given by reference; resolve it before loading")
            ring = FiniteRing.from_document(doc["ring"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"malformed automorphism document: {exc}") from exc
    if len(coeffs) != order:
        raise DocumentError(f"order {order} but {len(coeffs)} coefficients")
    mats = [np.array(c, dtype=object) for c in coeffs]
    for i, M in enumerate(mats, 1):
        if M.shape != (ring.rank, ring.rank):
            raise RankMismatch(f"phi_{i} has shape {M.shape}, ring rank is {ring.rank}")
    return Automorphism(ring, mats)
