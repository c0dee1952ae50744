import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lndeform.base import Z
from lndeform.deformation import (
    Automorphism,
    Deformation,
    automorphism_from_document,
    automorphism_obstruction,
    automorphism_to_document,
    complex_for,
    compose_automorphisms,
    conjugate,
    deformation_from_document,
    deformation_obstruction,
    deformation_to_document,
    equivalent_extensions,
    extend_automorphism,
    extend_deformation,
    first_nonzero_is_derivation,
    gauge_step,
    gauge_to_trivial,
    infinitesimal_class,
    invert_automorphism,
    obstruction_sequence,
    random_automorphism,
    random_deformation,
    rigidity_certificate,
    same_class,
    validate_automorphism,
    validate_deformation,
)
from lndeform.errors import BoundMismatch
from lndeform.exp_seq import ExpSeq, splittings
from lndeform.fstar_complex import Cochain
from lndeform.ln_structure import StructureTable
from lndeform.ring_core import (
    hochschild_differential,
    hochschild_matrix,
    integers,
    product_ring,
    truncated_polynomial_ring,
)
from lndeform.s_algebra import canonical_instance, trivial_instance

from oracles import _vmul

S2 = StructureTable(2)
DUAL = truncated_polynomial_ring(2)
EULER = np.array([[0, 0], [0, 1]], dtype=object)
CANON_RING, CANON = canonical_instance(2)


def example_deformation(d=1, e=2):
    """Trivial action on Z[x]/(x^2), N = 2: s^1 = d*D at (1), e*D at (2), -e*D at (0,1)."""
    T = trivial_instance(DUAL, 2)
    s1 = Z.zeros(T.action.shape)
    s1[T.index[ExpSeq([1])]] = d * EULER
    s1[T.index[ExpSeq([2])]] = e * EULER
    s1[T.index[ExpSeq([0, 1])]] = -e * EULER
    return Deformation(T, [s1])


def series_product(P, Q, m):
    """Coefficients of ``P Q`` mod ``t^(m+1)`` for lists starting at the constant term."""
    r = P[0].shape[0]
    out = []
    for n in range(m + 1):
        acc = np.zeros((r, r), dtype=object)
        for i in range(n + 1):
            if i < len(P) and n - i < len(Q):
                acc = acc + P[i].dot(Q[n - i])
        out.append(acc)
    return out


# -- deformations -----------------------------------------------------------


def test_validate_examples():
    T = trivial_instance(DUAL, 2)
    assert validate_deformation(Deformation(T, []), S2).ok
    assert validate_deformation(Deformation(T, [Z.zeros(T.action.shape)] * 3), S2).ok
    assert validate_deformation(example_deformation(), S2).ok
    assert validate_deformation(Deformation(CANON, []), S2).ok


def test_validate_locates_faults():
    D = example_deformation(1, 1)
    s1 = D.coefficient(1).copy()
    s1[D.action.index[ExpSeq([0, 1])]] = 0 * EULER
    rep = validate_deformation(Deformation(D.action, [s1]), S2)
    assert not rep.ok and rep.law == "product"
    assert rep.where[0] == 1 and rep.where[1:3] == (ExpSeq([1]), ExpSeq([1]))
    s1 = D.coefficient(1).copy()
    s1[D.action.index[ExpSeq([1])]] = DUAL.identity_map()
    rep = validate_deformation(Deformation(D.action, [s1]), S2)
    assert not rep.ok


def test_example_infinitesimal_class():
    D = example_deformation()
    cls = infinitesimal_class(D, S2)
    assert cls.order == 1 and not cls.is_zero
    assert (cls.representative == cls.cocycle).all()
    T = trivial_instance(DUAL, 2)
    assert infinitesimal_class(Deformation(T, [Z.zeros(T.action.shape)]), S2).is_zero


def test_example_obstruction_matches_double_loop():
    D = example_deformation(1, 3)
    ob = deformation_obstruction(D, S2)
    C = complex_for(D.action, S2)
    assert C.is_cocycle(ob.cochain)
    s = D.coefficient(1)
    for k, (a, b) in enumerate(C.tuples(2)):
        X, Y = s[C.seq_index[a]], s[C.seq_index[b]]
        expected = [[-sum(X[i, m] * Y[m, j] for m in range(2)) for j in range(2)] for i in range(2)]
        assert ob.cochain.f0[k].tolist() == expected
    mult = DUAL.mult.tolist()
    for k, alpha in enumerate(C.seqs):
        for i in range(2):
            for j in range(2):
                acc = [0, 0]
                for beta, gamma in splittings(alpha):
                    u = s[C.seq_index[beta]][:, i].tolist()
                    v = s[C.seq_index[gamma]][:, j].tolist()
                    acc = [x - y for x, y in zip(acc, _vmul(mult, u, v))]
                assert ob.cochain.f1[k, i, j].tolist() == acc


def test_zero_obstruction_and_trivial_extension():
    T = trivial_instance(DUAL, 2)
    D = Deformation(T, [Z.zeros(T.action.shape)])
    assert deformation_obstruction(D, S2).is_zero()
    ext = extend_deformation(D, S2)
    assert ext.ok and not np.any(ext.result.coefficient(2) != 0)


def test_failed_extension_carries_certificate():
    # a seeded search for an obstructed order-1 deformation on canonical(2)
    C = complex_for(CANON, S2)
    rng = np.random.default_rng(7)
    found = False
    for _ in range(40):
        D = random_deformation(CANON, S2, 1, rng, scale=3)
        ext = extend_deformation(D, S2)
        ob = C.flatten(ext.obstruction.cochain)
        if not ext.ok:
            found = True
            assert ext.certificate.verify(Z, C.matrix(1), ob)
        else:
            assert validate_deformation(ext.result, S2).ok
    assert found


def test_obstruction_sequence_examples():
    T = trivial_instance(DUAL, 2)
    steps = obstruction_sequence(T, Z.zeros(T.action.shape), S2, 4)
    assert [s.order for s in steps] == [1, 2, 3] and all(s.vanishes for s in steps)
    D = example_deformation()
    steps = obstruction_sequence(T, D.coefficient(1), S2, 3)
    C = complex_for(T, S2)
    for s in steps:
        assert C.is_cocycle(s.obstruction.cochain)
    assert len(steps) == 2 or not steps[-1].vanishes
    with pytest.raises(ValueError):
        bad = Z.zeros(T.action.shape)
        bad[0] = DUAL.identity_map()
        obstruction_sequence(T, bad, S2, 3)


# -- automorphisms ----------------------------------------------------------


def test_validate_automorphism_examples():
    assert validate_automorphism(Automorphism.identity(DUAL, 3)).ok
    for m in (1, 2, 3):
        Phi = Automorphism(DUAL, [0 * EULER] * (m - 1) + [EULER])
        assert validate_automorphism(Phi).ok
        assert first_nonzero_is_derivation(Phi)
    scaling = np.array([[1, 0], [0, 0]], dtype=object)
    rep = validate_automorphism(Automorphism(DUAL, [scaling]))
    assert not rep.ok and rep.where[0] == 1
    assert first_nonzero_is_derivation(Automorphism.identity(DUAL, 2))


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_random_automorphisms(seed):
    A = truncated_polynomial_ring(3)
    Phi = random_automorphism(A, 3, np.random.default_rng(seed))
    assert validate_automorphism(Phi).ok
    assert first_nonzero_is_derivation(Phi)
    Psi = invert_automorphism(Phi)
    assert validate_automorphism(Psi).ok
    P = [A.identity_map()] + Phi.coeffs
    Q = [A.identity_map()] + Psi.coeffs
    ident = [A.identity_map()] + [np.zeros((3, 3), dtype=object)] * 3
    for lhs in (series_product(P, Q, 3), series_product(Q, P, 3)):
        assert all((x == y).all() for x, y in zip(lhs, ident))
    ob = automorphism_obstruction(Phi)
    assert not hochschild_differential(A, ob.cochain, 3).any()


def test_inverse_low_order():
    rng = np.random.default_rng(3)
    Phi = random_automorphism(truncated_polynomial_ring(3), 2, rng)
    Psi = invert_automorphism(Phi)
    p1, p2 = Phi.coefficient(1), Phi.coefficient(2)
    assert (Psi.coefficient(1) == -p1).all()
    assert (Psi.coefficient(2) == p1.dot(p1) - p2).all()
    assert invert_automorphism(Automorphism.identity(DUAL, 2)) == Automorphism.identity(DUAL, 2)


def test_automorphism_obstruction_examples():
    assert not automorphism_obstruction(Automorphism.identity(DUAL, 2)).cochain.any()
    phi = 3 * EULER
    ob = automorphism_obstruction(Automorphism(DUAL, [phi])).cochain
    for a in range(2):
        for b in range(2):
            expected = [-v for v in _vmul(DUAL.mult.tolist(), phi[:, a].tolist(), phi[:, b].tolist())]
            assert ob[a, b].tolist() == expected


def test_extend_automorphism():
    ext = extend_automorphism(Automorphism.identity(DUAL, 2))
    assert ext.ok and not ext.result.coefficient(3).any()
    # 1 + t D with D(x) = x: the obstruction -D(x)D(x) = -x^2 vanishes
    ext = extend_automorphism(Automorphism(DUAL, [EULER]))
    assert ext.ok
    # HH^2 = 0 for Z x Z, so every automorphism extends to any order
    A = product_ring(2)
    Phi = Automorphism.identity(A, 0)
    for _ in range(4):
        ext = extend_automorphism(Phi)
        assert ext.ok
        Phi = ext.result
    # 1 + t D with D(1) = 0, D(x) = 1 on F2[x]/(x^2) has obstruction -1 in HH^2
    from lndeform.base import Zmod

    F = truncated_polynomial_ring(2, Zmod(2))
    D = np.array([[0, 1], [0, 0]], dtype=object)
    ext = extend_automorphism(Automorphism(F, [D]))
    assert not ext.ok
    assert ext.certificate.verify(F.base, hochschild_matrix(F, 2), ext.obstruction.cochain.reshape(-1))


# -- conjugation and classes ------------------------------------------------


def test_conjugation_examples():
    rng = np.random.default_rng(0)
    D = random_deformation(CANON, S2, 2, rng)
    assert conjugate(D, Automorphism.identity(CANON_RING, 2)) == D
    Phi = random_automorphism(CANON_RING, 2, rng)
    E = conjugate(Deformation(CANON, [Z.zeros(CANON.action.shape)] * 2), Phi)
    C = complex_for(CANON, S2)
    assert (E.coefficient(1) == C.d0(Phi.coefficient(1)).parts[0]).all()
    with pytest.raises(BoundMismatch):
        conjugate(D, Automorphism.identity(CANON_RING, 1))


@given(st.integers(0, 2**32))
@settings(max_examples=10)
def test_conjugation_is_a_group_action(seed):
    rng = np.random.default_rng(seed)
    D = random_deformation(CANON, S2, 3, rng)
    Phi = random_automorphism(CANON_RING, 3, rng)
    Psi = random_automorphism(CANON_RING, 3, rng)
    E = conjugate(D, Phi)
    assert validate_deformation(E, S2).ok
    assert conjugate(E, Psi) == conjugate(D, compose_automorphisms(Phi, Psi))
    C = complex_for(CANON, S2)
    assert C.is_cocycle(Cochain(1, (E.coefficient(E.first_nonzero() or 1),)))
    if D.first_nonzero() == 1:
        assert same_class(C, infinitesimal_class(D, S2).cocycle, infinitesimal_class(E, S2).cocycle)


@given(st.integers(0, 2**32), st.integers(1, 3))
@settings(max_examples=10)
def test_leading_coefficient_is_a_cocycle(seed, start):
    D = random_deformation(CANON, S2, 3, np.random.default_rng(seed), start=start)
    assert validate_deformation(D, S2).ok
    k = D.first_nonzero()
    if k is not None:
        assert complex_for(CANON, S2).is_cocycle(Cochain(1, (D.coefficient(k),)))


# -- gauging, rigidity, equivalence -----------------------------------------


def test_gauge_step_examples():
    C = complex_for(CANON, S2)
    rng = np.random.default_rng(5)
    T = trivial_instance(DUAL, 2)
    D0 = Deformation(T, [Z.zeros(T.action.shape)] * 2)
    g = gauge_step(D0, S2)
    assert g.ok and g.result == D0 and g.automorphism == Automorphism.identity(DUAL, 2)
    for k in (1, 2):
        phi = C.random(0, rng).parts[0]
        coeffs = [Z.zeros(CANON.action.shape)] * (k - 1) + [C.d0(phi).parts[0]]
        D = Deformation(CANON, coeffs)
        while D.order < 3:
            D = extend_deformation(D, S2).result
        g = gauge_step(D, S2)
        assert g.ok and g.order == k
        nxt = g.result.first_nonzero()
        assert nxt is None or nxt > k
    # a non-coboundary leading coefficient is reported at the coboundary stage
    g = gauge_step(example_deformation(), S2)
    assert not g.ok and g.stage == "coboundary"


def test_gauge_to_trivial_on_canonical_coboundaries():
    C = complex_for(CANON, S2)
    phi = C.random(0, np.random.default_rng(9)).parts[0]
    D = Deformation(CANON, [C.d0(phi).parts[0]])
    D = extend_deformation(extend_deformation(D, S2).result, S2).result
    ok, steps = gauge_to_trivial(D, S2)
    assert ok and steps


def test_rigidity_reports():
    S = StructureTable(2)
    rep = rigidity_certificate(trivial_instance(integers(), 2), S, 3, seed=4)
    assert rep.rigid and rep.h1.is_zero and rep.hh2.is_zero
    assert rep.lines()[-2] == "RIGID-at-(N=2,M=3)"
    assert rep.lines() == rigidity_certificate(trivial_instance(integers(), 2), S, 3, seed=4).lines()
    rep = rigidity_certificate(trivial_instance(DUAL, 2), S, 3)
    assert not rep.rigid and not rep.h1.is_zero
    C = complex_for(trivial_instance(DUAL, 2), S)
    assert C.is_cocycle(C.unflatten(1, rep.h1_representative))
    assert rep.h1_certificate.verify(Z, C.matrix(0), rep.h1_representative)
    assert rep.lines()[-1].startswith("NOT-CERTIFIED nonzero: H^1")


def test_equivalent_extensions():
    C = complex_for(CANON, S2)
    rng = np.random.default_rng(11)
    D = random_deformation(CANON, S2, 1, rng)
    Db = extend_deformation(D, S2).result
    res = equivalent_extensions(Db, Db, S2)
    assert res.verdict == "equivalent" and res.witness.first_nonzero() is None
    phi = C.random(0, rng).parts[0]
    top = Db.coefficient(2) + C.d0(phi).parts[0]
    Dt = Deformation(CANON, Db.coeffs[:-1] + [top])
    res = equivalent_extensions(Dt, Db, S2)
    assert res.verdict == "equivalent"
    psi = res.witness.coefficient(2)
    assert res.witness.first_nonzero() == 2
    # the witness is determined up to ker d0, so compare images
    assert (C.d0(psi).parts[0] == C.d0(phi).parts[0]).all()
    assert conjugate(Db, res.witness) == Dt
    assert C.is_cocycle(Cochain(1, (res.difference,)))


def test_inequivalent_difference_is_unknown():
    T = trivial_instance(DUAL, 2)
    D = Deformation(T, [Z.zeros(T.action.shape)])
    Db = extend_deformation(D, S2).result
    Dt = Deformation(T, [Z.zeros(T.action.shape), example_deformation().coefficient(1)])
    assert validate_deformation(Dt, S2).ok
    res = equivalent_extensions(Dt, Db, S2)
    assert res.verdict == "unknown" and res.witness is None
    with pytest.raises(ValueError):
        equivalent_extensions(example_deformation(), Dt, S2)


# -- documents --------------------------------------------------------------


def test_documents_round_trip():
    D = example_deformation()
    doc = deformation_to_document(D, "action.json")
    assert doc["action"] == "action.json" and doc["order"] == 1
    assert deformation_from_document(doc, D.action) == D
    Phi = random_automorphism(CANON_RING, 2, np.random.default_rng(2))
    assert automorphism_from_document(automorphism_to_document(Phi), None) == Phi
