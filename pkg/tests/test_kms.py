"""KMS classification engine: explicit measures, trace checks, phase reports."""

import math
import warnings

import pytest

from kmsdyn.errors import (
    ExceptionalSeed,
    NotABranchPoint,
    OutOfRegime,
    WitnessNotFoundAtDepth,
)
from kmsdyn.kms import (
    check_K1,
    check_K2,
    classify,
    classify_julia,
    divergence_witness,
    kms_measure,
    lyubich,
    lyubich_invariance_residual,
)
from kmsdyn.mapexpr import parse_map
from kmsdyn.measure import AtomicMeasure, TestFunctionLibrary
from kmsdyn.projective import SpherePoint, chordal_distance

LIB = TestFunctionLibrary.sphere()
INF = SpherePoint.infinity()


def aff(c):
    return SpherePoint.from_affine(c)


# ---------------------------------------------------------------------------
# explicit KMS measures


def test_power_map_anchors_are_dirac():
    for n in (2, 3, 4):
        R = parse_map(f"z^{n}")
        for beta in (0.1, 1.0, 10.0):
            km0 = kms_measure(R, aff(0), beta)
            assert km0.measure.n_atoms == 1
            assert chordal_distance(km0.measure.points[0], aff(0)) == 0.0
            assert km0.measure.weights[0] == 1.0
            kminf = kms_measure(R, INF, beta)
            assert kminf.measure.n_atoms == 1
            assert kminf.measure.points[0].is_infinity()
            assert km0.tail_bound == 0.0 and kminf.tail_bound == 0.0


def test_reciprocal_square_two_cycle_weights():
    R = parse_map("1/z^2")
    for beta in (0.1, 0.5, 1.0, 2.0, 5.0):
        km = kms_measure(R, aff(0), beta)
        eb = math.exp(beta)
        got = {("inf" if p.is_infinity() else "0"): w for p, w in km.measure.iter_atoms()}
        assert got["0"] == pytest.approx(eb / (eb + 1), abs=1e-12)
        assert got["inf"] == pytest.approx(1 / (eb + 1), abs=1e-12)
        km_inf = kms_measure(R, INF, beta)
        got = {("inf" if p.is_infinity() else "0"): w for p, w in km_inf.measure.iter_atoms()}
        assert got["inf"] == pytest.approx(eb / (eb + 1), abs=1e-12)
        assert got["0"] == pytest.approx(1 / (eb + 1), abs=1e-12)


def test_truncated_series_normalization_and_tail():
    R = parse_map("z^2+1")
    beta = 1.0
    km = kms_measure(R, aff(0), beta, depth=14)
    # every level of the backward tree of 0 is full, so the truncated
    # normalization is the inverse partial geometric sum
    expected_norm = 1.0 / sum((2 / math.e) ** k for k in range(15))
    assert km.normalization == pytest.approx(expected_norm, rel=1e-12)
    assert km.normalization == pytest.approx(1 - 2 / math.e, rel=2e-2)
    assert km.measure.total_mass() == pytest.approx(1.0, abs=1e-12)
    expected_tail = km.normalization * (2 / math.e) ** 15 / (1 - 2 / math.e)
    assert km.tail_bound == pytest.approx(expected_tail, rel=1e-12)
    assert km.measure.n_atoms == 2**15 - 1


def test_kms_measure_point_mass_chain():
    R = parse_map("z^2+1")
    km = kms_measure(R, aff(0), 1.0, depth=8)
    mu = km.measure
    branch = [p for p, _e in R.branch_data().branch_points]
    ebeta = math.exp(-1.0)
    for p, w in mu.iter_atoms():
        if any(chordal_distance(p, b) <= 1e-8 for b in branch):
            continue
        img = mu.point_mass(R.evaluate(p))
        assert abs(ebeta * img - w) <= 1e-9 * km.normalization


def test_kms_measure_regime_errors():
    R = parse_map("z^2+1")
    with pytest.raises(OutOfRegime):
        kms_measure(R, aff(0), 0.5)  # 0 is not exceptional; 0.5 < log 2
    with pytest.raises(OutOfRegime):
        kms_measure(R, aff(0), math.log(2.0))
    with pytest.raises(NotABranchPoint):
        kms_measure(R, aff(3), 2.0)
    with pytest.raises(OutOfRegime):
        kms_measure(R, INF, 0.0)  # exceptional anchors need beta > 0
    # near-critical warning advertises the attainable tail
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kms_measure(parse_map("z^2"), aff(0), math.log(2.0) + 0.01)
        # exceptional anchor: closed form, no warning expected
        assert not caught


def test_exceptional_measures_pass_K1_K2_exactly():
    R = parse_map("1/z^2")
    for beta in (0.3, 1.0):
        km = kms_measure(R, aff(0), beta)
        assert check_K1(R, km.measure, beta, LIB).max_residual <= 1e-10
        assert check_K2(R, km.measure, beta, LIB).max_violation <= 1e-12


def test_k1_vanishes_on_branch_supported_measure():
    R = parse_map("z^2")
    mu = AtomicMeasure.delta(aff(0))
    for beta in (0.2, 1.0, 3.0):
        assert check_K1(R, mu, beta, LIB).max_residual == 0.0


def test_truncated_measure_residuals_within_tail():
    R = parse_map("z^2+1")
    beta = 1.0
    km = kms_measure(R, aff(0), beta, depth=10)
    lib_norm = max(f.sup_norm for f in LIB.functions)
    k1 = check_K1(R, km.measure, beta, LIB)
    assert k1.max_residual <= km.tail_bound * lib_norm
    k2 = check_K2(R, km.measure, beta, LIB)
    assert k2.max_violation <= 2.0 * km.tail_bound * lib_norm
    assert k2.point_mass_equality_residual <= 1e-12


def test_k2_detects_subcritical_point_mass():
    # a non-exceptional point mass below log N violates the domination
    R = parse_map("z^2")
    mu = AtomicMeasure.delta(aff(1))
    rep = check_K2(R, mu, 0.5, LIB)
    assert rep.max_violation > 0.1


def test_delta_infinity_satisfies_K2_for_all_beta():
    R = parse_map("z^2+1")
    mu = AtomicMeasure.delta(INF)
    for beta in (0.0, 0.3, math.log(2.0), 2.0):
        rep = check_K2(R, mu, beta, LIB)
        assert rep.max_violation <= 1e-12


# ---------------------------------------------------------------------------
# Lyubich approximants


def test_lyubich_small_cases():
    R = parse_map("z^2")
    mu = lyubich(R, aff(1), 3)
    assert mu.n_atoms == 8
    for p, w in mu.iter_atoms():
        assert w == pytest.approx(1 / 8)
        assert abs(p.to_affine() ** 8 - 1) < 1e-9
    mu0 = lyubich(R, aff(1), 0)
    assert mu0.n_atoms == 1 and mu0.weights[0] == 1.0


def test_lyubich_mass_exact_through_16():
    R = parse_map("z^2")
    for n in (5, 10, 16):
        mu = lyubich(R, aff(1), n)
        assert mu.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_lyubich_rejects_exceptional_seed():
    with pytest.raises(ExceptionalSeed):
        lyubich(parse_map("z^2"), aff(0), 4)


def test_invariance_residual_decreases():
    R = parse_map("z^2")
    residuals = [lyubich_invariance_residual(R, lyubich(R, aff(2), n), LIB)
                 for n in (2, 6, 12)]
    assert residuals[2] < residuals[0]
    assert residuals[2] <= 1e-3


def test_invariance_residual_trivial_cases():
    R = parse_map("z^3")
    assert lyubich_invariance_residual(R, AtomicMeasure.delta(aff(0)), LIB) == 0.0
    Rp = parse_map("z^2+1")
    res = lyubich_invariance_residual(Rp, AtomicMeasure.delta(aff(1)), LIB)
    assert res > 0.1  # delta_1 pushes to delta_2


# ---------------------------------------------------------------------------
# divergence witness


def test_witness_for_square_map():
    R = parse_map("z^2")
    rep = divergence_witness(R, aff(1), 0.5, depth=10)
    q = 2 * math.exp(-0.5)
    assert rep.partial_sum == pytest.approx(sum(q**n for n in range(11)))
    assert rep.partial_sum >= q**10
    # the seed itself recurs in its own backward orbit, so the witness is deeper
    assert rep.generation >= 1


def test_witness_for_z2_plus_1():
    R = parse_map("z^2+1")
    rep = divergence_witness(R, aff(0), 0.6, depth=8)
    assert rep.partial_sum == pytest.approx(sum((2 * math.exp(-0.6)) ** n for n in range(9)))


def test_witness_precondition_errors():
    R = parse_map("z^2")
    with pytest.raises(ExceptionalSeed):
        divergence_witness(R, aff(0), 0.5)
    with pytest.raises(OutOfRegime):
        divergence_witness(R, aff(1), 0.8)  # above log 2
    with pytest.raises(WitnessNotFoundAtDepth):
        divergence_witness(R, aff(1), 0.5, depth=3, max_candidates=1)


# ---------------------------------------------------------------------------
# classification


def test_classify_z2_plus_1_regimes():
    R = parse_map("z^2+1")
    rep = classify(R, 0.5)
    assert rep.regime == "Subcritical" and rep.counts == (1, 0)
    assert rep.extreme_states[0].anchors[0].is_infinity()
    rep = classify(R, critical=True)
    assert rep.regime == "Critical" and rep.counts == (1, 1)
    kinds = sorted(s.kind for s in rep.extreme_states)
    assert kinds == ["finite", "infinite"]
    rep = classify(R, 1.2)
    assert rep.regime == "Supercritical" and rep.counts == (2, 0)


def test_classify_critical_detection_tolerance():
    R = parse_map("z^2")
    assert classify(R, math.log(2.0)).regime == "Critical"
    assert classify(R, math.log(2.0) + 1e-9).regime == "Supercritical"
    assert classify(R, math.log(2.0) - 1e-9).regime == "Subcritical"


def test_classify_zero_kms():
    rep = classify(parse_map("1/z^2"), 0.0)
    assert rep.regime == "Zero"
    assert len(rep.extreme_states) == 1
    mix = rep.extreme_states[0].restriction
    weights = {("inf" if p.is_infinity() else "0"): w for p, w in mix.iter_atoms()}
    assert weights == {"0": 0.5, "inf": 0.5}

    rep = classify(parse_map("z^2"), 0.0)
    assert len(rep.extreme_states) == 2
    for s in rep.extreme_states:
        assert s.restriction.n_atoms == 1 and s.restriction.weights[0] == 1.0

    rep = classify(parse_map("z^2+1"), 0.0)
    assert len(rep.extreme_states) == 1
    assert rep.extreme_states[0].restriction.points[0].is_infinity()

    rep = classify(parse_map("(z^3-16/27)/z"), 0.0)
    assert rep.extreme_states == []


def test_classify_grid_switches_exactly_at_log_two():
    R = parse_map("z^2+1")
    counts = []
    for beta in (0.3, 0.6, None, 0.8, 1.5):
        rep = classify(R, beta=beta, critical=beta is None)
        counts.append(len(rep.extreme_states))
    assert counts == [1, 1, 2, 2, 2]


def test_classify_julia_variant():
    R = parse_map("z^2")
    # neither branched point of z^2 lies on the unit circle: no states above
    rep = classify_julia(R, 2.0, julia_branch_points=[])
    assert rep.counts == (0, 0)
    rep = classify_julia(R, critical=True)
    assert rep.counts == (0, 1)
    rep = classify_julia(R, 0.3)
    assert rep.extreme_states == []
    # an asserted membership produces the corresponding state
    rep = classify_julia(parse_map("(z^3-16/27)/z"), 2.0,
                         julia_branch_points=[p for p, _e in
                                              parse_map("(z^3-16/27)/z").branch_data().branch_points][:2])
    assert rep.counts == (2, 0)
    with pytest.raises(NotABranchPoint):
        classify_julia(R, 2.0, julia_branch_points=[aff(0.5)])


def test_supercritical_states_carry_exceptional_restrictions():
    rep = classify(parse_map("1/z^2"), 3.0)
    assert rep.counts == (2, 0)
    for s in rep.extreme_states:
        assert s.restriction is not None
        assert s.restriction.total_mass() == pytest.approx(1.0)


def test_classify_critical_without_exceptional_points():
    # the gasket map has no exceptional points: the invariant state stands alone
    R = parse_map("(z^3-16/27)/z")
    rep = classify(R, critical=True)
    assert rep.counts == (0, 1)
    assert rep.extreme_states[0].label == "lyubich"
    assert classify(R, 0.5).extreme_states == []
    assert classify(R, 2.0).counts == (len(R.branch_data().branch_points), 0)


def test_witness_skips_branch_value_seeds():
    # 1 is a branch value of z^2+1, so the seed's own tree touches C(R);
    # the search must advance to its preimage 0
    R = parse_map("z^2+1")
    rep = divergence_witness(R, aff(1), 0.5, depth=8)
    assert rep.candidates_rejected >= 1
    assert chordal_distance(rep.witness, aff(0)) <= 1e-9
    assert rep.generation == 1


def test_kms_measure_warns_near_critical_auto_depth():
    R = parse_map("z^2+1")
    beta = math.log(2.0) + 0.01
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        km = kms_measure(R, aff(0), beta, atom_budget=2000)
    assert any("tail" in str(w.message) for w in caught)
    assert km.measure.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_k1_reports_masked_mass():
    # the anchor atom of mu_{beta,0} sits on a branched point, so the cutoff
    # masks exactly its weight (= the normalization)
    R = parse_map("z^2+1")
    km = kms_measure(R, aff(0), 1.0, depth=6)
    rep = check_K1(R, km.measure, 1.0, LIB)
    assert rep.masked_mass == pytest.approx(km.normalization, rel=1e-9)
    assert rep.cutoff_radius == 1e-3
