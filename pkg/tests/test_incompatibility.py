import itertools

import numpy as np
import pytest

from pamcert.bloch import HermitianOperator, binary_measurement, generators
from pamcert.incompatibility import (
    ParentMeasurement,
    RobustnessResult,
    jm_feasible,
    mirror_symmetric,
    parent_violations,
    robustness,
    verify_parent,
)

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def pauli_triple():
    return [
        binary_measurement(X_AXIS, 0),
        binary_measurement(Y_AXIS, 1),
        binary_measurement(Z_AXIS, 2),
    ]


def analytic_pauli_parent(chi: float) -> ParentMeasurement:
    # parent effects (1/8)(I + chi (s1 x + s2 y + s3 z) . sigma), signs s_i
    paulis = [g.entries for g in generators(2)]
    effects = {}
    for key in itertools.product((0, 1), repeat=3):
        signs = np.array([1.0 if b == 0 else -1.0 for b in key])
        mat = np.eye(2, dtype=complex)
        for s, p in zip(chi * signs, paulis):
            mat = mat + s * p
        effects[key] = HermitianOperator(mat / 8.0)
    return ParentMeasurement(effects)


class TestMirrorSymmetric:
    def test_zero_angle_collapses(self):
        meas = mirror_symmetric(0.0)
        for m in meas[1:]:
            for e, e0 in zip(m.effects, meas[0].effects):
                np.testing.assert_allclose(e.entries, e0.entries, atol=1e-12)

    def test_right_angle_endpoints(self):
        meas = mirror_symmetric(np.pi / 2)
        np.testing.assert_allclose(
            meas[1].effects[0].entries, np.diag([1.0, 0.0]), atol=1e-12
        )
        np.testing.assert_allclose(
            meas[2].effects[0].entries, np.diag([0.0, 1.0]), atol=1e-12
        )

    def test_effects_complete(self):
        for theta in (0.1, 0.7, 1.2):
            for m in mirror_symmetric(theta):
                total = m.effects[0].entries + m.effects[1].entries
                np.testing.assert_allclose(total, np.eye(2), atol=1e-12)

    def test_angle_range(self):
        with pytest.raises(ValueError):
            mirror_symmetric(-0.1)


class TestJmFeasible:
    def test_single_measurement_always_compatible(self):
        feasible, parent = jm_feasible([binary_measurement(X_AXIS)], 1.0)
        assert feasible
        assert verify_parent(parent, [binary_measurement(X_AXIS)], 1.0)

    def test_orthogonal_pair_threshold(self):
        pair = [binary_measurement(X_AXIS, 0), binary_measurement(Z_AXIS, 1)]
        feasible, parent = jm_feasible(pair, 0.70)
        assert feasible
        assert verify_parent(parent, pair, 0.70)
        feasible, parent = jm_feasible(pair, 0.72)
        assert not feasible
        assert parent is None

    def test_pauli_triple_threshold(self):
        triple = pauli_triple()
        chi = 1.0 / np.sqrt(3.0)
        feasible, parent = jm_feasible(triple, chi - 1e-6)
        assert feasible
        assert verify_parent(parent, triple, chi - 1e-6)
        feasible, _ = jm_feasible(triple, chi + 0.01)
        assert not feasible

    def test_monotone_in_noise(self):
        pair = [binary_measurement(X_AXIS, 0), binary_measurement(Z_AXIS, 1)]
        grid = np.linspace(0.0, 1.0, 21)
        feasibility = [jm_feasible(pair, float(c))[0] for c in grid]
        # once infeasible, stays infeasible for all larger chi
        first_bad = feasibility.index(False)
        assert all(feasibility[:first_bad])
        assert not any(feasibility[first_bad:])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            jm_feasible([], 0.5)
        with pytest.raises(ValueError):
            jm_feasible([binary_measurement(X_AXIS)], 1.5)


class TestAnalyticParent:
    def test_valid_at_threshold(self):
        chi = 1.0 / np.sqrt(3.0)
        parent = analytic_pauli_parent(chi)
        assert verify_parent(parent, pauli_triple(), chi, tol=1e-9)

    def test_invalid_beyond_threshold(self):
        with pytest.raises(ValueError):
            analytic_pauli_parent(1.0 / np.sqrt(3.0) + 0.02)

    def test_negated_effect_caught(self):
        chi = 0.5
        parent = analytic_pauli_parent(chi)
        broken = dict(parent.effects)
        key = (0, 0, 0)
        other = (1, 1, 1)
        # swap two effects; completeness survives but marginals break
        broken[key], broken[other] = broken[other], broken[key]
        tampered = ParentMeasurement(broken)
        assert not verify_parent(tampered, pauli_triple(), chi)
        assert parent_violations(tampered, pauli_triple(), chi)


class TestRobustness:
    def test_collapsed_mirror_family_is_compatible(self):
        result = robustness(mirror_symmetric(0.0))
        assert result.chi_lower == 1.0
        assert result.chi_upper == 1.0
        assert verify_parent(result.certificate, mirror_symmetric(0.0), 1.0)

    def test_orthogonal_pair_value(self):
        pair = [binary_measurement(X_AXIS, 0), binary_measurement(Z_AXIS, 1)]
        result = robustness(pair)
        assert result.chi_lower == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-3)
        assert result.chi_upper - result.chi_lower <= 1e-4 + 1e-12
        assert verify_parent(result.certificate, pair, result.chi_lower, tol=1e-7)

    def test_pauli_triple_value(self):
        result = robustness(pauli_triple())
        assert result.chi_lower == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-3)
        assert verify_parent(result.certificate, pauli_triple(), result.chi_lower, tol=1e-7)

    def test_mirror_family_decreases_while_spreading(self):
        # chi* falls as the mirror pair opens; it climbs back near pi/2
        # where the second and third measurements merge into a relabeling
        thetas = [0.2, 0.6, 1.0]
        values = [robustness(mirror_symmetric(t), gap_tol=1e-3).chi_lower for t in thetas]
        for a, b in zip(values, values[1:]):
            assert b <= a + 2e-3

    def test_mirror_family_degenerate_endpoint(self):
        # at theta = pi/2 the triple is effectively the orthogonal pair
        value = robustness(mirror_symmetric(np.pi / 2), gap_tol=1e-3).chi_lower
        assert value == pytest.approx(1.0 / np.sqrt(2.0), abs=2e-3)

    def test_bracket_invariants(self):
        result = robustness(pauli_triple(), gap_tol=5e-3)
        assert isinstance(result, RobustnessResult)
        assert 0.0 <= result.chi_lower <= result.chi_upper <= 1.0
        payload = result.to_json()
        assert set(payload) == {"chi_lower", "chi_upper", "certificate"}

    def test_gap_tol_validation(self):
        with pytest.raises(ValueError):
            robustness(pauli_triple(), gap_tol=0.0)
