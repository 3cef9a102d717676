import numpy as np
import pytest

from pamcert import bloch
from pamcert.bloch import (
    HermitianOperator,
    MeasurementSet,
    Preparation,
    behavior_of,
    binary_measurement,
    bloch_coords,
    born,
    depolarize,
    generators,
    inflate,
    maximally_mixed,
    projector_from_unit_vector,
    state_from_bloch,
    trace_product,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def random_state(rng, pure=False):
    r = rng.normal(size=3)
    r /= np.linalg.norm(r)
    if not pure:
        r *= rng.uniform(0, 1)
    return state_from_bloch(r, 2)


def random_projector(rng):
    v = rng.normal(size=3)
    return projector_from_unit_vector(v / np.linalg.norm(v), 2)


class TestGenerators:
    def test_qubit_generators_are_paulis(self):
        g = generators(2)
        assert len(g) == 3
        np.testing.assert_allclose(g[0].entries, X, atol=1e-15)
        np.testing.assert_allclose(g[1].entries, Y, atol=1e-15)
        np.testing.assert_allclose(g[2].entries, Z, atol=1e-15)

    def test_traceless(self):
        for d in (2, 3, 4):
            for g in generators(d):
                assert abs(g.trace()) < 1e-12

    def test_qutrit_orthogonality(self):
        g = generators(3)
        assert len(g) == 8
        for i, gi in enumerate(g):
            for j, gj in enumerate(g):
                want = 2.0 if i == j else 0.0
                assert abs(trace_product(gi, gj) - want) < 1e-12

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            generators(1)


class TestProjectors:
    def test_z_projector(self):
        p = projector_from_unit_vector([0, 0, 1], 2)
        np.testing.assert_allclose(p.entries, np.diag([1.0, 0.0]), atol=1e-12)

    def test_antipodal_pair_completes(self):
        p_up = projector_from_unit_vector([0, 0, -1], 2)
        np.testing.assert_allclose(p_up.entries, np.diag([0.0, 1.0]), atol=1e-12)
        rng = np.random.default_rng(11)
        for _ in range(50):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            total = (
                projector_from_unit_vector(v, 2).entries
                + projector_from_unit_vector(-v, 2).entries
            )
            np.testing.assert_allclose(total, np.eye(2), atol=1e-12)

    def test_x_projector_eigenvalues(self):
        p = projector_from_unit_vector([1, 0, 0], 2)
        np.testing.assert_allclose(np.linalg.eigvalsh(p.entries), [0.0, 1.0], atol=1e-12)

    def test_non_unit_vector_rejected(self):
        with pytest.raises(ValueError):
            projector_from_unit_vector([0.5, 0, 0], 2)


class TestStates:
    def test_center_is_maximally_mixed(self):
        np.testing.assert_allclose(state_from_bloch([0, 0, 0], 2).entries, np.eye(2) / 2)

    def test_pole(self):
        np.testing.assert_allclose(
            state_from_bloch([0, 0, 1], 2).entries, np.diag([1.0, 0.0]), atol=1e-12
        )

    def test_interior_eigenvalues(self):
        rho = state_from_bloch([0.6, 0, 0], 2)
        np.testing.assert_allclose(np.linalg.eigvalsh(rho.entries), [0.2, 0.8], atol=1e-12)

    def test_overlong_vector_rejected(self):
        with pytest.raises(ValueError):
            state_from_bloch([1.2, 0, 0], 2)

    def test_bloch_roundtrip(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            r = rng.uniform(-0.5, 0.5, size=3)
            got = bloch_coords(state_from_bloch(r, 2))
            np.testing.assert_allclose(got.coords, r, atol=1e-12)


class TestBorn:
    def test_aligned(self):
        p = HermitianOperator(np.diag([1.0, 0.0]))
        assert born(p, p) == pytest.approx(1.0, abs=1e-12)

    def test_mixed(self):
        p = HermitianOperator(np.diag([1.0, 0.0]))
        assert born(p, maximally_mixed(2)) == pytest.approx(0.5, abs=1e-12)

    def test_overlap_formula(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            r = rng.normal(size=3)
            r = r / np.linalg.norm(r) * rng.uniform(0, 1)
            lhs = born(projector_from_unit_vector(v, 2), state_from_bloch(r, 2))
            assert abs(lhs - (1 + v @ r) / 2) < 1e-10

    def test_bilinearity(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            m1, m2 = random_projector(rng), random_projector(rng)
            rho = random_state(rng)
            a, b = rng.uniform(-1, 1, size=2)
            combo = HermitianOperator(a * m1.entries + b * m2.entries)
            lhs = trace_product(combo, rho)
            rhs = a * trace_product(m1, rho) + b * trace_product(m2, rho)
            assert abs(lhs - rhs) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            born(maximally_mixed(2), maximally_mixed(3))


class TestDepolarizeInflate:
    def test_identity_channel(self):
        rho = state_from_bloch([0.3, 0.2, -0.4], 2)
        np.testing.assert_allclose(depolarize(rho, 1.0).entries, rho.entries, atol=1e-15)
        np.testing.assert_allclose(inflate(rho, 1.0).entries, rho.entries, atol=1e-15)

    def test_full_depolarization(self):
        rho = state_from_bloch([0.9, 0, 0], 2)
        np.testing.assert_allclose(depolarize(rho, 0.0).entries, np.eye(2) / 2, atol=1e-15)

    def test_mixed_state_is_fixed_point(self):
        for t in (0.2, 0.7, 1.0):
            np.testing.assert_allclose(
                inflate(maximally_mixed(2), t).entries, np.eye(2) / 2, atol=1e-15
            )

    def test_inflate_scales_bloch(self):
        rho = state_from_bloch([0, 0, 0.5], 2)
        got = bloch_coords(inflate(rho, 0.8))
        np.testing.assert_allclose(got.coords, [0, 0, 0.625], atol=1e-12)

    def test_roundtrip(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            rho = random_state(rng)
            t = rng.uniform(0.05, 1.0)
            back = depolarize(inflate(rho, t), t)
            np.testing.assert_allclose(back.entries, rho.entries, atol=1e-12)

    def test_self_duality(self):
        rng = np.random.default_rng(37)
        for _ in range(200):
            m, rho = random_projector(rng), random_state(rng)
            t = rng.uniform(0, 1)
            lhs = trace_product(depolarize(m, t), rho)
            rhs = trace_product(m, depolarize(rho, t))
            assert abs(lhs - rhs) < 1e-10

    def test_inflated_probe_reproduces_statistics(self):
        # probing the inflated state with the depolarized projector gives
        # back the ideal statistics exactly
        rng = np.random.default_rng(41)
        for _ in range(200):
            rho, proj = random_state(rng), random_projector(rng)
            eta = rng.uniform(0.05, 1.0)
            lhs = trace_product(depolarize(proj, eta), inflate(rho, eta))
            assert abs(lhs - trace_product(proj, rho)) < 1e-10

    def test_parameter_ranges(self):
        rho = maximally_mixed(2)
        with pytest.raises(ValueError):
            depolarize(rho, 1.5)
        with pytest.raises(ValueError):
            inflate(rho, 0.0)


class TestTypes:
    def test_hermiticity_enforced(self):
        with pytest.raises(ValueError):
            HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_preparation_validation(self):
        with pytest.raises(ValueError):
            Preparation(0, HermitianOperator(np.diag([0.7, 0.7])))
        with pytest.raises(ValueError):
            Preparation(0, HermitianOperator(np.diag([1.5, -0.5])))

    def test_measurement_validation(self):
        p = projector_from_unit_vector([0, 0, 1], 2)
        with pytest.raises(ValueError):
            MeasurementSet(0, (p, p))  # does not sum to identity
        m = binary_measurement([0, 0, 1])
        assert m.n_outcomes == 2

    def test_operator_json_roundtrip(self):
        rng = np.random.default_rng(43)
        op = random_state(rng, pure=True)
        back = HermitianOperator.from_json(op.to_json())
        np.testing.assert_allclose(back.entries, op.entries, atol=1e-15)

    def test_bloch_json_roundtrip(self):
        v = bloch.BlochVector(2, np.array([0.1, 0.2, 0.3]))
        back = bloch.BlochVector.from_json(v.to_json())
        np.testing.assert_allclose(back.coords, v.coords)
        assert back.dim == 2


class TestBehaviorOf:
    def test_maximally_mixed_is_uniform(self):
        preps = [Preparation(0, maximally_mixed(2))]
        meas = [binary_measurement([0, 0, 1]), binary_measurement([1, 0, 0])]
        beh = behavior_of(preps, meas)
        np.testing.assert_allclose(beh.p, 0.5, atol=1e-12)

    def test_aligned_state_is_deterministic(self):
        preps = [Preparation(0, state_from_bloch([0, 0, 1], 2))]
        beh = behavior_of(preps, [binary_measurement([0, 0, 1])])
        assert beh.p[0, 0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_outcome_normalization(self):
        rng = np.random.default_rng(47)
        preps = [Preparation(i, random_state(rng)) for i in range(3)]
        meas = []
        for y in range(4):
            axis = rng.normal(size=3)
            meas.append(binary_measurement(axis / np.linalg.norm(axis), label=y))
        beh = behavior_of(preps, meas)
        np.testing.assert_allclose(beh.p.sum(axis=0), 1.0, atol=1e-9)
