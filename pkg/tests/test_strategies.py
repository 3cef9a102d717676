import numpy as np
import pytest

from pamcert import strategies
from pamcert.strategies import (
    Behavior,
    DeterministicStrategy,
    Scenario,
    behavior_columns,
    behaviors_equal_iff_used_parts_agree,
    count,
    deterministic_behavior,
    draw_indices,
    from_index,
    sample_distinct,
    to_index,
)

ICO_SCEN = Scenario(nX=3, nY=6, nA=2, nB=2)
ACT_SCEN = Scenario(nX=4, nY=2, nA=2, nB=2)


class TestCount:
    def test_icosahedron_scenario(self):
        assert count(ICO_SCEN) == 2**3 * 2**12 == 32768

    def test_trivial(self):
        assert count(Scenario(1, 1, 1, 1)) == 1

    def test_activation_scenario(self):
        assert count(ACT_SCEN) == 2**4 * 2**4 == 256

    def test_huge_counts_are_exact(self):
        s = Scenario(nX=64, nY=8, nA=3, nB=3)
        assert count(s) == 3**64 * 3**24

    def test_invalid_scenario(self):
        with pytest.raises(ValueError):
            Scenario(0, 1, 1, 1)


class TestIndexing:
    def test_zero_is_all_zeros(self):
        st = from_index(ICO_SCEN, 0)
        assert not st.enc.any()
        assert not st.dec.any()

    def test_last_is_all_max(self):
        st = from_index(ICO_SCEN, count(ICO_SCEN) - 1)
        assert (st.enc == ICO_SCEN.nA - 1).all()
        assert (st.dec == ICO_SCEN.nB - 1).all()

    def test_roundtrip_bijection(self):
        rng = np.random.default_rng(101)
        seen = set()
        for k in rng.integers(0, count(ICO_SCEN), size=10_000):
            k = int(k)
            st = from_index(ICO_SCEN, k)
            assert to_index(ICO_SCEN, st) == k
            seen.add(k)
        assert len(seen) > 8000  # the draw really explored the space

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            from_index(ICO_SCEN, count(ICO_SCEN))
        with pytest.raises(ValueError):
            from_index(ICO_SCEN, -1)

    def test_decode_indices_matches_scalar(self):
        rng = np.random.default_rng(7)
        ks = [int(k) for k in rng.integers(0, count(ICO_SCEN), size=64)]
        enc, dec = strategies.decode_indices(ICO_SCEN, ks)
        for i, k in enumerate(ks):
            st = from_index(ICO_SCEN, k)
            assert (enc[i] == st.enc).all()
            assert (dec[i] == st.dec).all()

    def test_json_roundtrip(self):
        st = from_index(ICO_SCEN, 12345)
        back = DeterministicStrategy.from_json(st.to_json())
        assert (back.enc == st.enc).all()
        assert (back.dec == st.dec).all()


class TestSampling:
    def test_exhaustive_draw_is_full_enumeration(self):
        drawn = sample_distinct(ACT_SCEN, count(ACT_SCEN), seed=0)
        indices = {to_index(ACT_SCEN, st) for st in drawn}
        assert indices == set(range(256))

    def test_seed_determinism(self):
        a = sample_distinct(ICO_SCEN, 500, seed=42)
        b = sample_distinct(ICO_SCEN, 500, seed=42)
        assert [to_index(ICO_SCEN, s) for s in a] == [to_index(ICO_SCEN, s) for s in b]

    def test_distinctness(self):
        drawn = sample_distinct(ICO_SCEN, 1000, seed=3)
        indices = [to_index(ICO_SCEN, s) for s in drawn]
        assert len(set(indices)) == 1000

    def test_oversampling_rejected(self):
        with pytest.raises(ValueError):
            sample_distinct(ACT_SCEN, 257, seed=0)

    def test_exclusion(self):
        rng = np.random.default_rng(9)
        exclude = set(range(100))
        got = draw_indices(ACT_SCEN, 100, rng, exclude=exclude)
        assert len(set(got)) == 100
        assert not set(got) & exclude

    def test_gigantic_population_sampling(self):
        s = Scenario(nX=64, nY=8, nA=3, nB=3)  # count far above 2**63
        drawn = draw_indices(s, 50, np.random.default_rng(1))
        assert len(set(drawn)) == 50
        assert all(0 <= k < count(s) for k in drawn)


class TestDeterministicBehavior:
    def test_constant_strategy(self):
        st = DeterministicStrategy(np.zeros(3, dtype=int), np.ones((2, 6), dtype=int))
        beh = deterministic_behavior(ICO_SCEN, st)
        assert (beh.p[1] == 1.0).all()
        assert (beh.p[0] == 0.0).all()

    def test_vertex_property(self):
        rng = np.random.default_rng(13)
        for k in rng.integers(0, count(ICO_SCEN), size=50):
            beh = deterministic_behavior(ICO_SCEN, from_index(ICO_SCEN, int(k)))
            assert set(np.unique(beh.p)) <= {0.0, 1.0}
            np.testing.assert_allclose(beh.p.sum(axis=0), 1.0)

    def test_invalid_strategy_rejected(self):
        st = DeterministicStrategy(np.array([0, 0, 5]), np.zeros((2, 6), dtype=int))
        with pytest.raises(ValueError):
            deterministic_behavior(ICO_SCEN, st)


class TestBehaviorColumns:
    def test_matches_single_behavior(self):
        rng = np.random.default_rng(17)
        ks = [int(k) for k in rng.integers(0, count(ICO_SCEN), size=40)]
        cols = behavior_columns(ICO_SCEN, ks)
        assert cols.shape == (ICO_SCEN.n_entries, 40)
        for i, k in enumerate(ks):
            beh = deterministic_behavior(ICO_SCEN, from_index(ICO_SCEN, k))
            np.testing.assert_array_equal(cols[:, i], beh.p.ravel())

    def test_accepts_strategy_objects(self):
        sts = sample_distinct(ACT_SCEN, 10, seed=5)
        cols = behavior_columns(ACT_SCEN, sts)
        assert cols.shape == (ACT_SCEN.n_entries, 10)

    def test_empty(self):
        assert behavior_columns(ICO_SCEN, []).shape == (ICO_SCEN.n_entries, 0)


class TestBehaviorProperties:
    def test_convex_mixtures_stay_normalized(self):
        rng = np.random.default_rng(19)
        sts = sample_distinct(ICO_SCEN, 30, seed=2)
        weights = rng.dirichlet(np.ones(30))
        p = sum(
            w * deterministic_behavior(ICO_SCEN, st).p for w, st in zip(weights, sts)
        )
        mix = Behavior(ICO_SCEN, p)
        np.testing.assert_allclose(mix.p.sum(axis=0), 1.0, atol=1e-12)

    def test_behavior_validation(self):
        bad = np.full((2, 3, 6), 0.75)
        with pytest.raises(ValueError):
            Behavior(ICO_SCEN, bad)

    def test_collision_predicate(self):
        # same encoding, decodings differing only on an unused message row:
        # identical behaviors
        enc = np.zeros(3, dtype=int)  # message 1 never used
        dec_a = np.zeros((2, 6), dtype=int)
        dec_b = dec_a.copy()
        dec_b[1, :] = 1
        st_a = DeterministicStrategy(enc, dec_a)
        st_b = DeterministicStrategy(enc, dec_b)
        assert behaviors_equal_iff_used_parts_agree(ICO_SCEN, st_a, st_b)
        np.testing.assert_array_equal(
            deterministic_behavior(ICO_SCEN, st_a).p,
            deterministic_behavior(ICO_SCEN, st_b).p,
        )

    def test_collision_predicate_random(self):
        rng = np.random.default_rng(23)
        pairs = rng.integers(0, count(ICO_SCEN), size=(200, 2))
        for ka, kb in pairs:
            st_a, st_b = from_index(ICO_SCEN, int(ka)), from_index(ICO_SCEN, int(kb))
            same_behavior = np.array_equal(
                deterministic_behavior(ICO_SCEN, st_a).p,
                deterministic_behavior(ICO_SCEN, st_b).p,
            )
            assert same_behavior == behaviors_equal_iff_used_parts_agree(
                ICO_SCEN, st_a, st_b
            )
