import numpy as np
import pytest

from oracles import peel_fronts

from samoo.core import (
    Archive,
    Bounds,
    crowding_distance,
    differential_mutation,
    dominates,
    environmental_selection,
    latin_hypercube_sample,
    nondominated_sort,
    polynomial_mutation,
    rank_population,
    sbx_crossover,
)


class TestDominates:
    def test_strict_improvement(self):
        assert dominates((1, 2), (2, 3))

    def test_mutually_nondominated(self):
        assert not dominates((1, 2), (2, 1))
        assert not dominates((2, 1), (1, 2))

    def test_equality_never_dominates(self):
        assert not dominates((1, 1), (1, 1))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dominates((1, 2), (1, 2, 3))

    def test_irreflexive_and_transitive(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            a = rng.random(3)
            assert not dominates(a, a)
            b = a + rng.random(3)  # a dominates b
            c = b + rng.random(3)  # b dominates c
            if dominates(a, b) and dominates(b, c):
                assert dominates(a, c)


class TestNondominatedSort:
    def test_two_front_example(self):
        assert nondominated_sort([(1, 2), (2, 1), (2, 2)]) == [[0, 1], [2]]

    def test_single_point(self):
        assert nondominated_sort([(1, 1)]) == [[0]]

    def test_identical_points_share_front(self):
        assert nondominated_sort([(1, 1)] * 3) == [[0, 1, 2]]

    def test_empty_input(self):
        with pytest.raises(ValueError):
            nondominated_sort(np.empty((0, 2)))

    def test_matches_definition_scan(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = rng.integers(1, 30)
            m = rng.integers(2, 4)
            F = rng.random((n, m))
            assert nondominated_sort(F) == peel_fronts(F)

    def test_first_front_is_undominated(self):
        rng = np.random.default_rng(1)
        F = rng.random((60, 2))
        first = nondominated_sort(F)[0]
        for i in first:
            assert not any(dominates(F[j], F[i]) for j in range(60) if j != i)


class TestCrowdingDistance:
    def test_three_point_front(self):
        cd = crowding_distance([(0, 1), (0.5, 0.5), (1, 0)])
        assert cd[0] == np.inf and cd[2] == np.inf
        assert cd[1] == pytest.approx(2.0, abs=1e-12)

    def test_two_points_both_extreme(self):
        assert np.all(np.isinf(crowding_distance([(0, 1), (1, 0)])))

    def test_four_point_front_interiors(self):
        cd = crowding_distance([(0, 1), (0.25, 0.75), (0.75, 0.25), (1, 0)])
        assert cd[1] == pytest.approx(1.5, abs=1e-12)
        assert cd[2] == pytest.approx(1.5, abs=1e-12)

    def test_empty(self):
        assert crowding_distance(np.empty((0, 2))).size == 0

    def test_flat_objective_contributes_nothing(self):
        cd = crowding_distance([(0, 1, 5), (0.5, 0.5, 5), (1, 0, 5)])
        assert cd[1] == pytest.approx(2.0, abs=1e-12)


class TestEnvironmentalSelection:
    def test_whole_front_fits(self):
        sel = environmental_selection([(1, 2), (2, 1), (2, 2)], 2)
        assert sorted(sel.tolist()) == [0, 1]

    def test_more_room_than_candidates(self):
        sel = environmental_selection([(1, 2), (2, 1)], 10)
        assert sorted(sel.tolist()) == [0, 1]

    def test_crowding_tie_break_keeps_extremes(self):
        sel = environmental_selection([(0, 1), (0.5, 0.5), (1, 0)], 2)
        assert sorted(sel.tolist()) == [0, 2]

    def test_permutation_invariant_multiset(self):
        # Invariance holds up to the input-order tie-break, so compare the
        # multisets of (front level, crowding) scores rather than raw rows:
        # equal-scored members may swap identity, nothing else may change.
        rng = np.random.default_rng(3)
        F = rng.random((25, 2))
        perm = rng.permutation(25)

        def selected_scores(objectives):
            ranked = rank_population(objectives)
            chosen = environmental_selection(objectives, 10)
            return sorted(
                (int(ranked.front_index[i]), round(float(ranked.crowding[i]), 12))
                for i in chosen
            )

        assert selected_scores(F) == selected_scores(F[perm])

    def test_exact_count(self):
        rng = np.random.default_rng(4)
        F = rng.random((30, 3))
        for k in (1, 7, 30, 50):
            assert environmental_selection(F, k).size == min(k, 30)


class TestRankPopulation:
    def test_levels_and_crowding_align(self):
        F = np.array([(1, 2), (2, 1), (2, 2), (3, 3)])
        ranked = rank_population(F)
        assert ranked.front_index.tolist() == [1, 1, 2, 3]
        assert np.isinf(ranked.crowding[0])


class TestLatinHypercube:
    def test_one_sample_per_stratum(self):
        rng = np.random.default_rng(0)
        bounds = Bounds.uniform(3, -2.0, 6.0)
        for n in (1, 4, 17):
            X = latin_hypercube_sample(n, bounds, rng)
            u = bounds.normalize(X)
            for j in range(3):
                strata = np.floor(u[:, j] * n).astype(int)
                assert sorted(strata.tolist()) == list(range(n))

    def test_single_point_inside_bounds(self):
        bounds = Bounds.uniform(5, 0.0, 1.0)
        x = latin_hypercube_sample(1, bounds, np.random.default_rng(1))[0]
        assert bounds.contains(x)

    def test_seed_determinism(self):
        bounds = Bounds.unit(4)
        a = latin_hypercube_sample(8, bounds, np.random.default_rng(42))
        b = latin_hypercube_sample(8, bounds, np.random.default_rng(42))
        assert np.array_equal(a, b)


class TestSbxCrossover:
    def test_equal_parents_unchanged(self):
        bounds = Bounds.unit(6)
        p = np.random.default_rng(0).random(6)
        c1, c2 = sbx_crossover(p, p, 20.0, 1.0, bounds, np.random.default_rng(1))
        assert np.allclose(c1, p, atol=1e-12)
        assert np.allclose(c2, p, atol=1e-12)

    def test_zero_probability_identity(self):
        bounds = Bounds.unit(6)
        rng = np.random.default_rng(2)
        p1, p2 = rng.random(6), rng.random(6)
        c1, c2 = sbx_crossover(p1, p2, 20.0, 0.0, bounds, rng)
        assert np.array_equal(c1, p1) and np.array_equal(c2, p2)

    def test_mean_preservation_unclipped(self):
        bounds = Bounds.uniform(8, -1e6, 1e6)  # wide: nothing clips
        for seed in range(20):
            rng = np.random.default_rng(seed)
            p1, p2 = rng.random(8), rng.random(8)
            c1, c2 = sbx_crossover(p1, p2, 15.0, 1.0, bounds, rng)
            assert np.all(np.abs((c1 + c2) / 2 - (p1 + p2) / 2) < 1e-12)


class TestPolynomialMutation:
    def test_zero_probability_identity(self):
        bounds = Bounds.unit(5)
        x = np.random.default_rng(0).random(5)
        assert np.array_equal(polynomial_mutation(x, 20.0, 0.0, bounds, np.random.default_rng(1)), x)

    def test_huge_eta_barely_moves(self):
        bounds = Bounds.unit(5)
        rng = np.random.default_rng(3)
        x = rng.random(5)
        y = polynomial_mutation(x, 1e9, 1.0, bounds, rng)
        assert np.all(np.abs(y - x) < 1e-3)

    def test_bounds_fuzz(self):
        bounds = Bounds(np.array([-1.0, 0.0, 2.0]), np.array([1.0, 0.5, 9.0]))
        rng = np.random.default_rng(5)
        for _ in range(5000):
            x = bounds.denormalize(rng.random(3))
            y = polynomial_mutation(x, 20.0, 0.9, bounds, rng)
            assert bounds.contains(y)
            c1, c2 = sbx_crossover(x, bounds.denormalize(rng.random(3)), 20.0, 1.0, bounds, rng)
            assert bounds.contains(c1) and bounds.contains(c2)


class TestDifferentialMutation:
    def test_equal_tail_donors(self):
        v = differential_mutation((0.2, 0.4), (1.0, 1.0), (1.0, 1.0), 0.7)
        assert np.allclose(v, (0.2, 0.4))

    def test_zero_weight(self):
        v = differential_mutation((0.2, 0.4), (1.0, 1.0), (0.0, 0.0), 0.0)
        assert np.allclose(v, (0.2, 0.4))

    def test_direct_arithmetic(self):
        v = differential_mutation((0, 0), (1, 1), (0, 0), 0.5)
        assert np.allclose(v, (0.5, 0.5))


class TestArchive:
    def test_rejects_duplicates(self):
        archive = Archive()
        archive.add([0.5, 0.5], [1.0, 2.0])
        with pytest.raises(ValueError):
            archive.add([0.5, 0.5 + 1e-13], [1.0, 2.0])

    def test_fe_index_increases(self):
        archive = Archive()
        for k in range(5):
            s = archive.add([float(k), 0.0], [float(k), 1.0])
            assert s.fe_index == k + 1
        assert len(archive) == 5

    def test_front_indices(self):
        archive = Archive()
        archive.add([0.0, 0.0], [1.0, 2.0])
        archive.add([1.0, 0.0], [2.0, 1.0])
        archive.add([2.0, 0.0], [2.0, 2.0])
        assert archive.front_indices() == [0, 1]


class TestBounds:
    def test_validation(self):
        with pytest.raises(ValueError):
            Bounds(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            Bounds(np.array([0.0]), np.array([1.0, 2.0]))

    def test_round_trip(self):
        bounds = Bounds(np.array([-3.0, 2.0]), np.array([5.0, 4.0]))
        x = np.array([1.0, 3.0])
        assert np.allclose(bounds.denormalize(bounds.normalize(x)), x)
