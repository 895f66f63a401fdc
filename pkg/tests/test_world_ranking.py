from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breakthroughs.citation_model import (
    CitationModelParams,
    fit_two_point,
    top_fraction_probability,
)
from breakthroughs.errors import DomainError, EmptyInputError
from breakthroughs.world_ranking import membership_proportion, top_set_threshold

from . import oracles


def sort_and_cut(world, level):
    """Threshold by walking the descending list with a running count."""
    ranked = sorted(world, reverse=True)
    quota = Fraction(repr(level)) * len(world)
    for c in sorted(set(world)):
        above = sum(1 for v in ranked if v > c)
        if above <= quota:
            return c, above


class TestTopSetThreshold:
    def test_no_ties(self):
        c, strict, quota = top_set_threshold([5, 4, 3, 2, 1], 0.4)
        assert (c, strict, quota) == (3, 2, 0)

    def test_all_tied(self):
        c, strict, quota = top_set_threshold([3, 3, 3, 3], 0.25)
        assert (c, strict) == (3, 0)
        assert quota == 1.0

    def test_geometric_world(self):
        rng = np.random.default_rng(11)
        world = rng.geometric(0.2, size=1000).tolist()
        c, strict, quota = top_set_threshold(world, 0.1)
        assert (c, strict) == sort_and_cut(world, 0.1)
        assert 0 <= quota <= world.count(c)

    @pytest.mark.parametrize("level", [0.0, 1.0, 1.2])
    def test_domain(self, level):
        with pytest.raises(DomainError):
            top_set_threshold([1, 2, 3], level)

    def test_empty_world(self):
        with pytest.raises(EmptyInputError):
            top_set_threshold([], 0.1)

    def test_negative_citations(self):
        with pytest.raises(DomainError):
            top_set_threshold([1, -2, 3], 0.1)

    @given(st.lists(st.integers(0, 30), min_size=1, max_size=200), st.floats(0.001, 0.999))
    def test_against_sort_and_cut(self, world, level):
        c, strict, quota = top_set_threshold(world, level)
        assert (c, strict) == sort_and_cut(world, level)
        assert 0 <= quota <= world.count(c)


class TestMembershipProportion:
    @pytest.mark.parametrize("level", [0.5, 0.1, 0.01, 0.37])
    def test_self_membership(self, level):
        rng = np.random.default_rng(3)
        world = rng.poisson(4, size=777)
        obs = membership_proportion(world, range(world.size), level)
        assert obs.level == level
        assert obs.proportion == pytest.approx(level, abs=1e-12)

    def test_one_of_two_in_top(self):
        world = [9, 8, 7, 6, 5, 4, 3, 2, 1, 0]
        obs = membership_proportion(world, {0, 9}, 0.2)
        assert obs.proportion == 0.5

    def test_random_against_enumeration(self):
        rng = np.random.default_rng(5)
        world = rng.poisson(6, size=500).tolist()
        subset = rng.choice(500, size=50, replace=False).tolist()
        for level in (0.5, 0.1, 0.01):
            got = membership_proportion(world, subset, level).proportion
            assert got == oracles.recount_membership(world, subset, level)

    def test_empty_subset(self):
        with pytest.raises(EmptyInputError):
            membership_proportion([1, 2, 3], [], 0.5)

    def test_bad_position(self):
        with pytest.raises(DomainError):
            membership_proportion([1, 2, 3], [3], 0.5)

    @settings(max_examples=100)
    @given(
        st.lists(st.integers(0, 20), min_size=2, max_size=150),
        st.data(),
    )
    def test_monotone_in_level(self, world, data):
        subset = data.draw(st.sets(st.integers(0, len(world) - 1), min_size=1))
        levels = sorted(data.draw(st.lists(st.floats(0.01, 0.99), min_size=2, max_size=5)))
        props = [membership_proportion(world, subset, x).proportion for x in levels]
        assert all(a <= b + 1e-15 for a, b in zip(props, props[1:]))

    @settings(max_examples=100)
    @given(st.lists(st.integers(0, 20), min_size=2, max_size=150), st.data())
    def test_permutation_invariance(self, world, data):
        subset = data.draw(st.sets(st.integers(0, len(world) - 1), min_size=1))
        level = data.draw(st.floats(0.01, 0.99))
        perm = data.draw(st.permutations(range(len(world))))
        shuffled = [world[i] for i in perm]
        where = {old: new for new, old in enumerate(perm)}
        a = membership_proportion(world, subset, level).proportion
        b = membership_proportion(shuffled, {where[i] for i in subset}, level).proportion
        assert a == b


def _to_counts(z):
    # Monotone map from z-space to integer citations; harness only.
    return np.rint((z + 10.0) * 1e6).astype(np.int64)


def test_pipeline_coherence():
    truth = CitationModelParams(0.4, 1.2)
    medians = []
    for n_world in (100_000, 1_000_000):
        n_inst = n_world // 100
        errs = []
        for seed in range(5):
            rng = np.random.default_rng([n_world, seed])
            z = np.concatenate(
                [rng.standard_normal(n_world), truth.m + truth.s * rng.standard_normal(n_inst)]
            )
            world = _to_counts(z)
            subset = range(n_world, n_world + n_inst)
            fitted = fit_two_point(
                membership_proportion(world, subset, 0.10),
                membership_proportion(world, subset, 0.01),
            )
            errs.append(max(abs(fitted.m - truth.m), abs(fitted.s - truth.s)))
        medians.append(float(np.median(errs)))
    assert medians[1] < medians[0]
    assert medians[1] < 0.05


def test_membership_converges_to_model():
    truth = CitationModelParams(0.3, 1.1)
    rng = np.random.default_rng(99)
    n_world, n_inst = 2_000_000, 200_000
    world_z = rng.standard_normal(n_world)
    inst_z = truth.m + truth.s * rng.standard_normal(n_inst)
    # Institution papers are ranked against the world but do not join it.
    world = _to_counts(world_z)
    for level in (0.1, 0.01):
        cut = top_set_threshold(world, level).threshold_citations
        share = np.count_nonzero(_to_counts(inst_z) > cut) / n_inst
        expected = top_fraction_probability(truth, level)
        se = np.sqrt(expected * (1 - expected) / n_inst) + np.sqrt(level * (1 - level) / n_world)
        assert abs(share - expected) <= 4 * se
