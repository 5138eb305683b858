import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hub_params, random_null_params
from hubnet.identifiability import (
    EnumerationLimitError,
    all_outcomes,
    check_asymmetric,
    check_conditions,
    check_null_component,
    distributions_distinct,
    outcome_distribution,
)
from hubnet.model import HubParams, InvalidInputError, NullHubParams
from hubnet.simulate import SimDesign, generate_params


def by_name(report):
    return {c.name: c for c in report.conditions}


def perturb(params, rng, scale=0.05, min_step=1e-3):
    """Random valid neighbour at L-infinity distance at least ``min_step``."""
    offset = params.variant.offset
    n_L = params.n_L
    A = params.A.copy()
    free = np.ones_like(A, dtype=bool)
    free[np.arange(offset, offset + n_L), np.arange(n_L)] = False
    A[free] = np.clip(A[free] + rng.uniform(-scale, scale, free.sum()), 0.0, 0.999)
    rho = params.rho * np.exp(rng.uniform(-scale, scale, params.rho.size))
    rho /= rho.sum()
    if max(np.abs(A - params.A).max(), np.abs(rho - params.rho).max()) < min_step:
        r, c = np.argwhere(free)[rng.integers(free.sum())]
        A[r, c] = params.A[r, c] + (min_step if params.A[r, c] < 0.5 else -min_step)
    return type(params)(rho, A)


# -- condition checkers ----------------------------------------------------------------------

def test_small_asymmetric_example_passes():
    report = check_asymmetric(HubParams([0.4, 0.6], [[1, 0.5, 0.2], [0.5, 1, 0.7]]))
    assert report.passed
    sep = by_name(report)["leader_pairs_separated"]
    assert sep.witnesses == [{"pair": [1, 2], "follower": 3, "gap": pytest.approx(0.5)}]


def test_identical_rows_fail_separation():
    A = np.array([[1, 0.3, 0.4, 0.2], [0.3, 1, 0.4, 0.2]])
    report = check_asymmetric(HubParams([0.5, 0.5], A))
    cond = by_name(report)
    assert not report.passed
    assert not cond["leader_pairs_separated"].passed
    assert cond["leader_pairs_separated"].witnesses == [{"pair": [1, 2]}]
    assert cond["rho_interior"].passed and cond["off_diagonal_below_one"].passed


def test_rho_and_off_diagonal_violations():
    report = check_asymmetric(HubParams([1.0, 0.0], [[1, 1.0, 0.2], [0.5, 1, 0.7]]))
    cond = by_name(report)
    assert [w["label"] for w in cond["rho_interior"].witnesses] == [1, 2]
    assert cond["off_diagonal_below_one"].witnesses == [{"row": 1, "node": 2, "value": 1.0}]


def test_simulated_designs_pass():
    for variant in ("asymmetric", "null"):
        for seed in range(5):
            p = generate_params(SimDesign(n_L=10, n=100, T=1, variant=variant, seed=seed))
            assert check_conditions(p).passed


def test_null_design_witnesses_are_in_block_followers():
    p = generate_params(SimDesign(n_L=10, n=100, T=1, variant="null", seed=0))
    cond = by_name(check_null_component(p))["leaders_differ_from_null"]
    assert cond.passed
    for w in cond.witnesses:
        lo = 10 + 9 * (w["leader"] - 1) + 1
        assert all(lo <= k < lo + 9 for k in w["followers"])


def test_null_small_example():
    report = check_null_component(NullHubParams([0.3, 0.7], [[0.1, 0.1, 0.1], [1, 0.5, 0.5]]))
    assert report.passed
    assert by_name(report)["leaders_differ_from_null"].witnesses == [{"leader": 1, "followers": [2, 3]}]


def test_null_row_equal_to_hub_row_fails():
    A = [[0.2, 0.3, 0.4], [1, 0.3, 0.4]]
    report = check_null_component(NullHubParams([0.5, 0.5], A))
    cond = by_name(report)["leaders_differ_from_null"]
    assert not cond.passed and cond.witnesses == [{"leader": 1, "followers": []}]


def test_null_row_differs_on_only_one_follower_fails():
    A = [[0.2, 0.3, 0.4], [1, 0.3, 0.9]]
    cond = by_name(check_null_component(NullHubParams([0.5, 0.5], A)))["leaders_differ_from_null"]
    assert not cond.passed and cond.witnesses == [{"leader": 1, "followers": [3]}]


def test_report_serialises():
    d = check_conditions(HubParams([0.4, 0.6], [[1, 0.5, 0.2], [0.5, 1, 0.7]])).to_dict()
    assert d["passed"] is True and d["check"] == "asymmetric" and len(d["conditions"]) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(1e-12, 1e-1), st.booleans())
def test_checker_is_monotone_in_tol(seed, tol, null):
    rng = np.random.default_rng(seed)
    p = random_null_params(rng, 5, 2) if null else random_hub_params(rng, 5, 2)
    # snap a few entries onto a grid so that ties with tol actually occur
    A = p.A.copy()
    A[:, 2:] = np.round(A[:, 2:], 1)
    p = type(p)(p.rho, A)
    if check_conditions(p, tol).passed:
        for smaller in (tol / 10, tol / 1000, 0.0):
            assert check_conditions(p, smaller).passed


# -- enumeration oracle ------------------------------------------------------------------------

def test_all_outcomes_enumerates_every_vector():
    out = all_outcomes(3)
    assert out.shape == (8, 3)
    assert {tuple(r) for r in out} == set(itertools.product([0, 1], repeat=3))


def test_single_hub_distribution():
    outcomes, probs = outcome_distribution(HubParams([1.0], [[1, 0.5]]))
    table = {tuple(o): p for o, p in zip(outcomes, probs)}
    assert table == {(0, 0): 0.0, (1, 0): 0.5, (0, 1): 0.0, (1, 1): 0.5}


def test_pure_null_distribution_is_uniform():
    _, probs = outcome_distribution(NullHubParams([1.0, 0.0], [[0.5, 0.5], [1, 0.3]]))
    np.testing.assert_allclose(probs, 0.25)


@pytest.mark.parametrize("null", [False, True])
def test_oracle_mass_is_one(rng, null):
    for _ in range(20):
        n = int(rng.integers(2, 11))
        n_L = int(rng.integers(1, n))
        p = random_null_params(rng, n, n_L) if null else random_hub_params(rng, n, n_L)
        _, probs = outcome_distribution(p)
        assert abs(probs.sum() - 1.0) <= 1e-10
        assert (probs >= 0).all()


def test_enumeration_cap():
    p = HubParams([1.0], np.r_[1.0, np.full(14, 0.5)][None, :])
    with pytest.raises(EnumerationLimitError, match="2\\^15"):
        outcome_distribution(p)
    _, probs = outcome_distribution(p, cap=15)
    assert probs.size == 2 ** 15


def test_identical_params_are_not_distinct(rng):
    p = random_hub_params(rng, 5, 2)
    distinct, gap, _ = distributions_distinct(p, p)
    assert not distinct and gap == 0.0


def test_perturbed_rho_is_distinct():
    p1 = HubParams([0.4, 0.6], [[1, 0.5, 0.2], [0.5, 1, 0.7]])
    rho = np.array([0.5, 0.6])
    p2 = HubParams(rho / rho.sum(), p1.A)
    distinct, gap, outcome = distributions_distinct(p1, p2)
    assert distinct and gap > 1e-3
    _, q1 = outcome_distribution(p1)
    _, q2 = outcome_distribution(p2)
    b = int(np.flatnonzero((all_outcomes(3) == outcome).all(axis=1))[0])
    assert abs(q1[b] - q2[b]) == pytest.approx(gap)


def test_two_node_hub_only_model_is_not_identifiable():
    # With every node a leader there are no followers to separate them; the
    # three outcome probabilities give three equations in three unknowns but
    # a one-parameter family of solutions.  Fix one rho and solve for A.
    p1 = HubParams([0.5, 0.5], [[1, 0.4], [0.6, 1]])
    _, q = outcome_distribution(p1)
    only1, only2 = q[1], q[2]
    for r in (0.45, 0.6, 0.7):
        p2 = HubParams([r, 1 - r], [[1, 1 - only1 / r], [1 - only2 / (1 - r), 1]])
        assert np.abs(p2.A - p1.A).max() > 1e-2
        distinct, gap, _ = distributions_distinct(p1, p2)
        assert not distinct, gap
        assert not check_asymmetric(p2).passed


def test_distinct_rejects_mismatched_shapes():
    with pytest.raises(InvalidInputError):
        distributions_distinct(HubParams([1.0], [[1, 0.5]]), HubParams([1.0], [[1, 0.5, 0.5]]))
    with pytest.raises(InvalidInputError):
        distributions_distinct(HubParams([1.0], [[1, 0.5]]),
                               NullHubParams([0.5, 0.5], [[0.1, 0.1], [1, 0.5]]))


@pytest.mark.parametrize("null", [False, True])
def test_checker_sound_against_oracle(rng, null):
    checked = 0
    while checked < 10:
        n = int(rng.integers(4, 9))
        n_L = int(rng.integers(1, n // 2 + 1))
        p = random_null_params(rng, n, n_L) if null else random_hub_params(rng, n, n_L)
        if not check_conditions(p, 1e-4).passed:
            continue
        checked += 1
        for _ in range(10):
            distinct, _, _ = distributions_distinct(p, perturb(p, rng))
            assert distinct
