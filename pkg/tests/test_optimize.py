"""Restart/ascent maximizer and the tiny-instance grid oracle."""
from __future__ import annotations

import os

import numpy as np
import pytest

from identities import random_gp_policy, random_model, random_rln_model
from sdwtc.models import assemble_joint, build_rln_example, build_semideterministic, gp_policy
from sdwtc.optimize import (
    FUNCTIONALS,
    OptBudget,
    OptResult,
    cardinality_caps,
    evaluate_policy,
    exhaustive_small,
    maximize,
)
from sdwtc.prob import Channel, bernoulli
from sdwtc.rates import constraint_gap

RNG_SEED = 20240820


def _xor_model():
    kz = np.full((2, 2, 1), 1.0)
    ch = Channel((("X", (0, 1)), ("S", (0, 1))), (("Z", (0,)),), kz)
    return build_semideterministic(lambda x, s: x ^ s, ch, bernoulli(0.5))


# ---------------------------------------------------------------------------
# budget and argument validation


def test_budget_rejects_nonpositive_fields():
    with pytest.raises(ValueError):
        OptBudget(restarts=0)
    with pytest.raises(ValueError):
        OptBudget(iterations=0)
    with pytest.raises(ValueError):
        OptBudget(grid_step=0.0)


def test_unknown_functional_rejected():
    model = random_model(np.random.default_rng(RNG_SEED))
    with pytest.raises(ValueError):
        maximize("RB", model)


def test_cardinality_caps_formulas():
    model = random_model(np.random.default_rng(RNG_SEED), ns=2, nx=3)
    k = 2 * 3
    assert cardinality_caps(model) == (k + 5, k * k + 5 * k + 3)


def test_cardinality_cap_enforced():
    model = random_model(np.random.default_rng(RNG_SEED))
    cap_u, cap_v = cardinality_caps(model)
    with pytest.raises(ValueError):
        maximize("RA", model, card_u=cap_u + 1, budget=OptBudget(restarts=1, iterations=1))
    with pytest.raises(ValueError):
        maximize("RA", model, card_v=cap_v + 1, budget=OptBudget(restarts=1, iterations=1))


def test_functional_model_pairing_enforced():
    model = random_model(np.random.default_rng(RNG_SEED))
    rln = random_rln_model(np.random.default_rng(RNG_SEED + 1))
    with pytest.raises(TypeError):
        maximize("RLN", model, budget=OptBudget(restarts=1, iterations=1))
    with pytest.raises(TypeError):
        maximize("RA", rln, budget=OptBudget(restarts=1, iterations=1))


# ---------------------------------------------------------------------------
# determinism and result invariants


def test_seeded_determinism_bit_for_bit():
    model = random_model(np.random.default_rng(RNG_SEED + 2))
    budget = OptBudget(restarts=4, iterations=60, seed=17)
    a = maximize("RA", model, card_u=2, card_v=2, budget=budget)
    b = maximize("RA", model, card_u=2, card_v=2, budget=budget)
    assert a.value == b.value
    assert a.trace == b.trace
    assert a.evaluations == b.evaluations
    assert np.array_equal(a.policy.kernel.kernel, b.policy.kernel.kernel)


def test_different_seeds_differ():
    model = random_model(np.random.default_rng(RNG_SEED + 3))
    a = maximize("RA", model, card_v=2, budget=OptBudget(restarts=2, iterations=40, seed=0))
    b = maximize("RA", model, card_v=2, budget=OptBudget(restarts=2, iterations=40, seed=1))
    assert not np.array_equal(a.policy.kernel.kernel, b.policy.kernel.kernel)


def test_value_is_max_of_trace_and_reevaluates():
    rng = np.random.default_rng(RNG_SEED + 4)
    for functional, factory, cards in (
        ("RA", random_model, (2, 2)),
        ("CHV", random_model, (1, 2)),
        ("LN_encdec", random_model, (1, 1)),
    ):
        model = factory(rng)
        res = maximize(
            functional, model, *cards, budget=OptBudget(restarts=3, iterations=40, seed=5)
        )
        assert res.value == max(res.trace)
        again = evaluate_policy(functional, model, res.policy)
        assert res.value == pytest.approx(max(0.0, again), abs=1e-12)


def test_trace_values_clamped_nonnegative():
    model = random_model(np.random.default_rng(RNG_SEED + 5))
    res = maximize("CHV", model, card_v=2, budget=OptBudget(restarts=6, iterations=30, seed=2))
    assert all(v >= 0.0 for v in res.trace)


def test_value_monotone_in_iterations():
    model = random_model(np.random.default_rng(RNG_SEED + 6))
    values = [
        maximize(
            "RA", model, card_v=2, budget=OptBudget(restarts=2, iterations=it, seed=9)
        ).value
        for it in (5, 50, 200)
    ]
    assert values[0] <= values[1] + 1e-15
    assert values[1] <= values[2] + 1e-15


def test_threaded_restarts_match_serial():
    model = random_model(np.random.default_rng(RNG_SEED + 7))
    budget = OptBudget(restarts=6, iterations=30, seed=3)
    serial = maximize("RA", model, card_v=2, budget=budget)
    os.environ["SDWTC_WORKERS"] = "4"
    try:
        threaded = maximize("RA", model, card_v=2, budget=budget)
    finally:
        del os.environ["SDWTC_WORKERS"]
    assert serial.value == threaded.value
    assert serial.trace == threaded.trace
    assert np.array_equal(serial.policy.kernel.kernel, threaded.policy.kernel.kernel)


# ---------------------------------------------------------------------------
# search-space dominance and feasibility handling


def test_ra_dominates_chv_at_equal_budget():
    # with a singleton U the two searches walk the same trajectory, so the
    # containment of the policy spaces shows up as plain dominance
    rng = np.random.default_rng(RNG_SEED + 8)
    budget = OptBudget(restarts=4, iterations=60, seed=13)
    for _ in range(10):
        model = random_model(rng)
        ra = maximize("RA", model, card_u=1, card_v=2, budget=budget)
        chv = maximize("CHV", model, card_v=2, budget=budget)
        assert ra.value >= chv.value - 1e-9


def test_ra_alt_best_policy_is_feasible():
    rng = np.random.default_rng(RNG_SEED + 9)
    for _ in range(5):
        model = random_model(rng)
        res = maximize(
            "RA_alt", model, card_u=2, card_v=2, budget=OptBudget(restarts=4, iterations=40, seed=7)
        )
        assert res.value > -np.inf
        j = assemble_joint(model, res.policy)
        assert constraint_gap(j) >= -1e-10


def test_evaluate_policy_penalizes_infeasible_alt():
    model = random_model(np.random.default_rng(RNG_SEED + 10))
    ns, nx = len(model.s_symbols), len(model.x_symbols)
    k = np.zeros((ns, ns, 1, nx))
    for s in range(ns):
        k[s, s, 0, :] = 1.0 / nx
    policy = gp_policy(model.s_symbols, model.s_symbols, (0,), model.x_symbols, k)
    assert evaluate_policy("RA_alt", model, policy) == -np.inf
    assert np.isfinite(evaluate_policy("RA", model, policy))


def test_every_functional_runs_and_types_policies():
    rng = np.random.default_rng(RNG_SEED + 11)
    model = random_model(rng)
    rln = random_rln_model(rng)
    xor = _xor_model()
    budget = OptBudget(restarts=2, iterations=15, seed=1)
    by_model = {
        "RA": model, "RA_alt": model, "CHV": model, "CEG": model,
        "RLN": rln, "semidet": xor, "LN_encdec": model,
    }
    assert set(FUNCTIONALS) == set(by_model)
    for functional, m in by_model.items():
        res = maximize(functional, m, card_u=2, card_v=2, budget=budget)
        assert isinstance(res, OptResult)
        assert res.value >= 0.0
        assert np.isfinite(res.value)


# ---------------------------------------------------------------------------
# grid oracle


def test_grid_step_must_be_reciprocal_integer():
    model = _xor_model()
    with pytest.raises(ValueError):
        exhaustive_small("semidet", model, 0.3)


def test_grid_overflow_guard():
    model = random_model(np.random.default_rng(RNG_SEED + 12), ns=3, nx=3)
    with pytest.raises(ValueError, match="grid"):
        exhaustive_small("RA", model, 1.0 / 64.0, card_u=4, card_v=4)


def test_grid_xor_toy_exact_value():
    # uniform rows lie on the half-step grid; the optimum is exactly one bit
    assert exhaustive_small("semidet", _xor_model(), 0.5) == pytest.approx(1.0, abs=1e-12)


def test_grid_refinement_monotone():
    rng = np.random.default_rng(RNG_SEED + 13)
    for _ in range(5):
        model = random_model(rng)
        coarse = exhaustive_small("LN_encdec", model, 1.0 / 4.0)
        fine = exhaustive_small("LN_encdec", model, 1.0 / 8.0)
        assert fine >= coarse - 1e-12


def test_maximize_matches_grid_oracle_on_xor_toy():
    model = _xor_model()
    res = maximize("semidet", model, budget=OptBudget(restarts=8, iterations=120, seed=4))
    oracle = exhaustive_small("semidet", model, 1.0 / 64.0)
    assert abs(res.value - oracle) <= 1e-3
