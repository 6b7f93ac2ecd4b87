import numpy as np
import pytest

from pbsgame.egta import (
    AlphaRankResult,
    HeuristicPayoffTable,
    HptRow,
    alpharank,
    estimate_hpt,
    fixation_probability,
    intensity_sweep,
    path_fixation_probability,
    stationary_distribution,
)
from pbsgame.errors import ConfigError
from pbsgame.simulation import SimConfig


def full_table(m, u_building, u_sharing):
    """Payoff table with the same per-role payoffs in every mixed profile."""
    rows = [HptRow(0, m, None, 0.0, 1)]
    rows += [HptRow(k, m - k, u_building, u_sharing, 1) for k in range(1, m)]
    rows.append(HptRow(m, 0, u_building, None, 1))
    return HeuristicPayoffTable(m=m, rows=tuple(rows))


def test_fixation_neutral_drift():
    assert fixation_probability(0.0, 5.0, 10) == pytest.approx(0.1)


def test_fixation_monotone_and_bounded():
    rhos = [fixation_probability(d, 1.0, 10) for d in np.linspace(-2, 2, 41)]
    assert all(0 < r <= 1 for r in rhos)
    assert all(r2 >= r1 for r1, r2 in zip(rhos, rhos[1:]))


def test_fixation_limits():
    assert fixation_probability(1.0, 100.0, 10) == pytest.approx(1.0, abs=1e-12)
    assert fixation_probability(-1.0, 100.0, 10) < 1e-30


def test_fixation_extreme_intensity_is_finite():
    assert fixation_probability(-10.0, 100.0, 10) >= 0.0
    assert path_fixation_probability([-10.0] * 9, 100.0) >= 0.0


def test_path_fixation_reduces_to_constant_gap_formula():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = int(rng.integers(2, 12))
        delta = float(rng.normal(0, 0.5))
        alpha = float(rng.uniform(0.1, 50))
        closed = fixation_probability(delta, alpha, m)
        path = path_fixation_probability([delta] * (m - 1), alpha)
        assert path == pytest.approx(closed, rel=1e-10)


def test_neutral_drift_transition_matrix():
    hpt = full_table(10, 0.3, 0.3)
    result = alpharank(hpt, 1.0)
    assert result.transition[0, 1] == pytest.approx(0.1)
    assert result.transition[1, 0] == pytest.approx(0.1)
    assert np.allclose(result.stationary, [0.5, 0.5], atol=1e-12)


def test_dominant_strategy_takes_all_mass_at_high_intensity():
    hpt = full_table(10, 0.5, 0.2)
    result = alpharank(hpt, 100.0)
    assert result.nu_building > 0.999
    masses = [r.nu_building for r in intensity_sweep(hpt, [0.5, 1, 5, 20, 100])]
    assert all(m2 >= m1 - 1e-12 for m1, m2 in zip(masses, masses[1:]))


def test_stationary_matches_power_iteration_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        hpt = full_table(10, float(rng.uniform(0, 0.5)), float(rng.uniform(0, 0.5)))
        result = alpharank(hpt, 1.0)
        # independent oracle: brute-force power iteration on the transition matrix
        nu = np.array([0.5, 0.5])
        for _ in range(200_000):
            nxt = nu @ result.transition
            if np.abs(nxt - nu).max() < 1e-15:
                nu = nxt
                break
            nu = nxt
        nu = nu / nu.sum()
        assert np.abs(result.stationary - nu).max() < 1e-10


def test_rows_are_stochastic_and_stationary_is_fixed_point():
    rng = np.random.default_rng(4)
    for _ in range(20):
        hpt = full_table(6, float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
        result = alpharank(hpt, float(rng.uniform(0.1, 50)))
        assert np.allclose(result.transition.sum(axis=1), 1.0, atol=1e-12)
        assert np.abs(result.stationary @ result.transition - result.stationary).max() < 1e-10
        assert result.stationary.min() >= 0
        assert result.stationary.sum() == pytest.approx(1.0)


def test_payoff_scaling_equals_intensity_scaling():
    rng = np.random.default_rng(5)
    for _ in range(20):
        ub, us = float(rng.uniform(0, 1)), float(rng.uniform(0, 1))
        c = float(rng.uniform(0.1, 10))
        scaled_payoffs = alpharank(full_table(10, c * ub, c * us), 2.0)
        scaled_intensity = alpharank(full_table(10, ub, us), 2.0 * c)
        assert np.abs(scaled_payoffs.stationary - scaled_intensity.stationary).max() < 1e-9


def test_intensity_sweep_shape():
    hpt = full_table(10, 0.4, 0.4)
    alphas = list(np.geomspace(0.1, 100, 7))
    results = intensity_sweep(hpt, alphas)
    assert len(results) == len(alphas)
    assert all(isinstance(r, AlphaRankResult) for r in results)
    assert all(np.allclose(r.stationary, [0.5, 0.5], atol=1e-10) for r in results)


def test_alpharank_requires_complete_mixed_rows():
    rows = (
        HptRow(0, 10, None, 0.0, 1),
        HptRow(1, 9, 0.5, 0.2, 1),
        HptRow(9, 1, 0.5, 0.2, 1),
        HptRow(10, 0, 0.5, None, 1),
    )
    hpt = HeuristicPayoffTable(m=10, rows=rows)
    with pytest.raises(ConfigError):
        alpharank(hpt, 1.0)


def test_alpharank_rejects_bad_intensity():
    with pytest.raises(ConfigError):
        alpharank(full_table(4, 0.1, 0.1), 0.0)


def test_hpt_validation():
    with pytest.raises(ConfigError):
        HeuristicPayoffTable(m=4, rows=(HptRow(1, 2, 0.1, 0.1, 1),))
    table = full_table(4, 0.1, 0.2)
    with pytest.raises(ConfigError):
        table.row(9)


def test_stationary_distribution_direct():
    transition = np.array([[0.9, 0.1], [0.3, 0.7]])
    nu = stationary_distribution(transition)
    assert np.allclose(nu, [0.75, 0.25], atol=1e-10)


def tiny_template(p_c=0.5):
    return SimConfig(n_builders=1, n_searchers=1, rounds=40, p_c=p_c, seed=3)


def test_estimate_hpt_enumerates_all_profiles():
    hpt = estimate_hpt(2, tiny_template(), reps=2)
    assert [(r.n_building, r.n_sharing) for r in hpt.rows] == [(0, 2), (1, 1), (2, 0)]
    assert all(r.samples == 2 for r in hpt.rows)


def test_estimate_hpt_zero_adopters_absent_and_no_builders_zero():
    hpt = estimate_hpt(2, tiny_template(), reps=2)
    no_builders = hpt.row(0)
    assert no_builders.u_building is None
    assert no_builders.u_sharing == 0.0  # nothing lands on chain without builders
    all_builders = hpt.row(2)
    assert all_builders.u_sharing is None
    assert all_builders.u_building is not None


def test_estimate_hpt_deterministic_across_jobs():
    a = estimate_hpt(3, tiny_template(), reps=2, jobs=1)
    b = estimate_hpt(3, tiny_template(), reps=2, jobs=2)
    assert a == b


def test_estimate_hpt_validation():
    with pytest.raises(ConfigError):
        estimate_hpt(1, tiny_template(), reps=1)
    with pytest.raises(ConfigError):
        estimate_hpt(4, tiny_template(), reps=0)
    with pytest.raises(ConfigError):
        estimate_hpt(4, tiny_template(), reps=1, profiles=[7])
