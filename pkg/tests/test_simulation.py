import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from reductive.errors import ReductionError
from reductive.linalg import Subspace
from reductive.models import BasisKind
from reductive.simulation import (
    PRESETS,
    SimConfig,
    StudySpec,
    SweepSpec,
    delta_sir_gap,
    generate,
    ols_oracles,
    population_moments,
    preset_study,
    rng_for,
    run_study,
)
from reductive.simulation.oracles import mean_within_slice_variance
from reductive.simulation.study import summarize
from reductive.simulation.tasks import ReplicateOutcome, run_replicate


def _sample_cov(data):
    Xc = data.centered()
    return Xc.T @ Xc / data.n


def test_streams_are_addressed_by_position():
    a = rng_for(7, 1, 2, 0).standard_normal(5)
    assert_array_equal(a, rng_for(7, 1, 2, 0).standard_normal(5))
    assert not np.allclose(a, rng_for(7, 1, 3, 0).standard_normal(5))
    assert not np.allclose(a, rng_for(7, 1, 2, 1).standard_normal(5))
    assert not np.allclose(a, rng_for(8, 1, 2, 0).standard_normal(5))


def test_generate_is_deterministic():
    cfg = SimConfig(model="m12", n=30, sigma_0=2.0)
    first, again = generate(cfg, 3, 1), generate(cfg, 3, 1)
    assert_array_equal(first.X, again.X)
    assert_array_equal(first.y, again.y)
    assert first.X.shape == (30, 10)
    assert not np.array_equal(first.X, generate(cfg, 4, 1).X)


def test_noise_free_m7_lies_on_gamma():
    cfg = SimConfig(model="m7", n=50, sigma=1e-9)
    data = generate(cfg, 0)
    assert_allclose(data.X, np.outer(data.y, np.eye(10)[:, 0]), atol=1e-7)


@pytest.mark.parametrize(
    "cfg",
    [
        SimConfig(model="m12", n=50_000, sigma=0.5, sigma_0=1.5, sigma_y=2.0),
        SimConfig(model="m19", n=50_000),
        SimConfig(model="m19-exactfit", n=50_000, sigma_y=2.0, k=0),
    ],
    ids=["m12", "m19", "exactfit"],
)
def test_sample_covariance_matches_population(cfg):
    pop = population_moments(cfg)
    S = _sample_cov(generate(cfg, 0))
    assert np.linalg.norm(S - pop.sigma, 2) / np.linalg.norm(pop.sigma, 2) < 0.05


def test_m12_population_eigenvalues():
    pop = population_moments(SimConfig(model="m12", n=10))
    assert_allclose(np.linalg.eigvalsh(pop.sigma)[::-1], [2.0] + [1.0] * 9, atol=1e-12)
    balanced = population_moments(SimConfig(model="m12", n=10, sigma_0=np.sqrt(2.0)))
    assert_allclose(balanced.sigma, 2.0 * np.eye(10), atol=1e-12)
    assert_allclose(pop.sigma_fit + pop.sigma_res, pop.sigma)


def test_exactfit_marginal_covariance_is_isotropic():
    cfg = SimConfig(model="m19-exactfit", n=10, sigma_y=15.0, k=2)
    pop = population_moments(cfg)
    assert cfg.exactfit_c == pytest.approx(1.001)
    assert_allclose(pop.sigma, cfg.exactfit_c * 225.0 * np.eye(10), atol=1e-9)
    # the reductive subspace is span(Delta^{-1} Gamma), here equal to span(Gamma)
    assert pop.true_subspace == Subspace.from_matrix(cfg.gamma_vector())


def test_m19_truth_is_delta_inverse_gamma():
    cfg = SimConfig(model="m19", n=10)
    pop = population_moments(cfg)
    expected = Subspace.from_matrix(np.linalg.solve(pop.sigma_res, cfg.gamma_vector()))
    assert pop.true_subspace == expected
    assert pop.true_subspace != Subspace.from_matrix(cfg.gamma_vector())


def test_population_needs_linear_basis():
    with pytest.raises(ReductionError):
        population_moments(SimConfig(model="m7", n=10), BasisKind.slices(4))


def test_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(model="m19-exactfit", n=50, c=1.0)
    with pytest.raises(ValidationError):
        SimConfig(model="m19-exactfit", n=50)
    with pytest.raises(ValidationError):
        SimConfig(model="m7", n=50, estimators=["lasso"])
    with pytest.raises(ValidationError):
        SimConfig(model="m7", n=50, gamma=[1.0, 1.0] + [0.0] * 8)
    with pytest.raises(ValidationError):
        SweepSpec(param="n", values=[10.5])


def test_ols_oracles_at_unit_scales():
    cfg = SimConfig(model="m7", n=10, gamma=[1.0 / np.sqrt(10)] * 10)
    alpha, var_alpha, rho = ols_oracles(cfg)
    g = cfg.gamma_vector()
    assert_allclose(alpha, 0.5 * g)
    assert float(alpha @ np.linalg.solve(var_alpha, alpha)) == pytest.approx(1.0)
    assert_allclose(np.diag(rho), 1.0)

    _, _, rho_e1 = ols_oracles(SimConfig(model="m7", n=10))
    assert_allclose(rho_e1 - np.eye(10), 0.0)
    with pytest.raises(ReductionError):
        ols_oracles(SimConfig(model="m12", n=10))


@pytest.mark.slow
def test_ols_variance_oracle_by_monte_carlo():
    cfg = SimConfig(model="m7", n=2000, sigma_y=1.5)
    alpha, var_alpha, _ = ols_oracles(cfg)
    draws = []
    for rep in range(400):
        data = generate(cfg, rep)
        design = np.column_stack([np.ones(cfg.n), data.X])
        coef = np.linalg.lstsq(design, data.y, rcond=None)[0]
        draws.append(np.sqrt(cfg.n) * (coef[1:] - alpha))
    empirical = np.cov(np.asarray(draws), rowvar=False)
    assert np.trace(empirical) == pytest.approx(np.trace(var_alpha), rel=0.1)


def test_within_slice_variance():
    assert mean_within_slice_variance(2.0, 1) == pytest.approx(4.0)
    values = [mean_within_slice_variance(1.0, h) for h in (2, 4, 8, 16)]
    assert np.all(np.diff(values) < 0.0)
    # two halves of a standard normal: 1 - 2 / pi
    assert values[0] == pytest.approx(1.0 - 2.0 / np.pi)


def test_within_slice_variance_by_monte_carlo(rng):
    y = 15.0 * rng.standard_normal(2_000_000)
    cuts = np.quantile(y, np.linspace(0.0, 1.0, 9)[1:-1])
    labels = np.searchsorted(cuts, y)
    empirical = np.mean([y[labels == k].var() for k in range(8)])
    assert mean_within_slice_variance(15.0, 8) == pytest.approx(empirical, rel=0.01)


def test_delta_sir_gap():
    cfg = SimConfig(model="m19", n=50, sigma_y=15.0)
    g = cfg.gamma_vector()
    assert_allclose(delta_sir_gap(cfg, 1), 225.0 * np.outer(g, g))
    assert np.linalg.norm(delta_sir_gap(cfg, 64)) < 0.01 * np.linalg.norm(delta_sir_gap(cfg, 1))
    with pytest.raises(ReductionError):
        delta_sir_gap(SimConfig(model="m7", n=50), 8)


def test_replicate_records_failures():
    cfg = SimConfig(model="m7", n=8, estimators=["ols", "pc"])
    outcomes = run_replicate(cfg, 0)
    ols, pc = outcomes
    assert not ols.ok and "OLS" in ols.error
    assert pc.ok and 0.0 <= pc.angle_deg <= 90.0


def test_summarize_counts_failures_and_sources():
    outcomes = [
        ReplicateOutcome("pfc_all", 0, 10.0, None, "PC"),
        ReplicateOutcome("pfc_all", 1, 20.0, None, "RC"),
        ReplicateOutcome("pfc_all", 2, 30.0, None, "PC"),
        ReplicateOutcome("pfc_all", 3, error="singular"),
    ]
    row = summarize("sigma_0", 1.0, "pfc_all", outcomes)
    assert row.mean_angle_deg == pytest.approx(20.0)
    assert row.sd_angle_deg == pytest.approx(10.0)
    assert row.log_mean_angle == pytest.approx(np.log(20.0))
    assert (row.n_ok, row.n_fail) == (3, 1)
    assert row.source_counts == {"PC": 2, "RC": 1}


def _small_study(**base):
    cfg = SimConfig(model="m7", n=30, reps=6, seed=11, **base)
    return StudySpec(name="small", base=cfg, sweep=SweepSpec(param="sigma_y", values=[1.0, 2.0]))


def test_study_is_independent_of_thread_count():
    spec = _small_study(estimators=["ols", "pc", "pfc"], compute_mse=True)
    serial = run_study(spec, threads=1)
    threaded = run_study(spec, threads=3)
    assert serial.model_dump() == threaded.model_dump()
    assert [(r.sweep_value, r.estimator) for r in serial.rows] == [
        (1.0, "ols"), (1.0, "pc"), (1.0, "pfc"), (2.0, "ols"), (2.0, "pc"), (2.0, "pfc"),
    ]
    assert all(r.n_ok == 6 and r.mean_mse >= 1.0 - 1e-12 for r in serial.rows)


def test_study_configs_apply_the_sweep():
    spec = StudySpec(
        name="k",
        base=SimConfig(model="m19-exactfit", n=50, c=2.0),
        sweep=SweepSpec(param="k", values=[0, 2]),
    )
    configs = spec.configs()
    assert [cfg.exactfit_c for _, _, cfg in configs] == pytest.approx([1.1, 1.001])
    sized = _small_study().model_copy(update={"sweep": SweepSpec(param="n", values=[20, 40])})
    assert [cfg.n for _, _, cfg in sized.configs()] == [20, 40]


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_build(name):
    spec = preset_study(name, reps=3, seed=5)
    assert spec.name == f"figure-{name}"
    assert spec.base.reps == 3 and spec.base.seed == 5
    assert len(spec.configs()) == len(spec.sweep.values)


def test_preset_designs():
    assert preset_study("2c").base.n == 250
    assert np.sqrt(2.0) in preset_study("2c").sweep.values
    fig3b = preset_study("3b")
    assert fig3b.log_angles and fig3b.sweep.param == "k"
    assert fig3b.base.sigma_y == 15.0
    uniform = preset_study("1b-uniform").base.gamma_vector()
    assert_allclose(uniform, np.full(10, 1.0 / np.sqrt(10)))
    assert preset_study("1d").base.compute_mse
    with pytest.raises(KeyError):
        preset_study("9z")
