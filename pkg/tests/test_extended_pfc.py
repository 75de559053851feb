import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import make_dataset
from reductive.basis import build_basis
from reductive.errors import FitError
from reductive.linalg import Subspace, logdet, orthonormal_completion, random_subspace, sym_eig
from reductive.models import BasisKind, CandidateSource, ExtendedStrategy, Method
from reductive.moments import Dataset, compute_moments
from reductive.services.estimators import (
    ExtendedPFCObjective,
    eval_extended_pfc_objective,
    extended_pfc_objective_explicit,
    fit_extended_pfc,
    fit_pc,
)
from reductive.services.grassmann import OptimOptions, numeric_gradient, optimize
from reductive.simulation import SimConfig, generate, population_moments

POLY2 = BasisKind.polynomial(2)
SLICES = BasisKind.slices(8)


@pytest.fixture
def m12_data(rng):
    return make_dataset(rng, n=150, p=5, sigma=0.5, sigma_y=1.5, sigma_0=1.2)


@pytest.fixture
def m12_moments(m12_data):
    return compute_moments(m12_data, build_basis(m12_data.y, POLY2))


def test_invariant_and_explicit_forms_agree(rng, m12_moments):
    for d in (1, 2, 4):
        S = random_subspace(5, d, rng)
        assert eval_extended_pfc_objective(S, m12_moments) == pytest.approx(
            extended_pfc_objective_explicit(S, m12_moments), rel=1e-10
        )


def test_objective_depends_only_on_span(rng, m12_moments):
    S = random_subspace(5, 2, rng)
    M = S.basis @ np.array([[2.0, 1.0], [0.5, -3.0]])
    objective = ExtendedPFCObjective(m12_moments)
    assert objective(M) == pytest.approx(objective(S.basis), rel=1e-10)


def test_analytic_gradient_matches_finite_differences(rng, m12_moments):
    objective = ExtendedPFCObjective(m12_moments)
    for _ in range(50):
        d = int(rng.integers(1, 5))
        B = random_subspace(5, d, rng).basis
        numeric = numeric_gradient(objective.problem(d), B, 1e-6)
        analytic = objective.gradient(B)
        assert np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic) < 1e-5


def test_determinant_inequality(rng):
    for _ in range(1000):
        A = rng.standard_normal((5, 5))
        sigma = A.T @ A + 0.1 * np.eye(5)
        S = random_subspace(5, int(rng.integers(1, 5)), rng)
        G, G0 = S.basis, orthonormal_completion(S).basis
        assert logdet(G0.T @ sigma @ G0) + logdet(G.T @ sigma @ G) >= logdet(sigma) - 1e-9
    V = sym_eig(sigma).eigenvectors
    G, G0 = V[:, [0, 3]], V[:, [1, 2, 4]]
    equal = logdet(G0.T @ sigma @ G0) + logdet(G.T @ sigma @ G)
    assert equal == pytest.approx(logdet(sigma), abs=1e-9)


def test_strategies_are_ordered_by_likelihood(m12_data):
    fits = {
        strategy: fit_extended_pfc(m12_data, POLY2, 2, strategy)
        for strategy in ExtendedStrategy
    }
    pc, pfc_all, grassmann = (
        fits[ExtendedStrategy.PFC_PC].loglik,
        fits[ExtendedStrategy.PFC_ALL].loglik,
        fits[ExtendedStrategy.GRASSMANN].loglik,
    )
    assert pfc_all >= pc - 1e-9
    assert grassmann >= pfc_all - 1e-9
    assert fits[ExtendedStrategy.SEQUENTIAL].loglik <= pfc_all + 1e-9


def test_sequential_picks_a_later_principal_component(rng):
    base = make_dataset(rng, n=300, p=4, sigma=0.3)
    X = base.X.copy()
    X[:, 1] *= 10.0
    data = Dataset(X=X, y=base.y)
    e1 = Subspace(np.eye(4)[:, :1])
    assert fit_pc(data, 1).subspace.angle_to(e1) > 80.0

    sequential = fit_extended_pfc(data, POLY2, 1, "sequential")
    assert sequential.subspace.angle_to(e1) < 10.0
    assert sequential.candidate_source is CandidateSource.PC
    assert sequential.loglik == pytest.approx(fit_extended_pfc(data, POLY2, 1, "pfc-pc").loglik)

    two = fit_extended_pfc(data, POLY2, 2, "sequential")
    assert two.d == 2
    assert two.loglik <= fit_extended_pfc(data, POLY2, 2, "pfc-pc").loglik + 1e-9


def _best_single_candidate(data):
    moments = compute_moments(data, build_basis(data.y, SLICES))
    objective = ExtendedPFCObjective(moments)
    n_fit = min(moments.r, moments.rank_fit)
    pools = [
        (CandidateSource.PC, moments.eig_sigma.eigenvectors.T),
        (CandidateSource.PFC, moments.eig_fit.eigenvectors.T[:n_fit]),
        (CandidateSource.RC, moments.eig_res.eigenvectors.T),
    ]
    scored = [
        (objective(Subspace.from_matrix(v).basis), source) for source, pool in pools for v in pool
    ]
    return max(scored, key=lambda item: item[0])


def test_all_candidates_pick_the_best_source():
    winners = {}
    for sigma_0 in (0.5, float(np.sqrt(2.0)), 3.0):
        for rep in range(10):
            data = generate(SimConfig(model="m12", n=250, sigma_0=sigma_0), rep)
            fit = fit_extended_pfc(data, SLICES, 1, "pfc-all")
            value, source = _best_single_candidate(data)
            assert fit.loglik == pytest.approx(value)
            assert fit.candidate_source is source
            winners.setdefault(sigma_0, set()).add(source)

            pc_only = fit_extended_pfc(data, SLICES, 1, "pfc-pc")
            sequential = fit_extended_pfc(data, SLICES, 1, "sequential")
            assert sequential.loglik == pytest.approx(pc_only.loglik)
            assert pc_only.loglik <= fit.loglik + 1e-9
    assert CandidateSource.PC in winners[0.5]
    assert CandidateSource.PC not in winners[float(np.sqrt(2.0))]
    assert set().union(*winners.values()) - {CandidateSource.PC}


def test_fit_records_candidates_and_covariances(m12_data, m12_moments):
    fit = fit_extended_pfc(m12_data, POLY2, 2, "pfc-all")
    assert fit.method is Method.EXTENDED_PFC
    assert fit.strategy is ExtendedStrategy.PFC_ALL
    assert len(fit.extended.column_sources) == 2
    assert fit.candidate_source is fit.extended.column_sources[0]
    G = fit.subspace.basis
    assert_allclose(fit.extended.omega2_hat, G.T @ m12_moments.sigma_res @ G, atol=1e-12)
    assert fit.extended.omega0_2_hat.shape == (3, 3)
    assert fit.loglik == pytest.approx(eval_extended_pfc_objective(fit.subspace, m12_moments))
    assert fit.diagnostics["candidate_loglik"] == pytest.approx(fit.loglik)
    doc = fit.to_document()
    assert doc.candidate_source in set(CandidateSource)
    assert np.asarray(doc.omega2_hat).shape == (2, 2)


def test_grassmann_reports_local_source(m12_data):
    fit = fit_extended_pfc(m12_data, POLY2, 1, ExtendedStrategy.GRASSMANN)
    assert fit.candidate_source is CandidateSource.GRASSMANN_LOCAL
    assert fit.diagnostics["iterations"] >= 0
    assert fit.loglik >= fit.diagnostics["candidate_loglik"] - 1e-9


def test_grassmann_uses_extra_seeds(m12_data):
    truth = Subspace(np.eye(5)[:, :1])
    plain = fit_extended_pfc(m12_data, POLY2, 1, "grassmann")
    seeded = fit_extended_pfc(m12_data, POLY2, 1, "grassmann", seeds=[truth])
    assert seeded.loglik >= plain.loglik - 1e-9


def test_full_dimension_is_the_full_model(m12_data, m12_moments):
    fit = fit_extended_pfc(m12_data, POLY2, 5)
    assert fit.d == 5
    assert fit.loglik == pytest.approx(-0.5 * m12_data.n * logdet(m12_moments.sigma_res))
    assert fit.beta_hat.shape == (5, 2)


def test_too_many_subsets_is_an_error(rng):
    data = make_dataset(rng, n=100, p=30)
    with pytest.raises(FitError, match="candidate subsets"):
        fit_extended_pfc(data, BasisKind.linear(), 4, "pfc-all")


@pytest.mark.parametrize("seed", range(20))
def test_population_truth_is_the_maximizer(seed):
    rng = np.random.default_rng(seed)
    sigma, sigma_0, sigma_y = rng.uniform(0.5, 3.0, 3)
    model = "m7" if seed % 4 == 0 else "m12"
    gamma = random_subspace(6, 1, rng).basis[:, 0].tolist()
    cfg = SimConfig(
        model=model, n=100, p=6, sigma=sigma, sigma_0=sigma_0, sigma_y=sigma_y, gamma=gamma
    )
    pop = population_moments(cfg)
    objective = ExtendedPFCObjective(pop.as_moments())
    at_truth = objective(pop.true_subspace.basis)
    for _ in range(200):
        assert objective(random_subspace(6, 1, rng).basis) <= at_truth + 1e-12

    tilt = np.radians(rng.uniform(1.0, 5.0))
    g0 = orthonormal_completion(pop.true_subspace).basis @ rng.standard_normal(5)
    g0 /= np.linalg.norm(g0)
    start = Subspace.from_matrix(np.cos(tilt) * pop.true_subspace.basis[:, 0] + np.sin(tilt) * g0)
    sharp = ExtendedPFCObjective(pop.as_moments(n=cfg.n))
    result = optimize(sharp.problem(1), start, OptimOptions(grad_tol=1e-10, max_iters=5000))
    assert result.converged
    assert result.subspace.angle_to(pop.true_subspace) < 1e-6


def test_recovers_truth_from_random_starts(rng):
    cfg = SimConfig(model="m12", n=100, sigma_0=np.sqrt(2.0))
    pop = population_moments(cfg)
    problem = ExtendedPFCObjective(pop.as_moments(n=cfg.n)).problem(1)
    for _ in range(10):
        result = optimize(problem, random_subspace(cfg.p, 1, rng))
        assert result.converged
        assert result.subspace.angle_to(pop.true_subspace) < 1e-6
