"""Prior construction and the Gibbs blocks."""

import numpy as np
import pytest

from horserule.errors import DataError, NumericError
from horserule.rules import Condition, Rule, build_design_matrix, dedup_rules
from horserule.sampler import (
    AssembledPrior,
    PriorSpec,
    _invgamma,
    assemble_prior,
    draw_beta,
    draw_lambda2,
    draw_nu,
    draw_rho,
    draw_sigma2,
    draw_tau2,
    gibbs_run,
    rule_prior_scale,
)


class ZeroRng:
    """standard_normal stub returning zeros: draw_beta then yields the
    exact conditional mean."""

    def standard_normal(self, size=None):
        return np.zeros(size) if size is not None else 0.0


class TestRulePriorScale:
    def test_balanced_single_condition_is_one(self):
        for mu, eta in [(1.0, 2.0), (0.0, 0.0), (2.0, 4.0), (0.5, 1.5)]:
            assert rule_prior_scale(0.5, 1, mu, eta) == 1.0

    def test_derived_value_exact(self):
        # (2 * 0.1)^1 / 2^2
        assert abs(rule_prior_scale(0.1, 2, 1.0, 2.0) - 0.05) < 1e-12

    def test_zero_exponents_flatten(self):
        assert rule_prior_scale(0.03, 4, 0.0, 0.0) == 1.0
        assert rule_prior_scale(0.9, 7, 0.0, 0.0) == 1.0

    def test_monotone_in_imbalance_and_length(self):
        assert rule_prior_scale(0.3, 1) < rule_prior_scale(0.4, 1)
        assert rule_prior_scale(0.7, 1) < rule_prior_scale(0.6, 1)
        assert rule_prior_scale(0.4, 3) < rule_prior_scale(0.4, 2)

    def test_array_input(self):
        out = rule_prior_scale(np.array([0.5, 0.1]), np.array([1, 2]))
        np.testing.assert_allclose(out, [1.0, 0.05])

    def test_degenerate_support_rejected(self):
        with pytest.raises(DataError):
            rule_prior_scale(0.0, 1)
        with pytest.raises(DataError):
            rule_prior_scale(1.0, 1)

    def test_bad_length_rejected(self):
        with pytest.raises(DataError):
            rule_prior_scale(0.5, 0)


def toy_design(rng, n=40):
    X = rng.normal(size=(n, 3))
    rules = [
        Rule.from_path([Condition(0, "<=", float(np.quantile(X[:, 0], 0.5)))]),
        Rule.from_path(
            [
                Condition(1, ">", float(np.quantile(X[:, 1], 0.3))),
                Condition(2, "<=", float(np.quantile(X[:, 2], 0.8))),
            ]
        ),
        Rule.from_path([Condition(2, ">", float(np.quantile(X[:, 2], 0.9)))]),
    ]
    return build_design_matrix(dedup_rules(rules, X), X, [0, 1, 2])


class TestAssemblePrior:
    def test_layout(self, rng):
        d = toy_design(rng)
        prior = assemble_prior(d, PriorSpec(linear_A=0.7))
        assert prior.A.shape == (len(d.columns),)
        np.testing.assert_allclose(prior.A[:3], 0.7)
        for j, meta in enumerate(d.columns):
            if meta.kind == "rule":
                assert prior.A[j] == rule_prior_scale(meta.support, meta.length)
        assert prior.shrunk.all()

    def test_unshrunk_linear_flags(self, rng):
        d = toy_design(rng)
        prior = assemble_prior(d, PriorSpec(unshrunk_linear=True))
        np.testing.assert_array_equal(prior.shrunk[:3], False)
        assert prior.shrunk[3:].all()

    def test_validation(self):
        with pytest.raises(DataError):
            PriorSpec(mu=-1.0).validate()
        with pytest.raises(DataError):
            PriorSpec(linear_A=0.0).validate()


class TestInverseGammaBlocks:
    def test_invgamma_reciprocal_mean(self, rng):
        # 1/X ~ Gamma(a, 1/b) so E[1/X] = a/b
        draws = _invgamma(rng, 3.0, 2.0, size=100_000)
        assert np.mean(1.0 / draws) == pytest.approx(1.5, abs=0.02)

    def test_lambda2_unit_case(self, rng):
        # nu=1, beta=0: rate 1, shape 1, so E[1/lambda2] = 1
        lam2 = draw_lambda2(
            rng, np.zeros(50_000), np.ones(50_000), tau2=1.0, sigma2=1.0
        )
        assert np.mean(1.0 / lam2) == pytest.approx(1.0, abs=0.02)
        assert (lam2 > 0).all()

    def test_sigma2_moments(self, rng):
        resid = np.array([1.0, -1.0, 2.0])
        beta = np.array([2.0])
        lamstar = np.array([4.0])
        # shape (3+1)/2 = 2, rate (6 + 1)/2 = 3.5, E[1/s2] = 2/3.5
        draws = np.array([draw_sigma2(rng, resid, beta, lamstar) for _ in range(40_000)])
        assert np.mean(1.0 / draws) == pytest.approx(2.0 / 3.5, rel=0.03)

    def test_tau2_shape_uses_column_count(self, rng):
        beta = np.zeros(5)
        lam2 = np.ones(5)
        # rate = 1/rho = 1, shape = 3, E[1/t2] = 3
        draws = np.array(
            [draw_tau2(rng, beta, lam2, sigma2=1.0, rho=1.0) for _ in range(40_000)]
        )
        assert np.mean(1.0 / draws) == pytest.approx(3.0, rel=0.03)

    def test_nu_rate(self, rng):
        lam2 = np.full(50_000, 1.0)
        A = np.full(50_000, 0.5)
        # rate = 1/0.25 + 1 = 5, shape 1: E[1/nu] = 1/5
        nu = draw_nu(rng, lam2, A)
        assert np.mean(1.0 / nu) == pytest.approx(0.2, rel=0.05)

    def test_rho_rate(self, rng):
        draws = np.array([draw_rho(rng, tau2=0.5) for _ in range(40_000)])
        # rate = 1 + 2 = 3, shape 1: E[1/rho] = 1/3
        assert np.mean(1.0 / draws) == pytest.approx(1.0 / 3.0, rel=0.05)

    def test_positivity_under_extreme_inputs(self, rng):
        with np.errstate(over="ignore", under="ignore"):
            lam2 = draw_lambda2(
                rng, np.full(4, 1e200), np.full(4, 1e-280), 1e-100, 1e-100
            )
            nu = draw_nu(rng, np.full(4, 1e-290), np.full(4, 1e280))
        assert np.all(lam2 > 0) and np.all(np.isfinite(lam2))
        assert np.all(nu > 0) and np.all(np.isfinite(nu))


class TestDrawBeta:
    def test_conditional_mean_two_point_oracle(self):
        # Z = (1, -1)', ys = (1, -1): Z'Z = 2, Z'y = 2, mean = 2/(2+1)
        Z = np.array([[1.0], [-1.0]])
        ys = np.array([1.0, -1.0])
        lamstar = np.array([1.0])
        out = draw_beta(Z, ys, 1.0, lamstar, ZeroRng(), method="chol")
        assert out[0] == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_routes_share_the_conditional_mean(self, rng):
        n, P = 12, 7
        Z = rng.normal(size=(n, P))
        ys = rng.normal(size=n)
        lamstar = rng.uniform(0.1, 3.0, size=P)
        a = draw_beta(Z, ys, 2.5, lamstar, ZeroRng(), method="chol")
        b = draw_beta(Z, ys, 2.5, lamstar, ZeroRng(), method="fast")
        np.testing.assert_allclose(a, b, rtol=1e-9)
        A = Z.T @ Z + np.diag(1.0 / lamstar)
        np.testing.assert_allclose(a, np.linalg.solve(A, Z.T @ ys), rtol=1e-9)

    def test_moments_match_conditional(self, rng):
        n, P = 5, 3
        Z = rng.normal(size=(n, P))
        ys = rng.normal(size=n)
        lamstar = np.array([0.5, 1.0, 2.0])
        sigma2 = 1.7
        A = Z.T @ Z + np.diag(1.0 / lamstar)
        mean = np.linalg.solve(A, Z.T @ ys)
        cov = sigma2 * np.linalg.inv(A)
        for method in ("chol", "fast"):
            draws = np.array(
                [draw_beta(Z, ys, sigma2, lamstar, rng, method=method) for _ in range(20_000)]
            )
            np.testing.assert_allclose(draws.mean(axis=0), mean, atol=4 * np.sqrt(
                np.diag(cov) / 20_000).max())
            np.testing.assert_allclose(np.cov(draws.T), cov, rtol=0.15, atol=0.01)

    def test_tiny_prior_scale_pins_to_zero(self, rng):
        Z = rng.normal(size=(10, 2))
        ys = rng.normal(size=10)
        draws = np.array(
            [draw_beta(Z, ys, 1.0, np.full(2, 1e-12), rng) for _ in range(200)]
        )
        assert np.abs(draws).max() < 1e-4

    def test_huge_prior_scale_recovers_least_squares(self, rng):
        Z = rng.normal(size=(6, 6)) + np.eye(6)
        ys = rng.normal(size=6)
        out = draw_beta(Z, ys, 1.0, np.full(6, 1e12), ZeroRng())
        np.testing.assert_allclose(out, np.linalg.solve(Z, ys), rtol=1e-4)

    def test_p_larger_than_n(self, rng):
        Z = rng.normal(size=(10, 50))
        ys = rng.normal(size=10)
        out = draw_beta(Z, ys, 1.0, np.ones(50), rng, method="auto")
        assert out.shape == (50,)
        assert np.all(np.isfinite(out))

    def test_unknown_method(self, rng):
        with pytest.raises(DataError):
            draw_beta(np.eye(2), np.ones(2), 1.0, np.ones(2), rng, method="qr")


class TestGibbsRun:
    def test_shapes_and_retention(self, rng):
        d = toy_design(rng)
        ys = rng.normal(size=d.Z.shape[0])
        prior = assemble_prior(d, PriorSpec())
        draws = gibbs_run(d, ys, prior, niter=10, burnin=3, thin=2, seed=0,
                          keep_lambda=True)
        assert draws.beta.shape == ((10 - 3) // 2, len(d.columns))
        assert draws.sigma2.shape == (3,)
        assert draws.tau2.shape == (3,)
        assert draws.lambda2.shape == (3, len(d.columns))
        assert np.all(draws.sigma2 > 0) and np.all(draws.tau2 > 0)
        assert np.all(np.isfinite(draws.beta))

    def test_deterministic_in_seed(self, rng):
        d = toy_design(rng)
        ys = rng.normal(size=d.Z.shape[0])
        prior = assemble_prior(d, PriorSpec())
        a = gibbs_run(d, ys, prior, niter=50, burnin=10, seed=4)
        b = gibbs_run(d, ys, prior, niter=50, burnin=10, seed=4)
        c = gibbs_run(d, ys, prior, niter=50, burnin=10, seed=5)
        np.testing.assert_array_equal(a.beta, b.beta)
        np.testing.assert_array_equal(a.sigma2, b.sigma2)
        assert not np.array_equal(a.beta, c.beta)

    def test_accepts_plain_arrays(self, rng):
        Z = rng.normal(size=(20, 4))
        ys = rng.normal(size=20)
        prior = AssembledPrior(A=np.ones(4), shrunk=np.ones(4, dtype=bool))
        draws = gibbs_run(Z, ys, prior, niter=20, burnin=5, seed=0)
        assert draws.beta.shape == (15, 4)

    def test_zero_exponents_match_hardcoded_unit_scales(self, rng):
        d = toy_design(rng)
        ys = rng.normal(size=d.Z.shape[0])
        flat = assemble_prior(d, PriorSpec(mu=0.0, eta=0.0))
        hard = AssembledPrior(
            A=np.ones(len(d.columns)), shrunk=np.ones(len(d.columns), dtype=bool)
        )
        a = gibbs_run(d, ys, flat, niter=80, burnin=10, seed=11)
        b = gibbs_run(d, ys, hard, niter=80, burnin=10, seed=11)
        np.testing.assert_array_equal(a.beta, b.beta)
        np.testing.assert_array_equal(a.sigma2, b.sigma2)
        np.testing.assert_array_equal(a.tau2, b.tau2)

    def test_unshrunk_linear_ignores_linear_scale(self, rng):
        d = toy_design(rng)
        ys = rng.normal(size=d.Z.shape[0])
        a = gibbs_run(d, ys, assemble_prior(d, PriorSpec(unshrunk_linear=True,
                                                         linear_A=1.0)),
                      niter=60, burnin=10, seed=3, keep_lambda=True)
        b = gibbs_run(d, ys, assemble_prior(d, PriorSpec(unshrunk_linear=True,
                                                         linear_A=123.0)),
                      niter=60, burnin=10, seed=3, keep_lambda=True)
        np.testing.assert_array_equal(a.beta, b.beta)
        # the lambda block only covers the shrunk (rule) columns
        assert a.lambda2.shape[1] == len(d.columns) - 3

    def test_noise_columns_shrink_hard(self):
        rng = np.random.default_rng(2024)
        n, P = 200, 100
        raw = (rng.random((n, P)) < rng.uniform(0.15, 0.85, size=P)).astype(float)
        raw = raw[:, raw.std(axis=0) > 0][:, :100]
        s = raw.mean(axis=0)
        Z = (raw - s) / raw.std(axis=0, ddof=1)
        ys = rng.standard_normal(n)
        ys = (ys - ys.mean()) / ys.std(ddof=1)
        lengths = rng.integers(1, 4, size=Z.shape[1])
        prior = AssembledPrior(
            A=rule_prior_scale(s, lengths, 1.0, 2.0),
            shrunk=np.ones(Z.shape[1], dtype=bool),
        )
        draws = gibbs_run(Z, ys, prior, niter=1000, burnin=100, seed=2)
        assert np.abs(draws.beta.mean(axis=0)).max() < 0.05

    def test_larger_prior_scale_means_less_shrinkage(self):
        rng = np.random.default_rng(7)
        n = 300
        z1, z2 = rng.standard_normal(n), rng.standard_normal(n)
        Z = np.column_stack(
            [(z1 - z1.mean()) / z1.std(ddof=1), (z2 - z2.mean()) / z2.std(ddof=1)]
        )
        ys = rng.standard_normal(n)
        ys = (ys - ys.mean()) / ys.std(ddof=1)
        prior = AssembledPrior(A=np.array([1.0, 0.05]), shrunk=np.ones(2, dtype=bool))
        draws = gibbs_run(Z, ys, prior, niter=4000, burnin=500, seed=1)
        mean_abs = np.abs(draws.beta).mean(axis=0)
        assert mean_abs[0] > mean_abs[1]

    def test_signal_recovery(self, rng):
        n = 150
        Z = rng.normal(size=(n, 5))
        Z = (Z - Z.mean(axis=0)) / Z.std(axis=0, ddof=1)
        ys = 0.9 * Z[:, 0] + 0.1 * rng.normal(size=n)
        prior = AssembledPrior(A=np.ones(5), shrunk=np.ones(5, dtype=bool))
        draws = gibbs_run(Z, ys, prior, niter=600, burnin=100, seed=0)
        bmean = draws.beta.mean(axis=0)
        assert bmean[0] == pytest.approx(0.9, abs=0.08)
        assert np.abs(bmean[1:]).max() < 0.1

    def test_progress_callback(self, rng):
        d = toy_design(rng)
        ys = rng.normal(size=d.Z.shape[0])
        prior = assemble_prior(d, PriorSpec())
        seen = []
        gibbs_run(d, ys, prior, niter=250, burnin=10, seed=0,
                  progress=lambda it, total: seen.append((it, total)))
        assert seen == [(100, 250), (200, 250)]

    def test_validation_errors(self, rng):
        d = toy_design(rng)
        ys = rng.normal(size=d.Z.shape[0])
        prior = assemble_prior(d, PriorSpec())
        with pytest.raises(DataError):
            gibbs_run(d, ys, prior, niter=5, burnin=5, seed=0)
        with pytest.raises(DataError):
            gibbs_run(d, ys, prior, niter=10, burnin=2, thin=0, seed=0)
        with pytest.raises(DataError):
            gibbs_run(d, ys[:-1], prior, niter=10, burnin=2, seed=0)
        bad = AssembledPrior(A=np.ones(2), shrunk=np.ones(2, dtype=bool))
        with pytest.raises(DataError):
            gibbs_run(d, ys, bad, niter=10, burnin=2, seed=0)

    def test_nonfinite_design_rejected(self, rng):
        Z = rng.normal(size=(10, 2))
        Z[3, 1] = np.nan
        prior = AssembledPrior(A=np.ones(2), shrunk=np.ones(2, dtype=bool))
        with pytest.raises(NumericError):
            gibbs_run(Z, np.zeros(10), prior, niter=10, burnin=2, seed=0)
