"""Tests for the adaptive-subsampling sampler and its stopping rule."""
import math

import numpy as np
import pytest

from tallmh.data import Dataset, generate
from tallmh.models import EvalCounter, GaussianModel
from tallmh.proxy import ProxyPolicy, build_proxy
from tallmh.samplers.base import (RandomWalkProposal, default_scale,
                                  make_streams)
from tallmh.samplers.confidence import (ConfidenceConfig, bernstein_bound,
                                        confidence_decision, confidence_run,
                                        geometric_delta_schedule)
from tallmh.samplers.mh import mh_run


class TestBernsteinBound:
    def test_frozen_values(self):
        # Frozen from the closed form sigma*sqrt(2*log(3/d)/t) + 6*C*log(3/d)/t.
        cases = [
            (1.0, 1.0, 100, 0.05, 0.5318195303924237),
            (0.5, 2.0, 10, 0.01, 7.378569983417921),
            (0.0, 1.0, 1000, 0.1, 0.020407184289972933),
            (2.0, 0.0, 50, 0.05, 0.8093794721609489),
            (0.3, 4.0, 7, 0.025, 16.765123376139346),
            (1.5, 6.0, 1598, 0.0125, 0.24770070817975162),
        ]
        for sigma, rng_c, t, d, want in cases:
            np.testing.assert_allclose(bernstein_bound(sigma, rng_c, t, d),
                                       want, rtol=1e-13)

    def test_matches_recomputed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            sigma = float(rng.uniform(0, 3))
            rng_c = float(rng.uniform(0, 10))
            t = int(rng.integers(1, 5000))
            d = float(rng.uniform(1e-4, 0.5))
            log_term = math.log(3.0 / d)
            want = sigma * math.sqrt(2 * log_term / t) + 6 * rng_c * log_term / t
            assert bernstein_bound(sigma, rng_c, t, d) == want

    def test_zero_budget_is_infinite(self):
        assert bernstein_bound(1.0, 1.0, 10, 0.0) == math.inf
        assert bernstein_bound(1.0, 1.0, 10, -0.1) == math.inf

    def test_monotone_in_t(self):
        vals = [bernstein_bound(1.0, 2.0, t, 0.05) for t in (10, 100, 1000)]
        assert vals[0] > vals[1] > vals[2]


class TestDeltaSchedule:
    def test_partial_sums_stay_within_budget(self):
        for delta in (0.05, 0.1, 0.5):
            sched = geometric_delta_schedule(delta)
            total = sum(sched(j) for j in range(100))
            assert total <= delta + 1e-15
            np.testing.assert_allclose(total, delta)

    def test_halving(self):
        sched = geometric_delta_schedule(0.2)
        assert sched(0) == 0.1
        assert sched(1) == 0.05
        assert sched(3) == 0.0125

    def test_custom_schedule_is_used(self):
        cfg = ConfidenceConfig(delta=0.3, delta_schedule=lambda j: 0.07)
        assert cfg.schedule()(12) == 0.07
        assert ConfidenceConfig(delta=0.3).schedule()(0) == 0.15


class TestConfigValidation:
    def test_delta_range(self):
        ConfidenceConfig(delta=0.0)
        with pytest.raises(ValueError):
            ConfidenceConfig(delta=1.0)
        with pytest.raises(ValueError):
            ConfidenceConfig(delta=-0.01)

    def test_growth_and_floor(self):
        with pytest.raises(ValueError):
            ConfidenceConfig(batch_growth=1.0)
        with pytest.raises(ValueError):
            ConfidenceConfig(t_init=0)
        assert ConfidenceConfig(t_init=64).t_init == 64


class TestExactModeMatchesMH:
    def test_zero_delta_pairs_with_full_mh(self, gauss_model, gauss_ds):
        theta0 = np.array([0.3, 0.1])
        for seed in (11, 12):
            prop = RandomWalkProposal(scale=0.3)
            ref = mh_run(gauss_model, gauss_ds, prop, theta0, 60, seed=seed)
            prop2 = RandomWalkProposal(scale=0.3)
            got = confidence_run(gauss_model, gauss_ds,
                                 ConfidenceConfig(delta=0.0), prop2, theta0,
                                 60, seed=seed)
            assert np.array_equal(ref.states, got.states)
            assert np.array_equal(ref.accepted, got.accepted)

    def test_zero_delta_charges_full_passes(self, gauss_model, gauss_ds):
        prop = RandomWalkProposal(scale=0.3)
        tr = confidence_run(gauss_model, gauss_ds, ConfidenceConfig(delta=0.0),
                            prop, np.array([0.3, 0.1]), 40, seed=13)
        n = gauss_ds.n
        # First decision has no stored vector (2n); afterwards the losing
        # state always carries one, so every later decision costs n.
        assert tr.evals[0] == 2 * n
        assert np.all(tr.evals[1:] == n)


class TestDecisionMechanics:
    def _setup(self, gauss_model, gauss_ds, seed=21):
        streams = make_streams(seed)
        theta = np.array([0.1, 0.0])
        theta_p = np.array([0.2, -0.05])
        return streams, theta, theta_p

    def test_identical_endpoints_certify_at_floor(self, gauss_model, gauss_ds):
        # theta' == theta: every per-datum ratio is 0, so the exact range is
        # 0, the bound at the first look is 0, and |stat| >= 0 certifies
        # immediately after a single point.
        streams, theta, _ = self._setup(gauss_model, gauss_ds)
        dec, nxt, evals = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(), theta, theta.copy(),
            u=0.5, pq_gap=0.0, sub_rng=streams.subsample)
        assert dec.t_used == 1
        assert not dec.exhausted
        # log u < 0 == log ratio, so the (null) move is accepted.
        assert dec.accepted
        assert evals == 2

    def test_far_proposal_certifies_early(self, gauss_model, gauss_ds):
        streams, theta, _ = self._setup(gauss_model, gauss_ds)
        theta_bad = np.array([50.0, 0.0])
        dec, nxt, evals = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(), theta, theta_bad,
            u=0.5, pq_gap=0.0, sub_rng=streams.subsample)
        assert not dec.accepted
        assert dec.t_used < gauss_ds.n
        assert evals == 2 * dec.t_used

    def test_exhaustion_flag_and_full_cost(self, gauss_model, gauss_ds):
        # A near-tie between identical-likelihood states with no proxy: all
        # per-datum ratios are ~0 but psi is a hair below 0, certification
        # needs |stat| >= c which never happens while c > 0, except range 0
        # gives c = 0... use delta = 0 to force the exhaustion path instead.
        streams, theta, theta_p = self._setup(gauss_model, gauss_ds)
        dec, nxt, evals = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(delta=0.0), theta, theta_p,
            u=0.5, pq_gap=0.0, sub_rng=streams.subsample)
        assert dec.exhausted
        assert dec.t_used == gauss_ds.n
        assert evals == 2 * gauss_ds.n
        assert nxt is not None and nxt.shape == (gauss_ds.n,)

    def test_cached_current_halves_the_charge(self, gauss_model, gauss_ds):
        streams, theta, theta_p = self._setup(gauss_model, gauss_ds)
        cached = gauss_model.log_lik(gauss_ds, None, theta)
        dec, nxt, evals = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(delta=0.0), theta, theta_p,
            u=0.5, pq_gap=0.0, sub_rng=streams.subsample, cur_loglik=cached)
        assert dec.exhausted
        assert evals == gauss_ds.n

        streams2 = make_streams(21)
        theta_bad = np.array([50.0, 0.0])
        dec2, _, evals2 = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(), theta, theta_bad,
            u=0.5, pq_gap=0.0, sub_rng=streams2.subsample, cur_loglik=cached)
        assert evals2 == dec2.t_used

    def test_rejected_decision_keeps_cache(self, gauss_model, gauss_ds):
        streams, theta, _ = self._setup(gauss_model, gauss_ds)
        cached = gauss_model.log_lik(gauss_ds, None, theta)
        theta_bad = np.array([50.0, 0.0])
        dec, nxt, _ = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(), theta, theta_bad,
            u=0.5, pq_gap=0.0, sub_rng=streams.subsample, cur_loglik=cached)
        assert not dec.accepted
        assert nxt is cached

    def test_single_datum_always_exact(self, gauss_model):
        ds = Dataset(X=np.array([[0.4]]), y=None)
        streams = make_streams(31)
        dec, _, evals = confidence_decision(
            gauss_model, ds, ConfidenceConfig(), np.array([0.0, 0.0]),
            np.array([0.3, 0.0]), u=0.9, pq_gap=0.0,
            sub_rng=streams.subsample)
        assert dec.t_used == 1
        assert evals in (1, 2)

    def test_without_replacement_mode(self, gauss_model, gauss_ds):
        streams, theta, theta_p = self._setup(gauss_model, gauss_ds)
        cfg = ConfidenceConfig(with_replacement=False)
        dec, _, _ = confidence_decision(
            gauss_model, gauss_ds, cfg, theta, theta_p, u=0.5, pq_gap=0.0,
            sub_rng=streams.subsample)
        assert dec.t_used <= gauss_ds.n
        # Same seed, exhaustive config: walks the full permutation and must
        # agree with the exact decision.
        streams2 = make_streams(21)
        dec2, _, _ = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(delta=0.0,
                                                    with_replacement=False),
            theta, theta_p, u=0.5, pq_gap=0.0, sub_rng=streams2.subsample)
        assert dec2.exhausted

    def test_t_init_floor_binds(self, gauss_model, gauss_ds):
        streams, theta, _ = self._setup(gauss_model, gauss_ds)
        theta_bad = np.array([50.0, 0.0])
        dec, _, _ = confidence_decision(
            gauss_model, gauss_ds, ConfidenceConfig(t_init=37), theta,
            theta_bad, u=0.5, pq_gap=0.0, sub_rng=streams.subsample)
        assert dec.t_used == 37

        ds_small = Dataset(X=gauss_ds.X[:5], y=None)
        streams2 = make_streams(22)
        dec2, _, _ = confidence_decision(
            gauss_model, ds_small, ConfidenceConfig(t_init=37), theta,
            theta_bad, u=0.5, pq_gap=0.0, sub_rng=streams2.subsample)
        assert dec2.t_used == 5

    def test_subsample_grid_follows_growth_factor(self, gauss_model, gauss_ds):
        # Stop sizes live on the ceil-growth grid 1, 2, 3, 5, 8, 12, ...
        grid = {1}
        t = 1
        while t < gauss_ds.n:
            t = min(gauss_ds.n, math.ceil(1.5 * t))
            grid.add(t)
        streams = make_streams(41)
        theta = np.array([0.1, 0.0])
        for k in range(30):
            theta_p = theta + np.array([0.8, 0.0]) * (1 + k % 3)
            dec, _, _ = confidence_decision(
                gauss_model, gauss_ds, ConfidenceConfig(), theta, theta_p,
                u=0.7, pq_gap=0.0, sub_rng=streams.subsample)
            assert dec.t_used in grid


class TestRunAccounting:
    def test_counter_matches_trace_plus_setup(self, gauss_model, gauss_ds):
        counter = EvalCounter()
        prop = RandomWalkProposal(scale=0.3)
        tr = confidence_run(gauss_model, gauss_ds, ConfidenceConfig(), prop,
                            np.array([0.3, 0.1]), 50, seed=17,
                            policy=ProxyPolicy("single"), counter=counter)
        assert counter.total == tr.evals.sum() + tr.meta["setup_evals"]
        assert tr.meta["setup_evals"] == gauss_ds.n

    def test_drop_policy_rebuild_iterations_cost_full(self, gauss_model,
                                                      gauss_ds):
        prop = RandomWalkProposal(scale=0.3)
        tr = confidence_run(gauss_model, gauss_ds, ConfidenceConfig(), prop,
                            np.array([0.3, 0.1]), 30, seed=18,
                            policy=ProxyPolicy("drop", alpha=10, radius=1.0))
        n = gauss_ds.n
        assert tr.meta["proxy_rebuilds"] == 3
        np.testing.assert_array_equal(tr.evals[[9, 19, 29]], [2 * n] * 3)

    def test_proxy_cuts_evals_on_tall_gaussian(self, gauss_model):
        # Subsampling pays off once n is large relative to the proposal
        # step; at n = 20000 the proxy run certifies most decisions early.
        n = 20_000
        ds = generate("gaussian_1d", n, seed=7, loc=0.0, scale=1.0)
        theta0 = np.array([ds.X[:, 0].mean(), np.log(ds.X[:, 0].std())])
        scale = default_scale(n, 2)
        plain = confidence_run(gauss_model, ds, ConfidenceConfig(),
                               RandomWalkProposal(scale=scale), theta0, 200,
                               seed=19)
        prox = confidence_run(gauss_model, ds, ConfidenceConfig(),
                              RandomWalkProposal(scale=scale), theta0, 200,
                              seed=19, policy=ProxyPolicy("single", radius=0.5))
        assert prox.evals.mean() < 0.5 * plain.evals.mean()
        assert prox.evals.mean() < 0.3 * n

    def test_prebuilt_proxy_passthrough(self, gauss_model, gauss_ds):
        proxy = build_proxy(gauss_model, gauss_ds, np.array([0.3, 0.1]),
                            radius=2.0)
        prop = RandomWalkProposal(scale=0.1)
        tr = confidence_run(gauss_model, gauss_ds, ConfidenceConfig(), prop,
                            np.array([0.3, 0.1]), 20, seed=23, proxy=proxy)
        assert tr.meta["setup_evals"] == 0
        assert np.isfinite(tr.states).all()
        proxy.release()

    def test_trace_meta_records_config(self, gauss_model, gauss_ds):
        prop = RandomWalkProposal(scale=0.3)
        cfg = ConfidenceConfig(delta=0.05, batch_growth=2.0,
                               with_replacement=False)
        tr = confidence_run(gauss_model, gauss_ds, cfg, prop,
                            np.array([0.3, 0.1]), 10, seed=29)
        assert tr.sampler == "confidence"
        assert tr.meta["delta"] == 0.05
        assert tr.meta["batch_growth"] == 2.0
        assert tr.meta["with_replacement"] is False
        assert tr.meta["policy"] is None


class TestPosteriorAgreement:
    def test_subsampled_chain_matches_exact_moments(self, gauss_model,
                                                    gauss_ds):
        theta0 = np.array([0.3, 0.1])
        prop = RandomWalkProposal(scale=0.25)
        ref = mh_run(gauss_model, gauss_ds, prop, theta0, 4000, seed=37)
        prop2 = RandomWalkProposal(scale=0.25)
        got = confidence_run(gauss_model, gauss_ds, ConfidenceConfig(), prop2,
                             theta0, 4000, seed=38,
                             policy=ProxyPolicy("single"))
        a, b = ref.states[500:], got.states[500:]
        np.testing.assert_allclose(a.mean(axis=0), b.mean(axis=0), atol=0.03)
        np.testing.assert_allclose(a.std(axis=0), b.std(axis=0), atol=0.03)
