"""Tests for the brightness-augmented sampler and its Taylor lower bounds."""
import numpy as np
import pytest

from tallmh.models import EvalCounter
from tallmh.proxy import build_proxy
from tallmh.samplers.base import RandomWalkProposal
from tallmh.samplers.firefly import (FireflyBoundError, bound_total,
                                     firefly_run, lower_bounds)


@pytest.fixture
def gauss_proxy(gauss_model, gauss_ds):
    x = gauss_ds.X[:, 0]
    anchor = np.array([x.mean(), np.log(x.std())])
    pr = build_proxy(gauss_model, gauss_ds, anchor, radius=1.0)
    yield pr
    pr.release()


class TestBounds:
    def test_lower_bounds_stay_below_loglik(self, gauss_model, gauss_ds,
                                            gauss_proxy):
        rng = np.random.default_rng(7)
        idx = np.arange(gauss_ds.n)
        for _ in range(25):
            theta = gauss_proxy.theta_star + rng.uniform(-0.9, 0.9, size=2)
            b = lower_bounds(gauss_model, gauss_ds, gauss_proxy, idx, theta)
            ell = gauss_model.log_lik(gauss_ds, None, theta)
            assert (b <= ell + 1e-9 * np.maximum(1, np.abs(ell))).all()

    def test_bound_total_matches_per_datum_sum(self, gauss_model, gauss_ds,
                                               gauss_proxy):
        rng = np.random.default_rng(8)
        idx = np.arange(gauss_ds.n)
        for _ in range(10):
            theta = gauss_proxy.theta_star + rng.uniform(-0.5, 0.5, size=2)
            agg = bound_total(gauss_proxy, theta)
            per = lower_bounds(gauss_model, gauss_ds, gauss_proxy, idx, theta)
            np.testing.assert_allclose(agg, per.sum(), rtol=1e-9)

    def test_bounds_tight_at_anchor_up_to_cube_term(self, gauss_model,
                                                    gauss_ds, gauss_proxy):
        # At theta_star the Taylor part is exact, and the cube penalty is 0.
        ell = gauss_model.log_lik(gauss_ds, None, gauss_proxy.theta_star)
        b = lower_bounds(gauss_model, gauss_ds, gauss_proxy,
                         np.arange(gauss_ds.n), gauss_proxy.theta_star)
        np.testing.assert_allclose(b, ell, rtol=1e-12)

    def test_outside_trust_region_raises(self, gauss_proxy):
        theta = gauss_proxy.theta_star + np.array([1.5, 0.0])
        with pytest.raises(FireflyBoundError, match="trust region"):
            bound_total(gauss_proxy, theta)


class TestRun:
    def test_smoke_and_meta(self, gauss_model, gauss_ds, gauss_proxy):
        prop = RandomWalkProposal(scale=0.05)
        tr = firefly_run(gauss_model, gauss_ds, prop, gauss_proxy.theta_star,
                         200, seed=51, proxy=gauss_proxy)
        assert tr.sampler == "firefly"
        assert np.isfinite(tr.states).all()
        assert 0 <= tr.meta["final_bright"] <= gauss_ds.n
        # per sweep: resampled z's plus bright points, both at most n
        assert (tr.evals >= 1).all()
        assert (tr.evals <= 2 * gauss_ds.n).all()

    def test_eval_charge_tracks_brightness(self, gauss_model, gauss_ds,
                                           gauss_proxy):
        prop = RandomWalkProposal(scale=0.05)
        counter = EvalCounter()
        tr = firefly_run(gauss_model, gauss_ds, prop, gauss_proxy.theta_star,
                         100, seed=52, proxy=gauss_proxy, counter=counter)
        assert counter.total == tr.evals.sum()
        m = max(1, round(0.1 * gauss_ds.n))
        assert (tr.evals >= m).all()

    def test_record_z_codes_link_to_charges(self, gauss_model):
        from tallmh.data import generate
        ds = generate("gaussian_1d", 30, seed=300, loc=0.0, scale=1.0)
        anchor = np.array([ds.X[:, 0].mean(), np.log(ds.X[:, 0].std())])
        pr = build_proxy(gauss_model, ds, anchor, radius=1.5)
        prop = RandomWalkProposal(scale=0.1)
        tr = firefly_run(gauss_model, ds, prop, anchor, 150, seed=53,
                         proxy=pr, resample_fraction=0.2, record_z=True)
        codes = tr.meta["z_codes"]
        assert codes.shape == (150,)
        m = max(1, round(0.2 * ds.n))
        pop = np.array([bin(int(c)).count("1") for c in codes])
        assert (pop <= ds.n).all()
        # sweep k+1 is charged for the brightness left by sweep k
        np.testing.assert_array_equal(tr.evals[1:], m + pop[:-1])
        pr.release()

    def test_record_z_needs_small_n(self, gauss_model, gauss_ds, gauss_proxy):
        prop = RandomWalkProposal(scale=0.05)
        with pytest.raises(ValueError, match="62"):
            firefly_run(gauss_model, gauss_ds, prop, gauss_proxy.theta_star,
                        10, seed=54, proxy=gauss_proxy, record_z=True)

    def test_resample_fraction_validation(self, gauss_model, gauss_ds,
                                          gauss_proxy):
        prop = RandomWalkProposal(scale=0.05)
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                firefly_run(gauss_model, gauss_ds, prop,
                            gauss_proxy.theta_star, 5, seed=55,
                            proxy=gauss_proxy, resample_fraction=bad)

    def test_escape_from_trust_region_raises(self, gauss_model, gauss_ds):
        x = gauss_ds.X[:, 0]
        anchor = np.array([x.mean(), np.log(x.std())])
        pr = build_proxy(gauss_model, gauss_ds, anchor, radius=0.02)
        prop = RandomWalkProposal(scale=1.0)
        with pytest.raises(FireflyBoundError):
            firefly_run(gauss_model, gauss_ds, prop, anchor, 200, seed=56,
                        proxy=pr)
        pr.release()

    def test_posterior_moments_match_exact_chain(self, gauss_model, gauss_ds,
                                                 gauss_proxy):
        from tallmh.samplers.mh import mh_run
        theta0 = gauss_proxy.theta_star
        ref = mh_run(gauss_model, gauss_ds, RandomWalkProposal(scale=0.1),
                     theta0, 6000, seed=57)
        got = firefly_run(gauss_model, gauss_ds,
                          RandomWalkProposal(scale=0.1), theta0, 6000,
                          seed=58, proxy=gauss_proxy, resample_fraction=0.2)
        a, b = ref.states[1000:], got.states[1000:]
        np.testing.assert_allclose(a.mean(axis=0), b.mean(axis=0), atol=0.04)
        np.testing.assert_allclose(a.std(axis=0), b.std(axis=0), atol=0.04)
