import math

import numpy as np
import pytest
from scipy import integrate

from chanest.errors import (EmptyComponentError, InsufficientDataError)
from chanest.gamma_core import GammaParams, digamma, inv_reg_lower_gamma
from chanest.model import CensoredBin, MixtureParams, linear_to_db, mixture_mean_db
from chanest.semcm import (CompletedAssignment, SemConfig, e_step_censored,
                           e_step_observed, init_heuristic, m_step,
                           run_semcm, s_step)
from chanest.simulator import Scenario, generate_scenario, true_params_at


def _phi(alpha1=0.5, m1=7.0, om1=2.0, m2=1.0, om2=5.0):
    return MixtureParams(alpha1, GammaParams(m1, om1), GammaParams(m2, om2))


def _uncensored_bin(samples, c_db=-300.0):
    samples = np.asarray(samples, dtype=float)
    return CensoredBin(ld=25.0, observed=samples, n_total=samples.size,
                       r1=0, c_db=c_db)


def _density(y, comp):
    return (y / comp.omega) ** (comp.m - 1) * math.exp(-y / comp.omega) \
        / (math.gamma(comp.m) * comp.omega)


class TestSemConfig:
    def test_validates_burn_window(self):
        with pytest.raises(ValueError):
            SemConfig(iterations=5, burn_window=6)

    def test_validates_alpha_floor(self):
        with pytest.raises(ValueError):
            SemConfig(alpha_floor=0.7)


class TestEStepObserved:
    def test_symmetry(self):
        phi = MixtureParams(0.5, GammaParams(7, 2), GammaParams(7, 2))
        for x in (0.1, 1.0, 100.0):
            assert e_step_observed(x, phi) == pytest.approx(0.5)

    def test_alpha_one(self):
        assert e_step_observed(3.0, _phi(alpha1=1.0)) == 1.0

    def test_frozen_oracle_value(self):
        # frozen from a 40-digit mpmath evaluation of the responsibility
        phi = _phi(alpha1=0.3, m1=7, om1=1, m2=1, om2=5)
        assert e_step_observed(4.0, phi) == pytest.approx(
            0.3319574672567457, abs=1e-12)

    def test_bounds_and_complement(self):
        rng = np.random.default_rng(10)
        phi = _phi()
        x = rng.gamma(3.0, 2.0, 1000)
        t = e_step_observed(x, phi)
        assert np.all((t >= 0) & (t <= 1))


class TestEStepCensored:
    def test_symmetry(self):
        phi = MixtureParams(0.5, GammaParams(7, 2), GammaParams(7, 2))
        assert e_step_censored(1.0, phi) == pytest.approx(0.5)

    def test_negligible_component2_mass(self):
        # component 2 sits far above the threshold with a narrow shape
        phi = _phi(m1=1.0, om1=1.0, m2=35.0, om2=1e6)
        assert e_step_censored(1.0, phi) == pytest.approx(1.0, abs=1e-12)

    def test_quadrature_oracle_deep_bin(self):
        # default scenario at ld=31, threshold -109 dBm
        sc = Scenario()
        phi = true_params_at(31.0, sc)
        c = 10 ** -10.9
        i1, _ = integrate.quad(lambda y: _density(y, phi.comp1), 0, c)
        i2, _ = integrate.quad(lambda y: _density(y, phi.comp2), 0, c)
        want = phi.alpha1 * i1 / (phi.alpha1 * i1 + phi.alpha2 * i2)
        assert e_step_censored(c, phi) == pytest.approx(want, abs=1e-10)

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            e_step_censored(0.0, _phi())


class TestSStep:
    def test_certain_labels(self):
        bin_ = _uncensored_bin([1.0, 2.0, 3.0])
        out = s_step(bin_, _phi(alpha1=1.0), np.random.default_rng(0))
        assert np.all(out.z_obs)
        assert out.y_cens.size == 0

    def test_no_imputations_without_censoring(self):
        bin_ = _uncensored_bin([1.0, 2.0])
        out = s_step(bin_, _phi(), np.random.default_rng(0))
        assert out.z_cens.size == 0 and out.y_cens.size == 0

    def test_label_frequencies(self):
        bin_ = CensoredBin(ld=25.0, observed=[2.0], n_total=10_001,
                           r1=10_000, c_db=linear_to_db(0.5))
        phi = _phi()
        t1 = e_step_censored(bin_.c_lin, phi)
        counts = []
        rng = np.random.default_rng(11)
        out = s_step(bin_, phi, rng)
        k = int(out.z_cens.sum())
        sigma = math.sqrt(10_000 * t1 * (1 - t1))
        assert abs(k - 10_000 * t1) < 3 * sigma

    def test_imputed_values_below_threshold(self):
        bin_ = CensoredBin(ld=25.0, observed=[2.0], n_total=101, r1=100,
                           c_db=linear_to_db(0.5))
        out = s_step(bin_, _phi(), np.random.default_rng(12))
        assert np.all(out.y_cens <= bin_.c_lin)
        assert np.all(out.y_cens > 0)

    def test_deterministic_given_seed(self):
        bin_ = CensoredBin(ld=25.0, observed=[2.0, 3.0], n_total=10, r1=8,
                           c_db=linear_to_db(1.0))
        a = s_step(bin_, _phi(), np.random.default_rng(13))
        b = s_step(bin_, _phi(), np.random.default_rng(13))
        np.testing.assert_array_equal(a.z_obs, b.z_obs)
        np.testing.assert_array_equal(a.y_cens, b.y_cens)


class TestMStep:
    def test_alpha_counting_and_clamp(self):
        bin_ = _uncensored_bin([1.0, 2.0, 3.0, 4.0])
        completed = CompletedAssignment(np.ones(4, bool), np.empty(0, bool),
                                        np.empty(0))
        cfg = SemConfig(alpha_floor=0.02)
        out = m_step(bin_, completed, _phi(), cfg, on_empty="keep")
        # raw alpha1 = 1, stored value clamped to 1 - floor
        assert out.alpha1 == pytest.approx(0.98)

    def test_hand_built_scale_update(self):
        # comp1 gets {1, 3} observed, comp2 gets {10} observed + {0.5} imputed
        bin_ = CensoredBin(ld=25.0, observed=[1.0, 3.0, 10.0], n_total=4,
                           r1=1, c_db=linear_to_db(0.6))
        completed = CompletedAssignment(
            z_obs=np.array([True, True, False]),
            z_cens=np.array([False]), y_cens=np.array([0.5]))
        prev = _phi(m1=2.0, om1=1.0, m2=4.0, om2=1.0)
        out = m_step(bin_, completed, prev, SemConfig())
        # omega_im = component mean; omega = omega_im / m_prev
        assert out.comp1.omega == pytest.approx(2.0 / 2.0)
        assert out.comp2.omega == pytest.approx(5.25 / 4.0)
        # shape solves digamma(m) = mean ln(x / omega_new)
        want_l1 = np.mean(np.log(np.array([1.0, 3.0]) / out.comp1.omega))
        assert digamma(out.comp1.m) == pytest.approx(want_l1, abs=1e-9)

    def test_empty_component_error(self):
        bin_ = _uncensored_bin([1.0, 2.0])
        completed = CompletedAssignment(np.ones(2, bool), np.empty(0, bool),
                                        np.empty(0))
        with pytest.raises(EmptyComponentError):
            m_step(bin_, completed, _phi(), SemConfig())

    def test_single_component_ml_stationarity(self):
        # iterating the update on a fully comp1-labeled uncensored sample
        # must converge to the Gamma ML equations: mean and log-mean matching
        rng = np.random.default_rng(14)
        x = rng.gamma(7.0, 2.0, 400)
        bin_ = _uncensored_bin(x)
        completed = CompletedAssignment(np.ones(x.size, bool),
                                        np.empty(0, bool), np.empty(0))
        phi = _phi(m1=3.0, om1=1.0)
        cfg = SemConfig()
        for _ in range(5000):
            nxt = m_step(bin_, completed, phi, cfg, on_empty="keep")
            if abs(nxt.comp1.m - phi.comp1.m) < 1e-13:
                phi = nxt
                break
            phi = nxt
        m_hat, om_hat = phi.comp1.m, phi.comp1.omega
        assert m_hat * om_hat == pytest.approx(x.mean(), rel=1e-9)
        assert digamma(m_hat) == pytest.approx(
            float(np.mean(np.log(x / om_hat))), abs=1e-9)


class TestRunSemcm:
    def test_single_gamma_mean_recovery(self):
        rng = np.random.default_rng(15)
        x = rng.gamma(7.0, 10 ** -8.5 / 7.0, 1000)
        bin_ = _uncensored_bin(x, c_db=-300.0)
        trace = run_semcm(bin_, init_heuristic(bin_), SemConfig(seed=1),
                          np.random.default_rng(1))
        got = mixture_mean_db(trace.final, 1)
        assert abs(got - (-85.0)) < 0.5

    def test_default_scenario_shape_recovery(self):
        sc = Scenario(seed=21)
        bins, truth, _ = generate_scenario(sc)
        bin_ = bins[0]  # ld = 23, well-separated clusters
        rng = np.random.default_rng(21)
        trace = run_semcm(bin_, truth.params[0], SemConfig(seed=21), rng)
        assert trace.final.comp1.m == pytest.approx(7.0, rel=0.3)
        assert trace.final.comp2.m == pytest.approx(35.0, rel=0.3)

    def test_single_iteration_final_equals_iterate(self):
        rng = np.random.default_rng(16)
        x = rng.gamma(3.0, 1.0, 200)
        bin_ = _uncensored_bin(x)
        cfg = SemConfig(iterations=1, burn_window=1, seed=2)
        trace = run_semcm(bin_, init_heuristic(bin_), cfg,
                          np.random.default_rng(2))
        assert len(trace.iterates) == 1
        assert trace.final == trace.iterates[0]

    def test_determinism(self):
        sc = Scenario(seed=22)
        bins, _, _ = generate_scenario(sc)
        cfg = SemConfig(seed=3)
        init = init_heuristic(bins[17])
        t1 = run_semcm(bins[17], init, cfg, np.random.default_rng(3))
        t2 = run_semcm(bins[17], init, cfg, np.random.default_rng(3))
        assert t1.iterates == t2.iterates
        assert t1.final == t2.final

    def test_scale_equivariance(self):
        rng = np.random.default_rng(17)
        x = rng.gamma(4.0, 1.0, 300)
        scale = 1e-9
        b1 = CensoredBin(ld=25.0, observed=x, n_total=320, r1=20,
                         c_db=linear_to_db(x.min() / 2))
        b2 = CensoredBin(ld=25.0, observed=x * scale, n_total=320, r1=20,
                         c_db=linear_to_db(x.min() * scale / 2))
        cfg = SemConfig(seed=4)
        i1 = init_heuristic(b1)
        i2 = init_heuristic(b2)
        t1 = run_semcm(b1, i1, cfg, np.random.default_rng(4))
        t2 = run_semcm(b2, i2, cfg, np.random.default_rng(4))
        assert t2.final.alpha1 == pytest.approx(t1.final.alpha1, rel=1e-9)
        assert t2.final.comp1.m == pytest.approx(t1.final.comp1.m, rel=1e-9)
        assert t2.final.comp1.omega == pytest.approx(
            t1.final.comp1.omega * scale, rel=1e-9)

    def test_trace_length_and_counts(self):
        sc = Scenario(seed=23)
        bins, truth, _ = generate_scenario(sc)
        cfg = SemConfig(iterations=30, burn_window=5, seed=5)
        trace = run_semcm(bins[16], truth.params[16], cfg,
                          np.random.default_rng(5))
        assert len(trace.iterates) == 30
        assert len(trace.imputed_comp1) == 30
        assert all(0 <= k <= bins[16].r1 for k in trace.imputed_comp1)

    def test_insufficient_data(self):
        bin_ = CensoredBin(ld=25.0, observed=[1.0], n_total=5, r1=4,
                           c_db=linear_to_db(0.5))
        with pytest.raises(InsufficientDataError):
            run_semcm(bin_, _phi(), SemConfig())


class TestInitHeuristic:
    def test_side_info_passthrough(self):
        bin_ = _uncensored_bin([1.0, 2.0, 4.0])
        init = init_heuristic(bin_, m1_guess=7.0)
        assert init.comp1.m == 7.0

    def test_mean_matching(self):
        rng = np.random.default_rng(18)
        x = rng.gamma(5.0, 2.0, 100)
        init = init_heuristic(_uncensored_bin(x))
        assert init.comp1.mean == pytest.approx(x.mean(), rel=1e-12)
        # interference mean offset +3 dB
        assert init.comp2.mean == pytest.approx(x.mean() * 10 ** 0.3,
                                                rel=1e-12)

    def test_components_distinct(self):
        init = init_heuristic(_uncensored_bin([1.0, 2.0, 4.0]))
        assert init.comp1 != init.comp2
        assert init.alpha1 == 0.5
