import math

import numpy as np
import pytest

from conftest import mub_hovm
from oqmetro.errors import (
    AllTrialsOmitted,
    FlatLikelihood,
    NegativeCounts,
    ZeroSlope,
)
from oqmetro.estimation import (
    CountTable,
    TrialConfig,
    assemble_w_counts,
    expected_counts,
    golden_section_maximize,
    lep_estimate,
    log_likelihood,
    mle_estimate,
    parity_mean,
    run_trials,
    sample_counts,
    summary_csv_rows,
)
from oqmetro.fisher import oqfi
from oqmetro.probe import ProbeParams, Target

EQUATOR = ProbeParams(math.pi / 2, 0.0, Target.POLAR)


class TestSampling:
    def test_deterministic_given_seed(self):
        a, b, _ = mub_hovm(0.7)
        t1 = sample_counts(EQUATOR, a, b, 5000, 42)
        t2 = sample_counts(EQUATOR, a, b, 5000, 42)
        np.testing.assert_array_equal(t1.counts_b, t2.counts_b)
        np.testing.assert_array_equal(t1.counts_seq, t2.counts_seq)
        np.testing.assert_array_equal(t1.counts_w, t2.counts_w)

    def test_different_seeds_differ(self):
        a, b, _ = mub_hovm(0.7)
        t1 = sample_counts(EQUATOR, a, b, 5000, 1)
        t2 = sample_counts(EQUATOR, a, b, 5000, 2)
        assert not np.array_equal(t1.counts_seq, t2.counts_seq)

    def test_zero_sharpness_uniform_within_binomial_bands(self):
        a, b, _ = mub_hovm(0.0)
        n = 10_000
        t = sample_counts(ProbeParams(1.1, 0.4, Target.POLAR), a, b, n, 3)
        sigma_b = math.sqrt(n * 0.25)
        assert abs(t.counts_b[0] - n / 2) <= 4 * sigma_b
        sigma_seq = math.sqrt(n * 0.25 * 0.75)
        for c in t.counts_seq.ravel():
            assert abs(c - n / 4) <= 4 * sigma_seq

    def test_sharp_measurement_concentrates(self):
        a, b, _ = mub_hovm(1.0)
        t = sample_counts(EQUATOR, a, b, 2000, 11)
        # probe is the +x eigenstate, B is the sharp x measurement
        assert tuple(t.counts_b) == (2000, 0)

    def test_w_counts_sum_exactly(self):
        a, b, _ = mub_hovm(0.85)
        for seed in range(20):
            t = sample_counts(EQUATOR, a, b, 999, seed)
            assert t.counts_w.sum() == t.n

    def test_expectation_consistency(self):
        lam = 0.8
        a, b, w = mub_hovm(lam)
        params = ProbeParams(1.9, 0.6, Target.POLAR)
        from oqmetro.oq import evaluate_oq
        from oqmetro.probe import make_state

        truth = evaluate_oq(make_state(params), w).values
        n, trials = 200, 10_000
        children = np.random.SeedSequence(2718).spawn(trials)
        acc = np.zeros((trials, 2, 2))
        for k, child in enumerate(children):
            acc[k] = sample_counts(params, a, b, n, child).counts_w / n
        mean = acc.mean(axis=0)
        se = acc.std(axis=0, ddof=1) / math.sqrt(trials)
        assert np.all(np.abs(mean - truth) <= 4 * se + 1e-12)


class TestLogLikelihood:
    def test_maximized_at_truth_for_expected_counts(self):
        a, b, w = mub_hovm(0.9)
        g0 = 1.9
        params = ProbeParams(g0, 1.0, Target.POLAR)
        table = expected_counts(params, a, b, 10_000)
        ll0 = log_likelihood(table, g0, 1.0, Target.POLAR, w)
        for g in (g0 - 0.2, g0 - 0.05, g0 + 0.05, g0 + 0.2):
            assert log_likelihood(table, g, 1.0, Target.POLAR, w) < ll0

    def test_constant_for_flat_model(self):
        a, b, w = mub_hovm(0.0)
        table = CountTable(
            1000, np.array([500, 500]), np.array([[250, 250], [250, 250]]),
            np.full((2, 2), 250.0),
        )
        vals = [log_likelihood(table, g, 0.0, Target.POLAR, w)
                for g in (0.3, 1.0, 2.0)]
        assert all(v == pytest.approx(math.log(0.25), abs=1e-12) for v in vals)

    def test_negative_counts_rejected(self):
        _, _, w = mub_hovm(0.5)
        table = CountTable(
            100, np.array([0, 100]), np.array([[50, 50], [0, 0]]),
            assemble_w_counts([0, 100], [[50, 50], [0, 0]]),
        )
        assert table.has_negative
        with pytest.raises(NegativeCounts):
            log_likelihood(table, 1.0, 0.0, Target.POLAR, w)


class TestMle:
    def test_recovers_truth_from_expected_counts(self):
        a, b, w = mub_hovm(0.9)
        g0 = 1.2345
        table = expected_counts(ProbeParams(g0, 1.2, Target.POLAR), a, b, 10_000)
        r = mle_estimate(table, Target.POLAR, 1.2, w, (0.5, 2.0))
        assert r.estimate == pytest.approx(g0, abs=1e-6)

    def test_observed_fi_matches_oqfi_on_expected_counts(self):
        lam = 0.9
        a, b, w = mub_hovm(lam)
        g0 = math.pi / 2
        table = expected_counts(ProbeParams(g0, 0.0, Target.POLAR), a, b, 10_000)
        r = mle_estimate(table, Target.POLAR, 0.0, w, (1.0, 2.0))
        truth = oqfi(ProbeParams(g0, 0.0, Target.POLAR), w).value
        assert r.observed_fi == pytest.approx(truth, rel=1e-3)

    def test_flat_likelihood_raises(self):
        _, _, w = mub_hovm(0.0)
        table = CountTable(
            1000, np.array([500, 500]), np.array([[250, 250], [250, 250]]),
            np.full((2, 2), 250.0),
        )
        with pytest.raises(FlatLikelihood):
            mle_estimate(table, Target.POLAR, 0.0, w, (0.5, 2.5))

    def test_rmse_shrinks_with_sample_size(self):
        lam = 0.9
        a, b, w = mub_hovm(lam)
        g0 = 1.9
        params = ProbeParams(g0, 1.0, Target.POLAR)
        rmse = []
        for n in (10**3, 10**4, 10**5):
            children = np.random.SeedSequence(n).spawn(40)
            errs = []
            for child in children:
                t = sample_counts(params, a, b, n, child)
                if t.has_negative:
                    continue
                r = mle_estimate(t, Target.POLAR, 1.0, w, (1.5, 2.3))
                errs.append(r.estimate - g0)
            rmse.append(float(np.sqrt(np.mean(np.square(errs)))))
        assert rmse[0] > rmse[1] > rmse[2]


class TestLep:
    def test_exact_inversion_of_expected_counts(self):
        a, b, w = mub_hovm(0.9)
        g0 = 1.9
        table = expected_counts(ProbeParams(g0, 0.6, Target.POLAR), a, b, 10_000)
        r = lep_estimate(table, Target.POLAR, 0.6, w, (1.4, 2.4))
        assert r.estimate == pytest.approx(g0, abs=1e-6)

    def test_zero_slope_for_flat_model(self):
        a, b, w = mub_hovm(0.0)
        table = expected_counts(EQUATOR, a, b, 1000)
        with pytest.raises(ZeroSlope):
            lep_estimate(table, Target.POLAR, 0.0, w, (0.5, 2.5))

    def test_parity_mean_closed_form(self):
        # <O>_g = [1 + lam (cos t + sin t cos p)] / 2 by direct summation
        lam = 0.7
        a, b, w = mub_hovm(lam)
        theta, phi = 1.1, 0.4
        table = expected_counts(ProbeParams(theta, phi, Target.POLAR), a, b, 10_000)
        expected = (1 + lam * (math.cos(theta) + math.sin(theta) * math.cos(phi))) / 2
        assert parity_mean(table) == pytest.approx(expected, abs=1e-12)


class TestGoldenSection:
    def test_finds_parabola_peak(self):
        peak = golden_section_maximize(lambda x: -(x - 0.7) ** 2, 0.0, 2.0, 1e-9)
        assert peak == pytest.approx(0.7, abs=1e-8)


class TestRunTrials:
    def test_deterministic(self):
        cfg = TrialConfig(1.2, 1.0, Target.POLAR, 0.85, 2000, 8, 99,
                          domain=(0.8, 1.6))
        s1 = run_trials(cfg)
        s2 = run_trials(cfg)
        assert s1 == s2

    def test_compatible_sharpness_has_no_advantage(self):
        cfg = TrialConfig(math.pi / 2, 0.0, Target.POLAR, 0.6, 5000, 10, 7,
                          domain=(1.2, 2.0))
        s = run_trials(cfg)
        assert s.advantage <= math.log10(0.5) + 1e-9
        assert s.mle.ratio <= 0.15

    def test_injection_reproduces_advantage(self):
        cfg = TrialConfig(math.pi / 2, 0.0, Target.POLAR, 0.9, 100_000, 2, 0,
                          domain=(1.2, 2.0), inject_expected=True)
        s = run_trials(cfg)
        assert s.mle.ratio == pytest.approx(s.advantage, abs=1e-3)
        assert s.mle.mean_estimate == pytest.approx(math.pi / 2, abs=1e-6)

    def test_all_trials_omitted_on_degenerate_cells(self):
        # at full sharpness two quasiprobability cells are exactly zero, so
        # the assembled counts in those cells are +-(fluctuation) and almost
        # every trial is dropped
        cfg = TrialConfig(math.pi / 2, 0.0, Target.POLAR, 1.0, 1000, 5, 3,
                          domain=(1.2, 2.0))
        with pytest.raises(AllTrialsOmitted):
            run_trials(cfg)

    def test_trials_floor(self):
        cfg = TrialConfig(1.2, 0.5, Target.POLAR, 0.85, 100, 1, 0)
        with pytest.raises(ValueError):
            run_trials(cfg)

    def test_csv_rows_schema(self):
        cfg = TrialConfig(1.2, 1.0, Target.POLAR, 0.85, 2000, 5, 99,
                          domain=(0.8, 1.6))
        rows = summary_csv_rows(run_trials(cfg))
        assert len(rows) == 2
        assert rows[0][6] == "mle" and rows[1][6] == "lep"
        assert all(len(r) == 12 for r in rows)
