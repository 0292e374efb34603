import math

import numpy as np
import pytest

from bandit_bakery.dataspace import parse_dataset
from bandit_bakery.evalkit import (
    CfEstimate,
    DatasetFilter,
    Outcome,
    RunSummary,
    cf_ips_uniform,
    normal_cdf,
    normalized_loss,
    oaa_run,
    pv_loss,
    significance,
    win_loss_matrix,
)
from bandit_bakery.explorers import ExplorerConfig, Trace, run
from bandit_bakery.synth import linear_multiclass


def make_trace(costs, probs=None, actions=None):
    costs = np.asarray(costs, dtype=float)
    n = costs.shape[0]
    probs = np.ones(n) if probs is None else np.asarray(probs, dtype=float)
    actions = np.zeros(n, dtype=np.int64) if actions is None else \
        np.asarray(actions, dtype=np.int64)
    return Trace(probs, actions, costs.copy(), costs)


def erfc_cdf(z):
    """Independent high-precision normal CDF via the standard library."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


class TestPvLoss:
    def test_mean(self):
        assert pv_loss(make_trace([1, 0, 1, 0])) == 0.5

    def test_all_correct_is_zero(self):
        assert pv_loss(make_trace([0, 0, 0])) == 0.0

    def test_empty_trace_rejected(self):
        with pytest.raises(ValueError):
            pv_loss(make_trace([]))

    def test_encoding_invariant_under_pinned_actions(self):
        # the metric reads true costs only; encodings shift enc_losses
        costs = np.array([1.0, 0.0, 1.0])
        for offset in (-1.0, 0.0, 9.0):
            trace = Trace(np.ones(3), np.zeros(3, dtype=np.int64),
                          costs + offset, costs)
            assert pv_loss(trace) == pv_loss(make_trace(costs))


class TestNormalizedLoss:
    def test_equal_is_zero(self):
        assert normalized_loss(0.2, 0.2).value == 0.0

    def test_ratio(self):
        got = normalized_loss(0.3, 0.2)
        assert got.value == pytest.approx(0.5)
        assert not got.degenerate

    def test_degenerate_baseline(self):
        got = normalized_loss(0.1, 0.0)
        assert got.degenerate
        assert got.value == pytest.approx(0.1)


class TestOaa:
    def test_separable_stream_learns(self):
        ds = linear_multiclass(5000, n_actions=2, dim=10, seed=3, margin=0.5)
        assert oaa_run(ds, eta=0.5) <= 0.05

    def test_constant_label(self):
        ds = parse_dataset("K:2\n" + "\n".join("1 | 0:1" for _ in range(200)))
        assert oaa_run(ds, eta=0.5) <= 0.05

    def test_single_action_returns_mean_cost(self):
        ds = parse_dataset("\n".join("1:0.3 | 0:1" for _ in range(10)))
        assert oaa_run(ds, eta=0.5) == pytest.approx(0.3)


class TestNormalCdf:
    def test_against_stdlib_erfc(self):
        for z in np.linspace(-8, 8, 3000):
            assert abs(normal_cdf(float(z)) - erfc_cdf(float(z))) < 1e-7

    def test_erfc_reference_against_quadrature(self):
        # Simpson quadrature of the density: brute-force ground truth
        for z in (-3.0, -1.0, -0.5, 0.0, 0.7, 2.2):
            xs = np.linspace(-12.0, z, 20001)
            pdf = np.exp(-0.5 * xs ** 2) / math.sqrt(2 * math.pi)
            h = xs[1] - xs[0]
            simpson = (h / 3) * (pdf[0] + pdf[-1] + 4 * pdf[1:-1:2].sum()
                                 + 2 * pdf[2:-1:2].sum())
            assert abs(simpson - erfc_cdf(z)) < 1e-10


class TestSignificance:
    def test_equal_losses_tie(self):
        assert significance(0.3, 0.3, 500, 500) is Outcome.TIE

    def test_large_sample_win(self):
        # z about -6.32, far below the 5% one-sided threshold
        assert significance(0.10, 0.20, 1000, 1000) is Outcome.A_WINS

    def test_small_sample_tie(self):
        # same losses, n=10: z about -0.63, cdf about 0.26
        assert significance(0.10, 0.20, 10, 10) is Outcome.TIE

    def test_antisymmetric(self, rng):
        for _ in range(300):
            p_a, p_b = rng.random(2)
            n_a, n_b = rng.integers(1, 5000, size=2)
            fwd = significance(p_a, p_b, int(n_a), int(n_b))
            rev = significance(p_b, p_a, int(n_b), int(n_a))
            if fwd is Outcome.A_WINS:
                assert rev is Outcome.B_WINS
            elif fwd is Outcome.B_WINS:
                assert rev is Outcome.A_WINS
            else:
                assert rev is Outcome.TIE

    def test_swap_invariance(self, rng):
        for _ in range(100):
            p_a, p_b = rng.random(2)
            n_a, n_b = (int(v) for v in rng.integers(1, 2000, size=2))
            assert significance(p_a, p_b, n_a, n_b) is not None
            fwd = significance(p_a, p_b, n_a, n_b)
            swapped = significance(p_b, p_a, n_b, n_a)
            assert (fwd is Outcome.TIE) == (swapped is Outcome.TIE)

    def test_zero_se_lower_loss_wins(self):
        assert significance(0.0, 1.0, 50, 50) is Outcome.A_WINS
        assert significance(1.0, 0.0, 50, 50) is Outcome.B_WINS
        assert significance(0.0, 0.0, 50, 50) is Outcome.TIE

    def test_decisions_match_oracle(self, rng):
        def oracle(p_a, p_b, n_a, n_b):
            var = p_a * (1 - p_a) / n_a + p_b * (1 - p_b) / n_b
            if var <= 0:
                if p_a == p_b:
                    return Outcome.TIE
                return Outcome.A_WINS if p_a < p_b else Outcome.B_WINS
            z = (p_a - p_b) / math.sqrt(var)
            if erfc_cdf(z) < 0.05:
                return Outcome.A_WINS
            if erfc_cdf(-z) < 0.05:
                return Outcome.B_WINS
            return Outcome.TIE

        for _ in range(2000):
            p_a, p_b = rng.random(2)
            n_a, n_b = (int(v) for v in rng.integers(1, 10_000, size=2))
            assert significance(p_a, p_b, n_a, n_b) is \
                oracle(p_a, p_b, n_a, n_b)


class TestWinLossMatrix:
    def _summary(self, dataset, method, pv, n=2000, **meta):
        return RunSummary(dataset=dataset, method=method, pv_loss=pv,
                          n_rounds=n, **meta)

    def test_single_dataset_antisymmetric_entry(self):
        rows = [self._summary("d1", "a", 0.1), self._summary("d1", "b", 0.3)]
        methods, matrix, skipped = win_loss_matrix(rows)
        assert matrix[("a", "b")].wins == 1
        assert matrix[("a", "b")].losses == 0
        assert matrix[("b", "a")].wins == 0
        assert matrix[("b", "a")].losses == 1
        assert not skipped

    def test_method_against_itself_absent(self):
        rows = [self._summary("d1", "a", 0.1)]
        _, matrix, _ = win_loss_matrix(rows)
        assert ("a", "a") not in matrix

    def test_differences_sum_to_zero_per_pair(self, rng):
        rows = []
        for d in range(6):
            for m in ("a", "b", "c"):
                rows.append(self._summary(f"d{d}", m, float(rng.random())))
        methods, matrix, _ = win_loss_matrix(rows)
        for a in methods:
            for b in methods:
                if a != b:
                    assert matrix[(a, b)].difference + \
                        matrix[(b, a)].difference == 0

    def test_planted_orderings_match_brute_force(self):
        pvs = {"d1": {"a": 0.05, "b": 0.20, "c": 0.21},
               "d2": {"a": 0.30, "b": 0.10, "c": 0.30},
               "d3": {"a": 0.15, "b": 0.15, "c": 0.40}}
        rows = [self._summary(d, m, pv) for d, by in pvs.items()
                for m, pv in by.items()]
        methods, matrix, _ = win_loss_matrix(rows)
        for a in methods:
            for b in methods:
                if a == b:
                    continue
                wins = sum(significance(pvs[d][a], pvs[d][b], 2000, 2000)
                           is Outcome.A_WINS for d in pvs)
                losses = sum(significance(pvs[d][a], pvs[d][b], 2000, 2000)
                             is Outcome.B_WINS for d in pvs)
                assert matrix[(a, b)].wins == wins
                assert matrix[(a, b)].losses == losses

    def test_missing_runs_skipped_and_logged(self):
        rows = [self._summary("d1", "a", 0.1), self._summary("d1", "b", 0.4),
                self._summary("d2", "a", 0.2)]
        _, matrix, skipped = win_loss_matrix(rows)
        assert matrix[("a", "b")].wins == 1
        assert ("d2", "a", "b") in skipped

    def test_filters(self):
        rows = [self._summary("small", "a", 0.1, n_actions=2),
                self._summary("small", "b", 0.4, n_actions=2),
                self._summary("big", "a", 0.4, n_actions=8),
                self._summary("big", "b", 0.1, n_actions=8)]
        _, matrix, _ = win_loss_matrix(
            rows, dataset_filter=DatasetFilter(min_actions=5))
        assert matrix[("a", "b")].wins == 0
        assert matrix[("a", "b")].losses == 1

    def test_reshuffles_averaged(self):
        rows = [self._summary("d1", "a", 0.1), self._summary("d1", "a", 0.2),
                self._summary("d1", "b", 0.5)]
        _, matrix, _ = win_loss_matrix(rows)
        assert matrix[("a", "b")].wins == 1


class TestCfIpsUniform:
    def test_uniform_logging_is_exact(self):
        trace = make_trace([0, 1, 1, 0], probs=[0.5] * 4)
        got = cf_ips_uniform(trace, 2, "reward")
        assert got == CfEstimate(0.5, 0.0)

    def test_greedy_logging_plug_in(self):
        costs = np.array([0.0, 1.0, 0.0, 0.0])
        trace = make_trace(costs, probs=np.ones(4))
        got = cf_ips_uniform(trace, 2, "reward")
        expected = 1.0 - np.mean((1 - costs) / 2.0)
        assert got.estimate == pytest.approx(expected)
        assert got.squared_error > 0.0

    def test_loss_mode(self):
        trace = make_trace([0, 1, 1, 0], probs=[0.5] * 4)
        got = cf_ips_uniform(trace, 2, "loss")
        assert got.estimate == pytest.approx(0.5)
        assert got.squared_error == pytest.approx(0.0)

    def test_unbiased_under_full_support_brute_force(self):
        # enumerate every action sequence on an n=2, K=2 instance
        losses = np.array([[0.0, 1.0], [1.0, 0.0]])
        p = np.array([[0.7, 0.3], [0.4, 0.6]])
        expectation = 0.0
        for a0 in range(2):
            for a1 in range(2):
                weight = p[0, a0] * p[1, a1]
                trace = make_trace([losses[0, a0], losses[1, a1]],
                                   probs=[p[0, a0], p[1, a1]],
                                   actions=[a0, a1])
                expectation += weight * cf_ips_uniform(trace, 2).estimate
        assert expectation == pytest.approx(0.5, abs=1e-12)

    def test_egreedy_logs_give_small_error(self):
        ds = linear_multiclass(4000, n_actions=3, dim=10, seed=9, flip=0.05)
        trace = run(ds, ExplorerConfig(algo="egreedy", epsilon=0.1, eta=0.5,
                                       seed=0))
        assert cf_ips_uniform(trace, 3, "reward").squared_error <= 1e-3

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            cf_ips_uniform(make_trace([0.0]), 2, "snips")
