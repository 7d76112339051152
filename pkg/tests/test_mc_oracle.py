import math

import numpy as np
import pytest

from besselmax.errors import DomainError
from besselmax.maxdist import prob_brownian_reflect, prob_pitman_yor
from besselmax.mc_oracle import (BATCH, McConfig, _batch_sizes, _skeleton, estimate_cdf,
                                 sample_bridge_max, stream)


class TestConfig:
    def test_alpha_from_dim(self):
        assert McConfig(3, 0.0, 2.0).alpha == 0.5
        assert McConfig(1, 0.0, 2.0).alpha == -0.5

    @pytest.mark.parametrize("kw", [dict(dim=0), dict(dim=2.5), dict(grid_points=512),
                                    dict(grid_points=3000), dict(samples=0), dict(seed=-1),
                                    dict(start=-1.0), dict(wall=math.inf)])
    def test_rejects(self, kw):
        base = dict(dim=3, start=0.0, wall=2.0)
        base.update(kw)
        with pytest.raises(DomainError):
            McConfig(**base)


class TestSampling:
    def test_streams_reproducible_and_distinct(self):
        a = stream(7, 0).standard_normal(4)
        assert np.array_equal(a, stream(7, 0).standard_normal(4))
        assert not np.array_equal(a, stream(7, 1).standard_normal(4))

    def test_skeleton_endpoints(self):
        x = _skeleton(stream(1, 0), 5, 3, 1.7, 64)
        assert np.allclose(x[:, 0, 0], 1.7) and np.allclose(x[:, 0, 1:], 0)
        assert np.allclose(x[:, -1, :], 0)

    def test_bridge_covariance(self):
        # Var B(t) = t(1-t) at t = 1/4
        x = _skeleton(stream(3, 0), 40000, 1, 0.0, 4)
        assert abs(x[:, 1, 0].var() - 3 / 16) < 0.01

    def test_max_at_least_start(self):
        cfg = McConfig(2, 1.3, 4.0, grid_points=1024)
        rng = stream(0, 0)
        assert all(sample_bridge_max(cfg, rng) >= 1.3 for _ in range(20))

    def test_batches(self):
        assert _batch_sizes(10000) == [BATCH, BATCH, 10000 - 2 * BATCH]
        assert _batch_sizes(BATCH) == [BATCH]


class TestEstimate:
    def test_wall_at_start(self):
        e = estimate_cdf(McConfig(3, 2.0, 2.0, samples=100))
        assert e.p_hat == 0.0

    def test_deterministic(self):
        cfg = McConfig(3, 0.0, 1.5, 2 ** 10, 5000, 99)
        assert estimate_cdf(cfg) == estimate_cdf(cfg)

    def test_worker_count_irrelevant(self):
        cfg = McConfig(2, 0.5, 2.0, 2 ** 10, 9000, 5)
        assert estimate_cdf(cfg, workers=1) == estimate_cdf(cfg, workers=2)

    def test_std_err_formula(self):
        e = estimate_cdf(McConfig(1, 0.0, 1.0, 2 ** 10, 4000, 1))
        assert e.std_err == pytest.approx(math.sqrt(e.p_hat * (1 - e.p_hat) / e.samples))

    def test_finer_grid_lowers_estimate(self):
        e = estimate_cdf(McConfig(1, 0.0, 1.2, 2 ** 10, 20000, 4))
        assert e.p_hat_fine <= e.p_hat and e.bias_bracket > 0 and "upward" in e.bias_note

    def test_grid_trend_over_seeds(self):
        coarse = [estimate_cdf(McConfig(3, 0.0, 1.5, 2 ** 10, 4000, s)).p_hat for s in range(5)]
        fine = [estimate_cdf(McConfig(3, 0.0, 1.5, 2 ** 13, 4000, s)).p_hat for s in range(5)]
        assert np.mean(fine) <= np.mean(coarse)

    def test_three_dimensional_against_analytic(self):
        e = estimate_cdf(McConfig(3, 0.0, 2.0, 2 ** 14, 100_000, 7))
        p = float(prob_pitman_yor(0.5, 2.0).value)
        assert abs(e.p_hat - p) <= 3 * e.std_err + e.bias_bracket

    def test_one_dimensional_against_analytic(self):
        e = estimate_cdf(McConfig(1, 0.0, 1.5, 2 ** 14, 100_000, 7))
        p = float(prob_brownian_reflect(1, 1.5).value)
        assert abs(e.p_hat - p) <= 3 * e.std_err + e.bias_bracket

    def test_median_of_kolmogorov_law(self):
        # the |bridge| maximum has median 0.8276; P at that wall is 1/2
        e = estimate_cdf(McConfig(1, 0.0, 0.8276, 2 ** 12, 20000, 11))
        p = float(prob_brownian_reflect(1, 0.8276).value)
        assert abs(p - 0.5) < 1e-3
        assert abs(e.p_hat - p) <= 3 * e.std_err + e.bias_bracket

    @pytest.mark.slow
    def test_clt_coverage(self):
        p = float(prob_pitman_yor(0.5, 2.0).value)
        hits = 0
        for seed in range(20):
            e = estimate_cdf(McConfig(3, 0.0, 2.0, 2 ** 12, 20000, 1000 + seed))
            hits += abs(e.p_hat - p) <= 2.576 * e.std_err + e.bias_bracket
        assert hits >= 18
