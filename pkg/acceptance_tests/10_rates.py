"""
Rate reproduction on seed-fixed perturbed meshes. These runs take minutes;
deselect them with ``-m "not slow"``.
"""

import numpy as np
import pytest

from reggecurv.study import StudyConfig, averaged_rates, run_convergence


def mean_tail_rate(rates, column):
    return float(np.mean(rates[column].values[-2:]))


@pytest.mark.slow
@pytest.mark.parametrize("k, level_max", [(1, 5), (2, 5), (3, 4)])
def lifting_degree_k_test(k, level_max):
    config = StudyConfig(metric_degree=k, lift_offset=0, level_min=1, level_max=level_max, seed=0, verbosity=0)
    _, rates = run_convergence(config)

    for suffix in ("Kw", "K"):
        assert mean_tail_rate(rates, "err_L2_" + suffix) == pytest.approx(k + 1, abs=0.25)
        assert mean_tail_rate(rates, "err_Hm1_" + suffix) == pytest.approx(k + 2, abs=0.25)


@pytest.mark.slow
@pytest.mark.parametrize("offset, expected", [(-1, 3), (0, 4), (1, 3), (2, 2)])
def lifting_offset_test(offset, expected):
    # single-seed rates on levels 1-3 scatter by several tenths
    config = StudyConfig(metric_degree=2, lift_offset=offset, level_min=1, level_max=5, verbosity=0)
    _, rates = averaged_rates(config, seeds=[0, 1])
    assert mean_tail_rate(rates, "err_Hm1_Kw") == pytest.approx(expected, abs=0.3)


@pytest.mark.slow
def l2_error_ratio_test():
    config = StudyConfig(metric_degree=1, lift_offset=0, level_min=2, level_max=4, seed=1, verbosity=0)
    records, _ = run_convergence(config)
    ratios = [a.err_L2_Kw / b.err_L2_Kw for a, b in zip(records[:-1], records[1:])]
    assert all(3.0 < ratio < 5.5 for ratio in ratios)
