"""Randomized safety properties on a smaller sample.

The full 1000-scenario suite runs in the acceptance module; this keeps a
quick seeded slice in the regular test pass.
"""

from .fuzz_support import run_safety_suite


def test_safety_properties_hold_on_sample():
    stats = run_safety_suite(120, master_seed=77)
    assert stats.trials == 120
    # the sample actually exercised the interesting paths
    assert stats.hazardous_ticks > 0
    assert stats.timeout_aborts > 0
    assert set(stats.by_variant) == {
        "autonomous",
        "human_intervention",
        "pain_ladder",
        "baseline",
    }
