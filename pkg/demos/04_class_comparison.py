"""
Do the two instance classes build differently shaped networks?
==============================================================

Runs the batch harness over both generators and compares modularity
distributions.  The quick default (n=7, 8 instances per class) finishes
in seconds but is too small and too lightly filtered to separate the
classes; run with --full for the configuration where the separation
shows up clearly (n=9, alpha=0.9, a few minutes).
"""

import sys

from qaplon import ExperimentConfig, format_summary, run_experiment, summarize

FULL = "--full" in sys.argv

if FULL:
    print("full mode: 10 instances per class at n=9, expect a few minutes")
    cfg = ExperimentConfig(
        sizes={"uniform": 9, "real_like": 9},
        count=10,
        master_seed=7,
        alpha=0.9,  # keep only the strongest 10% of transitions
    )
else:
    cfg = ExperimentConfig(
        sizes={"uniform": 7, "real_like": 7},
        count=8,
        master_seed=7,
        alpha=0.05,
    )

records = run_experiment(cfg)
print(format_summary(summarize(records)))

# what to look for: with --full the real_like medians sit clearly above
# the uniform ones for both detectors and the one-sided Mann-Whitney p
# drops under 0.05.  At desk scale without the strong filter the effect
# is absent (sometimes even reversed), because real_like instances have
# far fewer optima at equal n and their dense low-weight edges wash the
# community structure out.
