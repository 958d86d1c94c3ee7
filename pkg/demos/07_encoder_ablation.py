"""
Encoder ablation
================

Same data, same ranker, same training budget, different triplet encodings.
The kronecker product exposes every bilinear interaction between the query
and the support difference to a single linear readout, so it converges well
inside the budget; disparity only sees coordinatewise distances, which the
mirror flips and radius jitter scramble; pairwise_concat_diff never looks
at the query at all, so it is a built-in chance control; triple_concat has
no linearly readable match statistic and is still at chance when the budget
runs out.  The full training budget is kept here (it is what separates the
schemes); only the episode count is reduced.
"""

from dataclasses import replace

from rankdnn import ablate, nonlinear

config = replace(nonlinear(), episodes=60)
schemes = ("kronecker", "disparity", "pairwise_concat_diff", "triple_concat")

rows = ablate(config, schemes)
chance = 1.0 / config.n_way
print(f"{config.n_way}-way chance = {100 * chance:.1f}%\n")
for row in rows:
    if row.error is not None:
        print(f"{row.scheme:22s} ERROR {row.error}")
    else:
        print(f"{row.scheme:22s} {100 * row.report.mean_accuracy:5.1f}% "
              f"+- {100 * row.report.ci95:.1f}")
