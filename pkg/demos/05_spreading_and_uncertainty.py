"""
Spreading and the uncertainty product
=====================================

A particle that takes independent steps spreads like sqrt(N); its step
distribution forgets its shape.  Averaging metric noise over a volume
shrinks its variance like 1/V, which makes position spread times metric
spread a constant.
"""

import numpy as np

from stochastic_spacetime.particle_stats import (
    GridDistribution,
    MetricFluctuationSpec,
    iterated_spread,
    metric_average_variance,
    uncertainty_product,
    uniform_grid,
)
from stochastic_spacetime.rng import RngStream

for name, d1 in {
    "uniform {-1,0,1}": uniform_grid(-1, 1),
    "two-point {-1,1}": GridDistribution.from_weights(-1, 1.0, [1, 0, 1]),
    "lopsided {0,2}": GridDistribution.from_weights(0, 1.0, [0.7, 0, 0.3]),
}.items():
    res = iterated_spread(d1, 200)
    print(f"{name:18s} var/N slope {res.slope:.5f}  skew {res.skew:+.4f}  excess kurtosis {res.excess_kurtosis:+.4f}")

rng = RngStream(5)
for law in ("normal", "uniform", "bimodal"):
    rows, slope = metric_average_variance(MetricFluctuationSpec(1.0, law), [1, 10, 100, 1000], 4000, rng)
    print(f"\n{law}: log-log slope {slope:.3f}")
    for m, v in rows:
        print(f"  m={m:5d}  var {v:.2e}")

recs = uncertainty_product(MetricFluctuationSpec(1.0), 1.0, [1, 2, 4, 8, 16], rng)
print("\nvolume  dq    dg        product")
for r in recs:
    print(f"{r.volume:6.0f}  {r.delta_q:4.0f}  {r.delta_g:.2e}  {r.product:.4f}")
print(f"relative spread {np.ptp([r.product for r in recs]) / np.mean([r.product for r in recs]):.3f}")
