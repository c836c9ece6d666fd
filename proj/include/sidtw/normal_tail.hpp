#pragma once

namespace sidtw {

// log P(Z >= x) for Z ~ N(0, 1). Accurate in the far upper tail, where
// erfc underflows.
double log_normal_sf(double x);

// log of the Mills ratio R(x) = P(Z >= x) / φ(x), for x >= 0.
double log_mills_ratio(double x);

// log P(lo <= Z <= hi) for Z ~ N(0, 1); -inf when lo >= hi. Same-side
// intervals are evaluated as a tail times a relative decrement so that
// far-tail and narrow intervals keep full relative precision.
double log_normal_interval_mass(double lo, double hi);

// Standard normal quantile.
double normal_quantile(double p);

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace sidtw
