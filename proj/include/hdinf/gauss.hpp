#pragma once

namespace hdinf {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile, Wichura's AS 241 (PPND16). Accurate to about
// 1e-15 over (0,1); throws InvalidLevel outside the open interval.
double inverse_normal_cdf(double p);

} // namespace hdinf
