#pragma once

namespace vcrisk {

/// Standard normal CDF.
double normal_cdf(double x);

/// log of the standard normal CDF, finite far into the lower tail.
double normal_log_cdf(double x);

/// Standard normal quantile, accurate to ~1e-15 relative over (0, 1).
/// Rational approximation followed by one Halley step against erfc.
/// Throws Error(OutOfRange) outside (0, 1).
double normal_quantile(double p);

/// Unrefined rational approximation (relative error below 1.2e-9). Used to
/// turn uniforms into normal variates in the simulation hot loop; the
/// argument must already lie in (0, 1).
double normal_quantile_fast(double p) noexcept;

}  // namespace vcrisk
