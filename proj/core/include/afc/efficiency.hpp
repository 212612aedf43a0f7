#pragma once

namespace afc {

/// Forward-recall efficiency of a Gaussian-tooth comb:
///   eta = (d/F)^2 exp(-d/F) exp(-7/F^2) exp(-d0).
/// The factors are, in order: collective coupling, re-absorption of the
/// re-emitted light, intrinsic finesse dephasing, and background loss.
double analytic_efficiency(double peak_depth, double finesse,
                           double background);

/// Finesse maximizing analytic_efficiency at fixed d and d0, the root of
/// -2F^2 + dF + 14 = 0:  F* = (d + sqrt(d^2 + 112)) / 4.
double optimal_finesse(double peak_depth);

}  // namespace afc
