#pragma once

#include "afc/absorption_profile.hpp"
#include "afc/errors.hpp"
#include "afc/spectral_grid.hpp"

namespace afc {

enum class PeakShape { Gaussian, Square };

// How the background behaves outside the pumped bandwidth. The physical
// line extends far beyond the grid, but an abrupt step rings in the
// minimum-phase reconstruction, so the default ramps the background to zero
// over one tooth period with a raised cosine.
enum class EdgeRule { RaisedCosineToZero, HoldBackground };

// Parametric description of a target comb: tooth spacing delta, finesse
// F = delta/gamma (gamma the tooth FWHM), peak depth d above a flat
// background d0, total bandwidth, and the detuning of the comb center from
// the carrier.
struct CombSpec {
    double delta_mhz = 10.0;
    double finesse = 2.7;
    double peak_depth = 1.7;
    double background = 0.5;
    double bandwidth_mhz = 100.0;
    double center_offset_mhz = 0.0;
    PeakShape peak_shape = PeakShape::Gaussian;

    /// Tooth FWHM gamma = delta / F.
    double gamma_mhz() const { return delta_mhz / finesse; }
    /// Number of teeth: floor(bandwidth/delta) + 1.
    int n_peaks() const;

    void validate() const;
};

/// Samples the comb onto the grid: depth(f) = d0 + sum_m d * peak((f -
/// offset - m*delta)/gamma), teeth confined to the stated bandwidth, the
/// background handled by the edge rule beyond it.
///
/// Requires grid.span >= bandwidth + 4*delta and df <= delta/(8*finesse)
/// (throws GridError otherwise). Warns when finesse < 2, where neighbouring
/// teeth overlap appreciably.
AbsorptionProfile build_comb(const CombSpec& spec, const SpectralGrid& grid,
                             EdgeRule edge = EdgeRule::RaisedCosineToZero,
                             WarningList* warnings = nullptr);

/// Pointwise sum of two profiles on the same grid with their common flat
/// background counted once; used to assemble double-comb targets where
/// coincident teeth add. The explicit-background overload subtracts exactly
/// that value; the two-argument form estimates the common background as the
/// smallest depth where both profiles are non-vanishing.
AbsorptionProfile superpose_combs(const AbsorptionProfile& a,
                                  const AbsorptionProfile& b,
                                  double common_background);
AbsorptionProfile superpose_combs(const AbsorptionProfile& a,
                                  const AbsorptionProfile& b);

}  // namespace afc
