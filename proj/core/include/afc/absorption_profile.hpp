#pragma once

#include <string>
#include <vector>

#include "afc/spectral_grid.hpp"

namespace afc {

// Sampled optical depth d(f) on a spectral grid. Depth is the base-e
// intensity attenuation exponent for a single pass; `passes` records whether
// the beam traverses the sample once or twice (double-pass setups double the
// depth seen by the light without changing the stored array).
struct AbsorptionProfile {
    AbsorptionProfile(SpectralGrid grid, std::vector<double> depth,
                      int passes = 1);

    SpectralGrid grid;
    std::vector<double> depth;
    int passes;

    /// Depth experienced by the beam at index k (passes folded in).
    double effective_depth(std::size_t k) const {
        return passes * depth[k];
    }
    std::vector<double> effective_depths() const;
};

AbsorptionProfile make_flat_profile(const SpectralGrid& grid, double depth,
                                    int passes = 1);

/// Two-column comma-separated dump (frequency_MHz, depth) with `#` header
/// lines carrying the grid metadata; loads back bit-exactly.
void save_profile_csv(const AbsorptionProfile& profile,
                      const std::string& path);
AbsorptionProfile load_profile_csv(const std::string& path);

}  // namespace afc
