#include "afc/comb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace afc {

namespace {
constexpr double kFourLn2 = 4.0 * std::numbers::ln2;

double peak_value(PeakShape shape, double x) {
    switch (shape) {
        case PeakShape::Gaussian:
            return std::exp(-kFourLn2 * x * x);
        case PeakShape::Square:
            return std::abs(x) <= 0.5 ? 1.0 : 0.0;
    }
    return 0.0;
}
}  // namespace

int CombSpec::n_peaks() const {
    return static_cast<int>(std::floor(bandwidth_mhz / delta_mhz)) + 1;
}

void CombSpec::validate() const {
    if (!(delta_mhz > 0)) throw ConfigError("comb delta must be positive");
    if (!(finesse > 1)) throw ConfigError("comb finesse must exceed 1");
    if (!(peak_depth >= 0)) throw ConfigError("comb peak depth must be >= 0");
    if (!(background >= 0)) throw ConfigError("comb background must be >= 0");
    if (!(bandwidth_mhz >= delta_mhz))
        throw ConfigError("comb bandwidth must be at least one period");
}

AbsorptionProfile build_comb(const CombSpec& spec, const SpectralGrid& grid,
                             EdgeRule edge, WarningList* warnings) {
    spec.validate();

    if (grid.span() < spec.bandwidth_mhz + 4.0 * spec.delta_mhz)
        throw GridError("grid span " + std::to_string(grid.span()) +
                        " MHz too narrow for comb bandwidth " +
                        std::to_string(spec.bandwidth_mhz) + " MHz");
    const double df_limit = spec.delta_mhz / (8.0 * spec.finesse);
    if (grid.df() > df_limit)
        throw GridError("grid too coarse: df = " + std::to_string(grid.df()) +
                        " MHz exceeds delta/(8 F) = " +
                        std::to_string(df_limit) + " MHz");
    if (spec.finesse < 2.0)
        warn(warnings, "comb finesse < 2: neighbouring teeth overlap");

    const std::size_t n = grid.n_points();
    const double gamma = spec.gamma_mhz();
    const double comb_center = grid.f_center() + spec.center_offset_mhz;

    // Background envelope: flat d0 across the pumped region (band plus half
    // a period on each side), then per edge rule.
    std::vector<double> depth(n, 0.0);
    const double hold_lo = comb_center - 0.5 * spec.bandwidth_mhz - 0.5 * spec.delta_mhz;
    const double hold_hi = comb_center + 0.5 * spec.bandwidth_mhz + 0.5 * spec.delta_mhz;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = grid.frequency(k);
        double envelope = 1.0;
        if (edge == EdgeRule::RaisedCosineToZero) {
            if (f < hold_lo) {
                const double x = (hold_lo - f) / spec.delta_mhz;
                envelope = x >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * x));
            } else if (f > hold_hi) {
                const double x = (f - hold_hi) / spec.delta_mhz;
                envelope = x >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * x));
            }
        }
        depth[k] = spec.background * envelope;
    }

    // Teeth at comb_center + m*delta for the n_peaks() positions spanning
    // the bandwidth. Each Gaussian is evaluated only within +-8 gamma.
    const int np = spec.n_peaks();
    const int m_lo = -((np - 1) / 2);
    const int m_hi = m_lo + np - 1;
    const double reach = (spec.peak_shape == PeakShape::Gaussian)
                             ? 8.0 * gamma
                             : 0.5 * gamma + grid.df();
    for (int m = m_lo; m <= m_hi; ++m) {
        const double f_peak = comb_center + m * spec.delta_mhz;
        const auto k_lo = grid.index_of(f_peak - reach);
        const auto k_hi = grid.index_of(f_peak + reach);
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const double x = (grid.frequency(k) - f_peak) / gamma;
            depth[k] += spec.peak_depth * peak_value(spec.peak_shape, x);
        }
    }

    return AbsorptionProfile(grid, std::move(depth), 1);
}

AbsorptionProfile superpose_combs(const AbsorptionProfile& a,
                                  const AbsorptionProfile& b,
                                  double common_background) {
    if (a.grid != b.grid)
        throw GridError("superpose_combs: profiles live on different grids");
    if (a.passes != b.passes)
        throw GridError("superpose_combs: profiles have different pass counts");
    std::vector<double> depth(a.depth.size());
    for (std::size_t k = 0; k < depth.size(); ++k)
        depth[k] = std::max(0.0, a.depth[k] + b.depth[k] - common_background);
    return AbsorptionProfile(a.grid, std::move(depth), a.passes);
}

AbsorptionProfile superpose_combs(const AbsorptionProfile& a,
                                  const AbsorptionProfile& b) {
    if (a.grid != b.grid)
        throw GridError("superpose_combs: profiles live on different grids");
    const double peak = std::max(*std::max_element(a.depth.begin(), a.depth.end()),
                                 *std::max_element(b.depth.begin(), b.depth.end()));
    const double eps = 1e-12 * peak;
    double common = 0.0;
    bool joint = false;
    for (std::size_t k = 0; k < a.depth.size(); ++k) {
        if (a.depth[k] > eps && b.depth[k] > eps) {
            const double lower = std::min(a.depth[k], b.depth[k]);
            common = joint ? std::min(common, lower) : lower;
            joint = true;
        }
    }
    return superpose_combs(a, b, joint ? common : 0.0);
}

}  // namespace afc
