#include "afc/efficiency.hpp"

#include <cmath>

#include "afc/errors.hpp"

namespace afc {

double analytic_efficiency(double peak_depth, double finesse,
                           double background) {
    if (!(peak_depth >= 0.0)) throw ConfigError("peak depth must be >= 0");
    if (!(finesse > 0.0)) throw ConfigError("finesse must be positive");
    if (!(background >= 0.0)) throw ConfigError("background must be >= 0");
    const double r = peak_depth / finesse;
    return r * r * std::exp(-r) * std::exp(-7.0 / (finesse * finesse)) *
           std::exp(-background);
}

double optimal_finesse(double peak_depth) {
    if (!(peak_depth >= 0.0)) throw ConfigError("peak depth must be >= 0");
    return 0.25 * (peak_depth + std::sqrt(peak_depth * peak_depth + 112.0));
}

}  // namespace afc
