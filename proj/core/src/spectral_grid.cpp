#include "afc/spectral_grid.hpp"

#include <cmath>
#include <string>

#include "afc/errors.hpp"

namespace afc {

namespace {
bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }
}  // namespace

SpectralGrid::SpectralGrid(double f_center_mhz, double span_mhz,
                           std::size_t n_points)
    : f_center_(f_center_mhz), span_(span_mhz), n_(n_points) {
    if (!(span_ > 0.0) || !std::isfinite(span_))
        throw GridError("spectral grid span must be positive and finite");
    if (!std::isfinite(f_center_))
        throw GridError("spectral grid center must be finite");
    if (!is_power_of_two(n_))
        throw GridError("spectral grid size must be a power of two >= 2, got " +
                        std::to_string(n_));
}

std::size_t SpectralGrid::index_of(double f_mhz) const {
    const double x = (f_mhz - frequency(0)) / df();
    if (x <= 0.0) return 0;
    const auto k = static_cast<std::size_t>(std::llround(x));
    return k >= n_ ? n_ - 1 : k;
}

SpectralGrid SpectralGrid::default_comb_grid() {
    return SpectralGrid(0.0, 1000.0, std::size_t{1} << 20);
}

}  // namespace afc
