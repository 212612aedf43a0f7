#pragma once

#include <cstddef>

namespace afc {

// Uniform spectral grid shared by absorption profiles, pump spectra and
// transfer functions. Frequencies are in MHz project-wide; the matched time
// axis (dt = 1/span) is then in microseconds.
class SpectralGrid {
public:
    SpectralGrid(double f_center_mhz, double span_mhz, std::size_t n_points);

    double f_center() const { return f_center_; }
    double span() const { return span_; }
    std::size_t n_points() const { return n_; }

    double df() const { return span_ / static_cast<double>(n_); }
    /// Grid frequency at index k: f_center - span/2 + k*df.
    double frequency(std::size_t k) const {
        return f_center_ - 0.5 * span_ + static_cast<double>(k) * df();
    }
    /// Detuning from the grid center (the carrier) at index k.
    double detuning(std::size_t k) const {
        return frequency(k) - f_center_;
    }
    /// Index of the grid point nearest to frequency f, clamped to the grid.
    std::size_t index_of(double f_mhz) const;

    /// Sampling interval of a time-domain waveform matched to this grid, us.
    double dt() const { return 1.0 / span_; }
    /// Total time window covered by a matched waveform, us.
    double time_window() const { return static_cast<double>(n_) * dt(); }

    bool operator==(const SpectralGrid& other) const {
        return f_center_ == other.f_center_ && span_ == other.span_ &&
               n_ == other.n_;
    }
    bool operator!=(const SpectralGrid& other) const {
        return !(*this == other);
    }

    /// Default working grid for ~100 MHz wide combs: 2^20 points over 1 GHz
    /// (df ~ 0.95 kHz), fine enough to resolve gamma = delta/F with >= 40
    /// points down to delta = 1 MHz at F = 3.
    static SpectralGrid default_comb_grid();

private:
    double f_center_;
    double span_;
    std::size_t n_;
};

}  // namespace afc
