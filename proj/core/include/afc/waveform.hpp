#pragma once

#include <complex>
#include <string>
#include <vector>

#include "afc/errors.hpp"
#include "afc/fft.hpp"
#include "afc/spectral_grid.hpp"

namespace afc {

// Complex field envelope sampled in time. Durations quoted anywhere in the
// project (pulse FWHM and friends) refer to the intensity profile |s|^2,
// matching how pulse lengths are measured on a detector.
struct Waveform {
    Waveform() = default;
    Waveform(std::vector<cdouble> samples_, double dt_, double t0_ = 0.0);

    std::vector<cdouble> samples;
    double dt = 0.0;
    double t0 = 0.0;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    /// Integrated intensity sum |s|^2 dt.
    double energy() const;
    /// Integrated intensity restricted to [t_lo, t_hi].
    double energy_in(double t_lo, double t_hi) const;
    /// Energy-weighted mean arrival time within [t_lo, t_hi].
    double centroid_in(double t_lo, double t_hi) const;
};

/// Gaussian pulse with the given intensity FWHM, peak field amplitude and
/// carrier phase, sampled on n_samples points spaced dt starting at t0.
Waveform make_gaussian_pulse(double t_center_us, double fwhm_us,
                             double amplitude, double phase, double dt_us,
                             std::size_t n_samples, double t0_us = 0.0);
Waveform make_gaussian_pulse(double t_center_us, double fwhm_us,
                             double amplitude, double phase,
                             const SpectralGrid& grid);

/// Train of Gaussian modes at t_first + k*separation with per-mode complex
/// amplitudes; used for multimode and time-bin inputs. If a positive
/// storage_time is given, warns when the train outlasts it.
Waveform make_time_bin_train(std::size_t n_modes, double separation_us,
                             double fwhm_us,
                             const std::vector<double>& amplitudes,
                             const std::vector<double>& phases, double dt_us,
                             std::size_t n_samples, double t_first_us,
                             double t0_us = 0.0, double storage_time_us = 0.0,
                             WarningList* warnings = nullptr);

/// Comma-separated dump (time_us, re, im) with a `#` header; round-trips
/// bit-exactly.
void save_waveform_csv(const Waveform& w, const std::string& path);
Waveform load_waveform_csv(const std::string& path);

}  // namespace afc
