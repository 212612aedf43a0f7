#include "afc/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afc/io_util.hpp"

namespace afc {

namespace {
// Field envelope of a pulse whose intensity FWHM is w: |s|^2 = exp(-4 ln2
// (t/w)^2), so the field carries half the exponent.
double gaussian_field(double t, double fwhm) {
    const double x = t / fwhm;
    return std::exp(-2.0 * std::numbers::ln2 * x * x);
}
}  // namespace

Waveform::Waveform(std::vector<cdouble> samples_, double dt_, double t0_)
    : samples(std::move(samples_)), dt(dt_), t0(t0_) {
    if (!(dt > 0.0)) throw WaveformError("waveform dt must be positive");
    double e = 0.0;
    for (const auto& s : samples) e += std::norm(s);
    if (!std::isfinite(e)) throw WaveformError("waveform energy must be finite");
}

double Waveform::energy() const {
    double e = 0.0;
    for (const auto& s : samples) e += std::norm(s);
    return e * dt;
}

double Waveform::energy_in(double t_lo, double t_hi) const {
    double e = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double t = time(k);
        if (t >= t_lo && t <= t_hi) e += std::norm(samples[k]);
    }
    return e * dt;
}

double Waveform::centroid_in(double t_lo, double t_hi) const {
    double e = 0.0, te = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double t = time(k);
        if (t >= t_lo && t <= t_hi) {
            const double w = std::norm(samples[k]);
            e += w;
            te += w * t;
        }
    }
    return e > 0.0 ? te / e : 0.5 * (t_lo + t_hi);
}

Waveform make_gaussian_pulse(double t_center_us, double fwhm_us,
                             double amplitude, double phase, double dt_us,
                             std::size_t n_samples, double t0_us) {
    if (!(fwhm_us > 0.0)) throw WaveformError("pulse FWHM must be positive");
    std::vector<cdouble> s(n_samples, cdouble(0.0, 0.0));
    if (amplitude != 0.0) {
        const cdouble a = amplitude * std::polar(1.0, phase);
        for (std::size_t k = 0; k < n_samples; ++k) {
            const double t = t0_us + static_cast<double>(k) * dt_us - t_center_us;
            if (std::abs(t) < 8.0 * fwhm_us)
                s[k] = a * gaussian_field(t, fwhm_us);
        }
    }
    return Waveform(std::move(s), dt_us, t0_us);
}

Waveform make_gaussian_pulse(double t_center_us, double fwhm_us,
                             double amplitude, double phase,
                             const SpectralGrid& grid) {
    return make_gaussian_pulse(t_center_us, fwhm_us, amplitude, phase,
                               grid.dt(), grid.n_points(), 0.0);
}

Waveform make_time_bin_train(std::size_t n_modes, double separation_us,
                             double fwhm_us,
                             const std::vector<double>& amplitudes,
                             const std::vector<double>& phases, double dt_us,
                             std::size_t n_samples, double t_first_us,
                             double t0_us, double storage_time_us,
                             WarningList* warnings) {
    if (amplitudes.size() != n_modes || phases.size() != n_modes)
        throw WaveformError("amplitude/phase arrays must have one entry per mode");
    if (!(separation_us > 0.0))
        throw WaveformError("mode separation must be positive");
    if (storage_time_us > 0.0 &&
        static_cast<double>(n_modes) * separation_us >= storage_time_us)
        warn(warnings,
             "input train outlasts the storage time; late modes overlap the "
             "first echoes");

    std::vector<cdouble> s(n_samples, cdouble(0.0, 0.0));
    for (std::size_t m = 0; m < n_modes; ++m) {
        if (amplitudes[m] == 0.0) continue;
        const double tc = t_first_us + static_cast<double>(m) * separation_us;
        const cdouble a = amplitudes[m] * std::polar(1.0, phases[m]);
        const auto k_lo = static_cast<std::size_t>(std::max(
            0.0, std::floor((tc - 8.0 * fwhm_us - t0_us) / dt_us)));
        const auto k_hi = static_cast<std::size_t>(std::max(
            0.0, std::ceil((tc + 8.0 * fwhm_us - t0_us) / dt_us)));
        for (std::size_t k = k_lo; k < std::min(k_hi, n_samples); ++k) {
            const double t = t0_us + static_cast<double>(k) * dt_us - tc;
            s[k] += a * gaussian_field(t, fwhm_us);
        }
    }
    return Waveform(std::move(s), dt_us, t0_us);
}

void save_waveform_csv(const Waveform& w, const std::string& path) {
    auto out = open_output(path);
    out << "# waveform\n";
    out << "# dt_us=" << format_double(w.dt) << " t0_us=" << format_double(w.t0)
        << " n_samples=" << w.size() << '\n';
    out << "# time_us,re,im\n";
    for (std::size_t k = 0; k < w.size(); ++k) {
        out << format_double(w.time(k)) << ',' << format_double(w.samples[k].real())
            << ',' << format_double(w.samples[k].imag()) << '\n';
    }
}

Waveform load_waveform_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    double dt = 0.0, t0 = 0.0;
    std::vector<cdouble> samples;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (t.find("dt_us=") != std::string::npos) {
                for (const auto& tok : split(t.substr(1), ' ')) {
                    const auto kv = split(trim(tok), '=');
                    if (kv.size() != 2) continue;
                    if (kv[0] == "dt_us") dt = std::stod(kv[1]);
                    if (kv[0] == "t0_us") t0 = std::stod(kv[1]);
                }
            }
            continue;
        }
        const auto cols = split(t, ',');
        if (cols.size() != 3)
            throw IoError("waveform file " + path + ": expected three columns");
        samples.emplace_back(std::stod(cols[1]), std::stod(cols[2]));
    }
    if (!(dt > 0.0))
        throw IoError("waveform file " + path + ": missing sampling metadata");
    return Waveform(std::move(samples), dt, t0);
}

}  // namespace afc
