#include "afc/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "afc/io_util.hpp"

namespace afc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

long long poisson_draw(double mean, std::uint64_t seed, std::uint64_t counter) {
    if (mean <= 0.0) return 0;
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(counter + 1)));
    std::poisson_distribution<long long> dist(mean);
    return dist(rng);
}

}  // namespace

void DetectionConfig::validate() const {
    if (!(mean_photons > 0.0)) throw ConfigError("mean photon number must be > 0");
    if (det_efficiency < 0.0 || det_efficiency > 1.0)
        throw ConfigError("detector efficiency must lie in [0, 1]");
    if (path_transmission < 0.0 || path_transmission > 1.0)
        throw ConfigError("path transmission must lie in [0, 1]");
    if (dark_rate_hz < 0.0) throw ConfigError("dark rate must be >= 0");
    if (n_trials < 1) throw ConfigError("need at least one trial");
    if (!(bin_width_ns > 0.0)) throw ConfigError("bin width must be positive");
}

CountHistogram sample_counts_with_edges(const Waveform& trace,
                                        double reference_energy,
                                        const std::vector<double>& bin_edges_us,
                                        const DetectionConfig& cfg,
                                        WarningList* warnings) {
    cfg.validate();
    if (bin_edges_us.size() < 2)
        throw ConfigError("histogram needs at least one bin");
    if (!(reference_energy > 0.0))
        throw ConfigError("reference energy must be positive");

    const std::size_t n_bins = bin_edges_us.size() - 1;
    CountHistogram hist;
    hist.bin_edges_us = bin_edges_us;
    hist.counts.resize(n_bins);
    hist.expected.resize(n_bins);
    hist.n_trials = cfg.n_trials;

    const double scale =
        cfg.mean_photons * cfg.path_transmission * cfg.det_efficiency;
    bool warned = false;
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double lo = bin_edges_us[b];
        const double hi = bin_edges_us[b + 1];
        const double p_signal =
            scale * trace.energy_in(lo, hi - 0.5 * trace.dt) / reference_energy;
        const double dark = cfg.dark_rate_hz * (hi - lo) * 1e-6;
        const double p = p_signal + dark;
        if (p > 1.0 && !warned) {
            warn(warnings,
                 "per-trial detection probability exceeds 1 in at least one "
                 "bin; counting statistics are still Poisson but the "
                 "configuration is nonphysical");
            warned = true;
        }
        const double mean = static_cast<double>(cfg.n_trials) * p;
        hist.expected[b] = mean;
        hist.counts[b] = poisson_draw(mean, cfg.rng_seed, b);
    }
    return hist;
}

CountHistogram sample_counts(const Waveform& trace, double reference_energy,
                             const DetectionConfig& cfg,
                             WarningList* warnings) {
    const double bin_us = cfg.bin_width_ns * 1e-3;
    const double t_end =
        trace.t0 + static_cast<double>(trace.size()) * trace.dt;
    std::vector<double> edges;
    for (double t = trace.t0; t < t_end; t += bin_us) edges.push_back(t);
    edges.push_back(t_end);
    return sample_counts_with_edges(trace, reference_energy, edges, cfg,
                                    warnings);
}

namespace {

struct CosineFit {
    double mean;       // a0
    double amplitude;  // R = |(a1, a2)|
    double phase0;
};

// Linear least squares for y = a0 + a1 cos(phi) + a2 sin(phi).
CosineFit fit_cosine(const std::vector<double>& phases,
                     const std::vector<double>& y) {
    double s[3][3] = {{0}};
    double b[3] = {0};
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const double basis[3] = {1.0, std::cos(phases[i]), std::sin(phases[i])};
        for (int r = 0; r < 3; ++r) {
            b[r] += basis[r] * y[i];
            for (int c = 0; c < 3; ++c) s[r][c] += basis[r] * basis[c];
        }
    }
    // Cramer's rule on the 3x3 normal equations.
    const auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(s);
    if (std::abs(d) < 1e-12)
        throw AnalysisError("fringe fit is degenerate: singular normal matrix");
    double coef[3];
    for (int c = 0; c < 3; ++c) {
        double m[3][3];
        for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc)
                m[r][cc] = (cc == c) ? b[r] : s[r][cc];
        coef[c] = det3(m) / d;
    }
    CosineFit fit;
    fit.mean = coef[0];
    fit.amplitude = std::hypot(coef[1], coef[2]);
    fit.phase0 = std::atan2(coef[2], coef[1]);
    return fit;
}

}  // namespace

FringeResult estimate_visibility(const std::vector<double>& phases_rad,
                                 const std::vector<double>& counts,
                                 double dark_floor) {
    if (phases_rad.size() != counts.size())
        throw AnalysisError("phase and count arrays differ in length");
    if (phases_rad.size() < 8)
        throw AnalysisError("need at least 8 phase points for a fringe fit");
    const auto [lo, hi] =
        std::minmax_element(phases_rad.begin(), phases_rad.end());
    if (*hi - *lo < std::numbers::pi)
        throw AnalysisError("phase sweep must span at least half a fringe");
    if (dark_floor < 0.0)
        throw AnalysisError("dark floor must be >= 0");

    FringeResult out;
    out.phases_rad = phases_rad;
    out.counts = counts;
    out.dark_floor = dark_floor;

    const auto raw = fit_cosine(phases_rad, counts);
    if (!(raw.mean > 0.0))
        throw AnalysisError("fringe fit is degenerate: non-positive amplitude");
    out.v_raw = std::clamp(raw.amplitude / raw.mean, 0.0, 1.0);

    std::vector<double> net(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        net[i] = counts[i] - dark_floor;
    const auto fit = fit_cosine(phases_rad, net);
    if (!(fit.mean > 0.0))
        throw AnalysisError("fringe fit is degenerate: dark floor exceeds signal");
    out.v_net = std::clamp(fit.amplitude / fit.mean, 0.0, 1.0);
    out.amplitude = fit.mean;
    out.phase0_rad = fit.phase0;

    const auto [cmin, cmax] = std::minmax_element(counts.begin(), counts.end());
    const double denom = *cmax + *cmin - 2.0 * dark_floor;
    out.v_minmax = denom > 0.0 ? (*cmax - *cmin) / denom : 0.0;
    return out;
}

void save_histogram_csv(const CountHistogram& hist, const std::string& path) {
    auto out = open_output(path);
    out << "# count histogram\n";
    out << "# n_trials=" << hist.n_trials << '\n';
    out << "# bin_start_us,bin_end_us,counts\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        out << format_double(hist.bin_edges_us[b]) << ','
            << format_double(hist.bin_edges_us[b + 1]) << ','
            << hist.counts[b] << '\n';
    }
}

void save_fringe_result(const FringeResult& fringe, const std::string& path) {
    auto out = open_output(path);
    out << "v_raw = " << format_metric(fringe.v_raw) << '\n';
    out << "v_net = " << format_metric(fringe.v_net) << '\n';
    out << "dark_floor = " << format_metric(fringe.dark_floor) << '\n';
    out << "amplitude = " << format_metric(fringe.amplitude) << '\n';
    out << "phase0_rad = " << format_metric(fringe.phase0_rad) << '\n';
    out << "v_minmax = " << format_metric(fringe.v_minmax) << '\n';
    out << "# phase_rad,counts\n";
    for (std::size_t i = 0; i < fringe.phases_rad.size(); ++i) {
        out << format_double(fringe.phases_rad[i]) << ','
            << format_double(fringe.counts[i]) << '\n';
    }
}

}  // namespace afc
