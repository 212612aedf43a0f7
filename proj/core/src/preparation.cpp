#include "afc/preparation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "afc/fft.hpp"
#include "afc/io_util.hpp"

namespace afc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoLn2 = 2.0 * std::numbers::ln2;
}  // namespace

void PreparationSequence::validate() const {
    if (pulses.empty()) throw SequenceError("sequence has no pulses");
    if (repeats < 1) throw SequenceError("sequence repeats must be >= 1");
    if (!(sequence_period_us > 0.0))
        throw SequenceError("sequence period must be positive");
    for (const auto& p : pulses) {
        if (!(p.fwhm_us > 0.0)) throw SequenceError("pulse FWHM must be positive");
        if (!(p.area >= 0.0)) throw SequenceError("pulse area must be >= 0");
        if (p.time_us < 0.0 || p.time_us >= sequence_period_us)
            throw SequenceError("pulse times must lie within [0, period)");
    }
}

PreparationSequence make_afc_sequence(double delta_mhz, int n_side_pairs,
                                      double pulse_fwhm_us,
                                      const std::vector<double>& freq_shifts_mhz,
                                      int repeats) {
    if (!(delta_mhz > 0.0)) throw SequenceError("delta must be positive");
    if (n_side_pairs < 1) throw SequenceError("need at least one side pair");
    if (freq_shifts_mhz.empty())
        throw SequenceError("need at least one carrier offset");

    const double tau = 1.0 / delta_mhz;
    if (tau < 3.0 * pulse_fwhm_us)
        throw SequenceError("pulses overlap: spacing 1/delta = " +
                            std::to_string(tau) + " us is below 3 x FWHM");
    for (double shift : freq_shifts_mhz) {
        const double m = shift / delta_mhz;
        if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, std::abs(m)))
            throw SequenceError("carrier offset " + std::to_string(shift) +
                                " MHz is not an integer multiple of delta");
    }

    PreparationSequence seq;
    seq.repeats = repeats;
    const int n_pulses = 2 * n_side_pairs + 1;
    const double t_pad = 2.0 * pulse_fwhm_us;
    for (double shift : freq_shifts_mhz) {
        for (int j = 0; j < n_pulses; ++j) {
            PumpPulse p;
            p.time_us = t_pad + j * tau;
            p.fwhm_us = pulse_fwhm_us;
            p.carrier_offset_mhz = shift;
            if (j == n_side_pairs) {
                p.area = 2.0 * n_side_pairs;  // sum of the side areas
                p.phase_rad = std::numbers::pi;
            } else {
                p.area = 1.0;
                p.phase_rad = 0.0;
            }
            seq.pulses.push_back(p);
        }
    }
    seq.sequence_period_us = 2.0 * t_pad + (n_pulses - 1) * tau;
    seq.validate();
    return seq;
}

PreparationSequence make_double_afc_sequence(double delta1_mhz,
                                             double delta2_mhz,
                                             double phase_rad,
                                             int n_side_pairs,
                                             double pulse_fwhm_us,
                                             int repeats) {
    if (!(delta1_mhz > 0.0) || !(delta2_mhz > 0.0))
        throw SequenceError("periods must be positive");
    if (delta1_mhz == delta2_mhz)
        throw SequenceError("the two comb periods must differ");
    if (n_side_pairs < 1) throw SequenceError("need at least one side pair");

    const double tau1 = 1.0 / delta1_mhz;
    const double tau2 = 1.0 / delta2_mhz;
    if (std::min(tau1, tau2) < 3.0 * pulse_fwhm_us)
        throw SequenceError("pulses overlap: min spacing is below 3 x FWHM");

    // Side pulses of the two families must not coincide (the shared pulse
    // at t = 0 is the central one).
    for (int k1 = 1; k1 <= n_side_pairs; ++k1) {
        for (int k2 = 1; k2 <= n_side_pairs; ++k2) {
            if (std::abs(k1 * tau1 - k2 * tau2) < pulse_fwhm_us)
                throw SequenceError(
                    "side pulses of the two combs coincide at |t| = " +
                    std::to_string(k1 * tau1) + " us");
        }
    }

    PreparationSequence seq;
    seq.repeats = repeats;
    const double t_pad = 2.0 * pulse_fwhm_us;
    const double t_center = t_pad + n_side_pairs * std::max(tau1, tau2);

    PumpPulse center;
    center.time_us = t_center;
    center.area = 4.0 * n_side_pairs;
    center.phase_rad = std::numbers::pi;
    center.fwhm_us = pulse_fwhm_us;
    seq.pulses.push_back(center);

    for (int k = 1; k <= n_side_pairs; ++k) {
        for (int sign : {+1, -1}) {
            PumpPulse p1;
            p1.time_us = t_center + sign * k * tau1;
            p1.area = 1.0;
            p1.phase_rad = sign * k * phase_rad;
            p1.fwhm_us = pulse_fwhm_us;
            seq.pulses.push_back(p1);

            PumpPulse p2;
            p2.time_us = t_center + sign * k * tau2;
            p2.area = 1.0;
            p2.phase_rad = 0.0;
            p2.fwhm_us = pulse_fwhm_us;
            seq.pulses.push_back(p2);
        }
    }
    std::sort(seq.pulses.begin(), seq.pulses.end(),
              [](const PumpPulse& a, const PumpPulse& b) {
                  return a.time_us < b.time_us;
              });
    seq.sequence_period_us = t_center + n_side_pairs * std::max(tau1, tau2) + t_pad;
    seq.validate();
    return seq;
}

std::vector<double> sequence_power_spectrum(const PreparationSequence& seq,
                                            const SpectralGrid& grid) {
    seq.validate();
    const std::size_t n = grid.n_points();
    std::vector<cdouble> field(n, cdouble(0.0, 0.0));

    // E_j is the transform of the unit-area Gaussian envelope, so area_j
    // multiplies in directly; the e^{-i 2 pi f t_j} factor matches the
    // analysis convention used for propagation.
    for (const auto& p : seq.pulses) {
        if (p.area == 0.0) continue;
        const cdouble amp = p.area * std::polar(1.0, p.phase_rad);
        for (std::size_t k = 0; k < n; ++k) {
            const double nu = grid.detuning(k) - p.carrier_offset_mhz;
            const double x = std::numbers::pi * nu * p.fwhm_us;
            const double envelope = std::exp(-x * x / kTwoLn2);
            if (envelope < 1e-300) continue;
            field[k] += amp * envelope *
                        std::polar(1.0, -kTwoPi * grid.detuning(k) * p.time_us);
        }
    }

    std::vector<double> s(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = std::norm(field[k]);
        peak = std::max(peak, s[k]);
    }
    if (peak > 0.0)
        for (double& v : s) v /= peak;
    return s;
}

void BurnConfig::validate() const {
    if (!(pump_strength > 0.0))
        throw ConfigError("pump strength kappa must be positive");
    if (!(resolution_fwhm_mhz >= 0.0))
        throw ConfigError("resolution FWHM must be >= 0");
    if (relaxation) {
        if (!(relaxation->t1z_ms > 0.0) ||
            !(relaxation->wall_time_per_repeat_us > 0.0))
            throw ConfigError("relaxation parameters must be positive");
    }
}

AbsorptionProfile burn_comb(const AbsorptionProfile& initial,
                            const PreparationSequence& seq,
                            const BurnConfig& cfg, WarningList* warnings) {
    cfg.validate();
    const auto& grid = initial.grid;
    const std::size_t n = grid.n_points();
    const auto spectrum = sequence_power_spectrum(seq, grid);

    // Warn when the initial line is not flat over the pumped band.
    {
        double lo = 1e300, hi = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (spectrum[k] > 1e-3) {
                lo = std::min(lo, initial.depth[k]);
                hi = std::max(hi, initial.depth[k]);
            }
        }
        if (hi > 0.0 && (hi - lo) > 0.1 * hi)
            warn(warnings,
                 "initial profile varies by more than 10% over the pump band");
    }

    // Per repeat: n -> n e^{-kappa S}, then optionally n -> n0 + (n - n0) b
    // with b = exp(-wall/T1Z). Both steps are affine in n, so R repeats have
    // the closed form of a geometric recurrence.
    const double relax = cfg.relaxation
                             ? std::exp(-(cfg.relaxation->wall_time_per_repeat_us * 1e-3) /
                                        cfg.relaxation->t1z_ms)
                             : 1.0;
    const double repeats = static_cast<double>(seq.repeats);

    std::vector<double> population(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double n0 = initial.depth[k];
        const double q = std::exp(-cfg.pump_strength * spectrum[k]);
        const double a = relax * q;
        const double c = relax * n0 * (q - 1.0);
        double u;  // deviation from n0 after all repeats
        if (c == 0.0) {
            u = 0.0;
        } else if (a >= 1.0) {
            u = c * repeats;  // only reachable in the q -> 1 limit
        } else {
            const double u_star = c / (1.0 - a);
            u = u_star * (1.0 - std::pow(a, repeats));
        }
        population[k] = std::max(0.0, n0 + u);
    }

    if (cfg.resolution_fwhm_mhz > 0.0) {
        // Unit-area Lorentzian kernel, sampled wrapped around the grid.
        const double half = 0.5 * cfg.resolution_fwhm_mhz;
        std::vector<double> kernel(n);
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double nu = (k <= n / 2) ? k * grid.df()
                                           : (static_cast<double>(k) - n) * grid.df();
            kernel[k] = half / (nu * nu + half * half);
            sum += kernel[k];
        }
        for (double& v : kernel) v /= sum;  // discrete unit area
        population = cyclic_convolve(population, kernel);
        for (double& v : population) v = std::max(0.0, v);
    }

    return AbsorptionProfile(grid, std::move(population), initial.passes);
}

namespace {

// Half-height crossings of one tooth by linear interpolation.
double tooth_fwhm(const std::vector<double>& depth, const SpectralGrid& grid,
                  std::size_t peak_idx, double base) {
    const double half = base + 0.5 * (depth[peak_idx] - base);
    std::size_t l = peak_idx;
    while (l > 0 && depth[l] > half) --l;
    std::size_t r = peak_idx;
    while (r + 1 < depth.size() && depth[r] > half) ++r;
    if (l == 0 || r + 1 == depth.size()) return 0.0;
    const double fl = grid.frequency(l) +
                      grid.df() * (half - depth[l]) /
                          std::max(1e-300, depth[l + 1] - depth[l]);
    const double fr = grid.frequency(r) -
                      grid.df() * (half - depth[r]) /
                          std::max(1e-300, depth[r - 1] - depth[r]);
    return fr - fl;
}

}  // namespace

CombMetrics comb_metrics(const AbsorptionProfile& profile, double delta_mhz) {
    if (!(delta_mhz > 0.0)) throw AnalysisError("delta must be positive");
    const auto& grid = profile.grid;
    const auto depth = profile.effective_depths();
    const std::size_t n = depth.size();

    // Strict local maxima are tooth candidates; flat plateaus (unpumped
    // regions) do not qualify.
    std::vector<std::size_t> maxima;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (depth[k] > depth[k - 1] && depth[k] > depth[k + 1])
            maxima.push_back(k);
    }
    if (maxima.empty())
        throw AnalysisError("no comb teeth found: profile has no local maxima");

    // Anchor on the tallest candidate and march outward in steps of delta.
    std::size_t anchor = maxima.front();
    for (std::size_t k : maxima)
        if (depth[k] > depth[anchor]) anchor = k;

    const auto search_window_max = [&](double f_expect) -> std::ptrdiff_t {
        const std::size_t lo = grid.index_of(f_expect - 0.25 * delta_mhz);
        const std::size_t hi = grid.index_of(f_expect + 0.25 * delta_mhz);
        if (hi <= lo + 1) return -1;
        std::size_t best = lo;
        for (std::size_t k = lo; k <= hi; ++k)
            if (depth[k] > depth[best]) best = k;
        if (best == lo || best == hi) return -1;  // not a window-interior max
        if (!(depth[best] > depth[best - 1] && depth[best] >= depth[best + 1]))
            return -1;
        return static_cast<std::ptrdiff_t>(best);
    };

    std::vector<std::size_t> teeth{anchor};
    for (int dir : {+1, -1}) {
        double f = grid.frequency(anchor);
        while (true) {
            f += dir * delta_mhz;
            const auto idx = search_window_max(f);
            if (idx < 0) break;
            teeth.push_back(static_cast<std::size_t>(idx));
            f = grid.frequency(static_cast<std::size_t>(idx));
        }
    }
    std::sort(teeth.begin(), teeth.end());
    if (teeth.size() < 3)
        throw AnalysisError("no comb teeth found: fewer than three teeth at "
                            "the expected spacing");

    // Background from the minima between adjacent teeth.
    std::vector<double> minima;
    for (std::size_t i = 0; i + 1 < teeth.size(); ++i) {
        double m = depth[teeth[i]];
        for (std::size_t k = teeth[i]; k <= teeth[i + 1]; ++k)
            m = std::min(m, depth[k]);
        minima.push_back(m);
    }
    double d0 = 0.0;
    for (double m : minima) d0 += m;
    d0 /= static_cast<double>(minima.size());

    double peak_mean = 0.0;
    for (std::size_t k : teeth) peak_mean += depth[k];
    peak_mean /= static_cast<double>(teeth.size());
    const double d = peak_mean - d0;

    if (!(d > 0.0) || d / std::max(1e-300, d + d0) < 0.05)
        throw AnalysisError("no comb teeth found: modulation contrast below 5%");

    CombMetrics metrics;
    metrics.background = d0;
    metrics.peak_depth = d;

    double gamma_sum = 0.0;
    int gamma_count = 0;
    for (std::size_t k : teeth) {
        const double g = tooth_fwhm(depth, grid, k, d0);
        if (g > 0.0) {
            gamma_sum += g;
            ++gamma_count;
        }
        metrics.tooth_frequencies_mhz.push_back(grid.frequency(k));
        metrics.tooth_heights.push_back(depth[k]);
    }
    metrics.gamma_mhz = gamma_count > 0 ? gamma_sum / gamma_count : 0.0;
    metrics.finesse = metrics.gamma_mhz > 0.0 ? delta_mhz / metrics.gamma_mhz : 0.0;

    for (std::size_t k : teeth)
        if (depth[k] > d0 + 0.5 * d) ++metrics.n_peaks;
    return metrics;
}

void save_sequence_csv(const PreparationSequence& seq, const std::string& path) {
    auto out = open_output(path);
    out << "# preparation sequence\n";
    out << "# repeats=" << seq.repeats
        << " sequence_period_us=" << format_double(seq.sequence_period_us) << '\n';
    out << "# time_us,area,phase_rad,offset_MHz,fwhm_us\n";
    for (const auto& p : seq.pulses) {
        out << format_double(p.time_us) << ',' << format_double(p.area) << ','
            << format_double(p.phase_rad) << ','
            << format_double(p.carrier_offset_mhz) << ','
            << format_double(p.fwhm_us) << '\n';
    }
}

PreparationSequence load_sequence_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    PreparationSequence seq;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (t.find("repeats=") != std::string::npos) {
                for (const auto& tok : split(t.substr(1), ' ')) {
                    const auto kv = split(trim(tok), '=');
                    if (kv.size() != 2) continue;
                    if (kv[0] == "repeats") seq.repeats = std::stoi(kv[1]);
                    if (kv[0] == "sequence_period_us")
                        seq.sequence_period_us = std::stod(kv[1]);
                }
            }
            continue;
        }
        const auto cols = split(t, ',');
        if (cols.size() != 5)
            throw IoError("sequence file " + path + ": expected five columns");
        PumpPulse p;
        p.time_us = std::stod(cols[0]);
        p.area = std::stod(cols[1]);
        p.phase_rad = std::stod(cols[2]);
        p.carrier_offset_mhz = std::stod(cols[3]);
        p.fwhm_us = std::stod(cols[4]);
        seq.pulses.push_back(p);
    }
    seq.validate();
    return seq;
}

}  // namespace afc
