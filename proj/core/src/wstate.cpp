#include "afc/wstate.hpp"

#include <cmath>
#include <numbers>

#include "afc/errors.hpp"

namespace afc {

AtomEnsemble::AtomEnsemble(std::vector<double> detunings_,
                           std::vector<double> weights_)
    : detunings_mhz(std::move(detunings_)), weights(std::move(weights_)) {
    if (detunings_mhz.empty() || detunings_mhz.size() != weights.size())
        throw ConfigError("ensemble needs equal-length, non-empty arrays");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ConfigError("ensemble weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("ensemble weights must sum to 1");
}

cdouble wstate_echo(const AtomEnsemble& ensemble, double t_us) {
    cdouble a(0.0, 0.0);
    for (std::size_t n = 0; n < ensemble.weights.size(); ++n) {
        const double phi = 2.0 * std::numbers::pi * ensemble.detunings_mhz[n] * t_us;
        a += ensemble.weights[n] * std::polar(1.0, phi);
    }
    return a;
}

AtomEnsemble make_comb_ensemble_discrete(double delta_mhz, int n_teeth) {
    if (n_teeth < 1) throw ConfigError("ensemble needs at least one tooth");
    std::vector<double> det(n_teeth), w(n_teeth, 1.0 / n_teeth);
    const int m_lo = -((n_teeth - 1) / 2);
    for (int i = 0; i < n_teeth; ++i)
        det[i] = (m_lo + i) * delta_mhz;
    return AtomEnsemble(std::move(det), std::move(w));
}

AtomEnsemble make_comb_ensemble_gaussian(double delta_mhz, double finesse,
                                         int n_teeth, int samples_per_tooth) {
    if (n_teeth < 1 || samples_per_tooth < 3)
        throw ConfigError("ensemble needs >= 1 tooth and >= 3 samples per tooth");
    const double gamma = delta_mhz / finesse;  // tooth FWHM
    const double sigma = gamma / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double reach = 5.0 * sigma;
    const int m_lo = -((n_teeth - 1) / 2);

    std::vector<double> det, w;
    det.reserve(static_cast<std::size_t>(n_teeth) * samples_per_tooth);
    w.reserve(det.capacity());
    double total = 0.0;
    for (int m = 0; m < n_teeth; ++m) {
        const double f0 = (m_lo + m) * delta_mhz;
        for (int j = 0; j < samples_per_tooth; ++j) {
            const double x = -reach + 2.0 * reach * j / (samples_per_tooth - 1);
            const double weight = std::exp(-0.5 * (x / sigma) * (x / sigma));
            det.push_back(f0 + x);
            w.push_back(weight);
            total += weight;
        }
    }
    for (double& v : w) v /= total;
    return AtomEnsemble(std::move(det), std::move(w));
}

}  // namespace afc
