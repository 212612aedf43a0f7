#pragma once

#include <complex>
#include <vector>

#include "afc/fft.hpp"

namespace afc {

// Discrete ensemble of atoms characterized by their detunings (MHz) and
// normalized excitation weights. This is the independent oracle for the
// collective rephasing picture: a single excitation shared over the
// ensemble dephases and periodically realigns.
struct AtomEnsemble {
    AtomEnsemble(std::vector<double> detunings_mhz,
                 std::vector<double> weights);

    std::vector<double> detunings_mhz;
    std::vector<double> weights;  // non-negative, sums to 1
};

/// Collective emission amplitude A(t) = sum_n w_n exp(i 2 pi delta_n t);
/// |A|^2 is the rephasing intensity envelope.
cdouble wstate_echo(const AtomEnsemble& ensemble, double t_us);

/// Ensemble with all atoms exactly on n_teeth comb teeth (uniform weights);
/// |A(k/delta)| rephases to 1 exactly.
AtomEnsemble make_comb_ensemble_discrete(double delta_mhz, int n_teeth);

/// Ensemble sampling Gaussian teeth of FWHM delta/finesse by deterministic
/// quadrature (samples_per_tooth points over +-5 sigma per tooth).
AtomEnsemble make_comb_ensemble_gaussian(double delta_mhz, double finesse,
                                         int n_teeth,
                                         int samples_per_tooth = 201);

}  // namespace afc
