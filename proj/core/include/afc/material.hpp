#pragma once

#include "afc/errors.hpp"

namespace afc {

// Crystal constants of the storage medium, used as model parameters. The
// defaults describe a weakly doped rare-earth crystal probed in double pass:
// 6 GHz inhomogeneous line, single-pass depth 1.5, excited-state lifetime
// 300 us, optical coherence 92.7 us, Zeeman population lifetime 100 ms and
// an effective spectral-pumping resolution of about 1 MHz. The g factors are
// metadata only; level structure is not modeled.
struct MaterialParams {
    double t1_us = 300.0;
    double t2_us = 92.7;
    double t1z_ms = 100.0;
    double gamma_eff_mhz = 1.0;
    double inhom_width_ghz = 6.0;
    double single_pass_depth = 1.5;
    double g_ground = 2.6;
    double g_excited = 0.5;

    void validate() const {
        if (!(t1_us > 0) || !(t2_us > 0) || !(t1z_ms > 0) ||
            !(gamma_eff_mhz > 0) || !(inhom_width_ghz > 0) ||
            !(single_pass_depth > 0) || !(g_ground > 0) || !(g_excited > 0))
            throw ConfigError("material parameters must all be positive");
        if (gamma_eff_mhz > inhom_width_ghz * 1e3)
            throw ConfigError(
                "effective linewidth cannot exceed the inhomogeneous width");
    }
};

}  // namespace afc
