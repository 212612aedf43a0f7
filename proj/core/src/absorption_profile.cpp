#include "afc/absorption_profile.hpp"

#include <cmath>
#include <string>

#include "afc/errors.hpp"
#include "afc/io_util.hpp"

namespace afc {

AbsorptionProfile::AbsorptionProfile(SpectralGrid grid_,
                                     std::vector<double> depth_, int passes_)
    : grid(grid_), depth(std::move(depth_)), passes(passes_) {
    if (depth.size() != grid.n_points())
        throw GridError("absorption profile length (" +
                        std::to_string(depth.size()) +
                        ") does not match grid size (" +
                        std::to_string(grid.n_points()) + ")");
    if (passes != 1 && passes != 2)
        throw GridError("passes must be 1 or 2");
    for (double d : depth) {
        if (!(d >= 0.0) || !std::isfinite(d))
            throw GridError("optical depth values must be non-negative and finite");
    }
}

std::vector<double> AbsorptionProfile::effective_depths() const {
    std::vector<double> out(depth.size());
    for (std::size_t k = 0; k < depth.size(); ++k)
        out[k] = effective_depth(k);
    return out;
}

AbsorptionProfile make_flat_profile(const SpectralGrid& grid, double depth,
                                    int passes) {
    return AbsorptionProfile(grid,
                             std::vector<double>(grid.n_points(), depth),
                             passes);
}

void save_profile_csv(const AbsorptionProfile& profile,
                      const std::string& path) {
    auto out = open_output(path);
    out << "# absorption profile\n";
    out << "# f_center_mhz=" << format_double(profile.grid.f_center())
        << " span_mhz=" << format_double(profile.grid.span())
        << " n_points=" << profile.grid.n_points()
        << " passes=" << profile.passes << '\n';
    out << "# frequency_mhz,depth\n";
    for (std::size_t k = 0; k < profile.depth.size(); ++k) {
        out << format_double(profile.grid.frequency(k)) << ','
            << format_double(profile.depth[k]) << '\n';
    }
}

AbsorptionProfile load_profile_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    double f_center = 0.0, span = 0.0;
    std::size_t n_points = 0;
    int passes = 1;
    bool have_meta = false;
    std::vector<double> depth;

    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (t.find("f_center_mhz=") != std::string::npos) {
                for (const auto& tok : split(t.substr(1), ' ')) {
                    const auto kv = split(trim(tok), '=');
                    if (kv.size() != 2) continue;
                    if (kv[0] == "f_center_mhz") f_center = std::stod(kv[1]);
                    if (kv[0] == "span_mhz") span = std::stod(kv[1]);
                    if (kv[0] == "n_points") n_points = std::stoul(kv[1]);
                    if (kv[0] == "passes") passes = std::stoi(kv[1]);
                }
                have_meta = true;
            }
            continue;
        }
        const auto cols = split(t, ',');
        if (cols.size() != 2)
            throw IoError("profile file " + path + ": expected two columns");
        depth.push_back(std::stod(cols[1]));
    }
    if (!have_meta)
        throw IoError("profile file " + path + ": missing grid metadata header");
    if (depth.size() != n_points)
        throw IoError("profile file " + path + ": row count does not match header");
    return AbsorptionProfile(SpectralGrid(f_center, span, n_points),
                             std::move(depth), passes);
}

}  // namespace afc
