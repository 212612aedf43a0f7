#include "afc/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace afc {

namespace {

// FFTW planning is not thread-safe; execution through the new-array
// interface is. Plans are created once per (size, direction) with
// FFTW_ESTIMATE so results do not depend on planner timing.
class PlanCache {
public:
    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<cdouble> probe(n);
        auto* buf = reinterpret_cast<fftw_complex*>(probe.data());
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void execute(std::vector<cdouble>& data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void fft_forward(std::vector<cdouble>& data) { execute(data, FFTW_FORWARD); }

void fft_inverse(std::vector<cdouble>& data) {
    execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& z : data) z *= scale;
}

std::vector<double> hilbert(const std::vector<double>& u) {
    const std::size_t n = u.size();
    if (n < 2) return std::vector<double>(n, 0.0);

    const std::size_t m = 2 * n;
    std::vector<cdouble> buf(m);
    for (std::size_t k = 0; k < n; ++k) buf[k] = u[k];
    for (std::size_t k = 0; k < n; ++k) buf[n + k] = u[n - 1 - k];

    fft_forward(buf);
    buf[0] = 0.0;      // DC
    buf[m / 2] = 0.0;  // Nyquist
    const cdouble mi(0.0, -1.0);
    const cdouble pi(0.0, 1.0);
    for (std::size_t k = 1; k < m / 2; ++k) buf[k] *= mi;
    for (std::size_t k = m / 2 + 1; k < m; ++k) buf[k] *= pi;
    fft_inverse(buf);

    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k].real();
    return out;
}

std::vector<double> cyclic_convolve(const std::vector<double>& a,
                                    const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cyclic_convolve: length mismatch");
    const std::size_t n = a.size();
    std::vector<cdouble> fa(n), fb(n);
    for (std::size_t k = 0; k < n; ++k) {
        fa[k] = a[k];
        fb[k] = b[k];
    }
    fft_forward(fa);
    fft_forward(fb);
    for (std::size_t k = 0; k < n; ++k) fa[k] *= fb[k];
    fft_inverse(fa);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = fa[k].real();
    return out;
}

}  // namespace afc
