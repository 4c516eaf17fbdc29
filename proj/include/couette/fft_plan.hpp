#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace couette::detail {

// FFTW's planner is not reentrant, execution on fresh arrays is. Plans are
// created once per (nx, ny, direction) under a lock and then shared.
// FFTW_ESTIMATE keeps plan selection independent of timing, so results are
// bit-reproducible from run to run.
class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    fftw_plan get(int nx, int ny, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(nx, ny, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(nx) * ny);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_2d(nx, ny, buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    FftPlanCache(const FftPlanCache&) = delete;
    FftPlanCache& operator=(const FftPlanCache&) = delete;

private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

/// Unnormalized in-place 2D DFT; sign is FFTW_FORWARD or FFTW_BACKWARD.
inline void fft2d_inplace(std::vector<std::complex<double>>& data, int nx, int ny, int sign) {
    fftw_plan plan = FftPlanCache::instance().get(nx, ny, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace couette::detail
