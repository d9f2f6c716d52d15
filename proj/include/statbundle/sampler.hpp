#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "statbundle/scalar_field.hpp"

namespace statbundle {

/// Counter-based Gaussian stream.  Every draw is a pure function of
/// (seed, stream, counter), so parallel estimators reproduce bit-exactly
/// regardless of scheduling, and replicas are addressed by stream id.
class GaussianSampler {
public:
    GaussianSampler(int dim, std::uint64_t seed, std::uint64_t stream = 0)
        : dim_(dim), seed_(seed), stream_(stream) {
        if (dim < 1) throw std::invalid_argument("GaussianSampler: dimension must be positive");
    }

    int dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    GaussianSampler with_stream(std::uint64_t s) const { return GaussianSampler(dim_, seed_, s); }
    GaussianSampler with_dim(int n) const { return GaussianSampler(n, seed_, stream_); }

    /// idx-th uniform in (0, 1).
    double uniform(std::uint64_t idx) const {
        return to_unit(word(kUniformDomain, idx));
    }

    /// idx-th standard normal (Box-Muller on two dedicated uniforms).
    double normal(std::uint64_t idx) const {
        const double u1 = to_unit(word(kNormalDomain, 2 * idx));
        const double u2 = to_unit(word(kNormalDomain, 2 * idx + 1));
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// j-th point of the stream, dim_ normals.
    Point point(std::uint64_t j) const {
        Point p(static_cast<size_t>(dim_));
        for (int d = 0; d < dim_; ++d)
            p[static_cast<size_t>(d)] = normal(j * static_cast<std::uint64_t>(dim_) + static_cast<std::uint64_t>(d));
        return p;
    }

    /// First `count` i.i.d. standard Gaussian points, flattened count x dim.
    std::vector<double> sample(std::uint64_t count) const {
        if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
        std::vector<double> out(static_cast<size_t>(count) * static_cast<size_t>(dim_));
        for (std::uint64_t j = 0; j < count; ++j) {
            for (int d = 0; d < dim_; ++d)
                out[static_cast<size_t>(j) * static_cast<size_t>(dim_) + static_cast<size_t>(d)] =
                    normal(j * static_cast<std::uint64_t>(dim_) + static_cast<std::uint64_t>(d));
        }
        return out;
    }

private:
    static constexpr std::uint64_t kNormalDomain = 0;
    static constexpr std::uint64_t kUniformDomain = 1;

    static std::uint64_t fmix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    // splitmix64 step keyed by (seed, stream, domain)
    std::uint64_t word(std::uint64_t domain, std::uint64_t ctr) const {
        std::uint64_t base = fmix(seed_ + 0x9E3779B97F4A7C15ULL);
        base = fmix(base ^ (stream_ + 0xD1B54A32D192ED03ULL));
        base = fmix(base ^ (domain + 0x8CB92BA72F3D8DD7ULL));
        return fmix(base + (ctr + 1) * 0x9E3779B97F4A7C15ULL);
    }

    static double to_unit(std::uint64_t w) {
        return static_cast<double>(w >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    int dim_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace statbundle
