#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace ckt {

/// Seeded random stream with named substreams.
///
/// Every random draw in the pipeline flows from one root seed. Components
/// derive their own stream via substream("name"), so adding a consumer never
/// shifts the draws of another. The uniform/normal transforms are implemented
/// here (not via std distributions) so sequences are bit-stable across
/// standard library versions; mt19937_64 itself is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Derive an independent stream keyed by (this stream's seed, name).
    Rng substream(std::string_view name) const;
    /// Derive an independent stream keyed by (this stream's seed, index).
    Rng substream(std::uint64_t index) const;

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller (pairs cached).
    double normal();
    double normal(double mean, double stddev);

    std::vector<double> normal_vector(std::size_t n, double mean, double stddev);

    /// True with probability p.
    bool bernoulli(double p);

    /// Deterministic in-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i)));
            std::swap(v[i], v[j]);
        }
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

/// 64-bit FNV-1a, used to fold substream names into seeds.
std::uint64_t fnv1a64(std::string_view s);

/// SplitMix64 finalizer; decorrelates derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ckt
