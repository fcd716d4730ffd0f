#include "ckt/rng.hpp"

#include <cmath>

#include "ckt/errors.hpp"

namespace ckt {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::substream(std::string_view name) const {
    return Rng(splitmix64(seed_ ^ fnv1a64(name)));
}

Rng Rng::substream(std::uint64_t index) const {
    return Rng(splitmix64(seed_ ^ splitmix64(index + 0x51ed2701ULL)));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    // 53 high bits -> double in [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ContractError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit range
    // rejection sampling keeps the draw exactly uniform
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal() {
    if (spare_normal_) {
        const double v = *spare_normal_;
        spare_normal_.reset();
        return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_normal_ = r * std::sin(theta);
    return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

std::vector<double> Rng::normal_vector(std::size_t n, double mean, double stddev) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal(mean, stddev);
    return out;
}

bool Rng::bernoulli(double p) { return uniform() < p; }

}  // namespace ckt
