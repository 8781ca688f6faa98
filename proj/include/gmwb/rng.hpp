#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gmwb {

enum class Purpose : std::uint8_t {
    OU = 1,
    StochIntegral = 2,
    JumpCount = 3,
    JumpSize = 4,
    BranchUniform = 5,
    Permutation = 6,
    Bridge = 7,
};

/// Identifies one independent random stream. For ensemble-level streams
/// (branching) `particle_id` holds the group index and `step` the time step.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t particle_id = 0;
    Purpose purpose = Purpose::OU;
    std::uint64_t step = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_key(const StreamKey& key);

/// SplitMix64 sequence started at a hash of the key. Satisfies
/// UniformRandomBitGenerator so it plugs into <random>/Boost.Random.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream() = default;
    explicit Stream(const StreamKey& key) : state_(hash_key(key)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    bool operator==(const Stream&) const = default;

private:
    std::uint64_t state_ = 0;
};

/// Uniform on [0, 1) with 53 random bits.
inline double draw_uniform01(Stream& s) { return static_cast<double>(s() >> 11) * 0x1.0p-53; }
double draw_uniform(Stream& s, double lo, double hi);
double draw_normal(Stream& s);
std::uint64_t draw_poisson(Stream& s, double mean);
/// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
std::vector<std::size_t> random_permutation(Stream& s, std::size_t n);

class PoolExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pre-generated standard normals consumed in order; running past the end
/// throws instead of wrapping around.
class NormalPool {
public:
    NormalPool() = default;
    explicit NormalPool(std::vector<double> values) : values_(std::move(values)) {}

    double next() {
        if (cursor_ >= values_.size()) throw PoolExhausted("normal pool exhausted");
        return values_[cursor_++];
    }
    std::size_t cursor() const { return cursor_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
    std::size_t cursor_ = 0;
};

NormalPool pregenerate_pool(Stream& s, std::size_t count);

/// Normal-variate sources accepted by the kernel.
struct StreamNormals {
    Stream* stream;
    double operator()() { return draw_normal(*stream); }
};

struct PoolNormals {
    NormalPool* pool;
    double operator()() { return pool->next(); }
};

}  // namespace gmwb
