#include "gmwb/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>
#include <new>
#include <numeric>

namespace gmwb {

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_key(const StreamKey& key) {
    std::uint64_t h = mix64(key.master_seed + 0x632be59bd9b4e019ULL);
    h = mix64(h ^ (key.particle_id + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (static_cast<std::uint64_t>(key.purpose) * 0xd1b54a32d192ed03ULL));
    h = mix64(h ^ (key.step + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

double draw_uniform(Stream& s, double lo, double hi) { return lo + (hi - lo) * draw_uniform01(s); }

double draw_normal(Stream& s) {
    // Boost's ziggurat is stateless, so one variate depends only on the stream position.
    boost::random::normal_distribution<double> dist;
    return dist(s);
}

std::uint64_t draw_poisson(Stream& s, double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw std::domain_error("draw_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    boost::random::poisson_distribution<std::uint64_t, double> dist(mean);
    return dist(s);
}

std::vector<std::size_t> random_permutation(Stream& s, std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(p[i - 1], p[pick(s)]);
    }
    return p;
}

NormalPool pregenerate_pool(Stream& s, std::size_t count) {
    if (count == 0) throw std::invalid_argument("pregenerate_pool: count must be > 0");
    std::vector<double> values;
    try {
        values.resize(count);
    } catch (const std::bad_alloc&) {
        throw std::runtime_error("pregenerate_pool: cannot allocate " + std::to_string(count) + " normals");
    }
    for (auto& v : values) v = draw_normal(s);
    return NormalPool(std::move(values));
}

}  // namespace gmwb
