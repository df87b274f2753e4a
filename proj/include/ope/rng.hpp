#pragma once
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ope {

// Independent named streams derived from one master seed.
enum class Stream : std::uint64_t {
    Environment = 1,
    Data = 2,
    GroundTruth = 3,
    Folds = 4,
    Bootstrap = 5,
    Instance = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t t : tags) s = splitmix64(s ^ splitmix64(t));
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
    return std::mt19937_64(derive_seed(seed, tags));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> tags = {}) {
    std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(stream)});
    for (std::uint64_t t : tags) s = splitmix64(s ^ splitmix64(t));
    return std::mt19937_64(s);
}

} // namespace ope
