#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace mosqopt {

// Error taxonomy; the CLI maps these to exit codes (config 2, numerical 3,
// failed check 4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, used for stream tags and schedule/grid fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

// Every random consumer gets its own stream keyed by (master seed, role tag,
// index), so results never depend on the order streams are drawn from.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
    return splitmix64(splitmix64(master ^ (tag * 0x9e3779b97f4a7c15ULL)) + index);
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& tag, std::uint64_t index = 0) {
    return derive_seed(master, fnv1a(tag), index);
}

// mt19937_64 with explicit bit-to-double mappings. The standard library
// distributions are implementation-defined, which would tie output bytes to
// the libstdc++ version; doing the mapping by hand keeps a fixed seed
// bit-reproducible across toolchains.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; caches the second variate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Runs f(i) for i in [0, n). Work items must be independent and write only to
// per-index slots so the thread count can never affect results. Thread count:
// MOSQOPT_THREADS env var if set, else hardware concurrency.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace mosqopt
