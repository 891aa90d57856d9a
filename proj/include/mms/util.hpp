#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace mms {

/// FNV-1a 64-bit accumulator used for content digests (graphs, configs).
/// Feed it canonical bytes; the order of calls defines the digest.
class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ull;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void i64(std::int64_t v) { bytes(&v, sizeof v); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Derives a stream seed from a master seed and a list of tags, so that
/// independent consumers (mask draws, weight init, negative sampling, ...)
/// get decorrelated deterministic streams.
std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);
std::uint64_t tag64(const std::string& s);

/// Deterministic RNG. Distribution helpers are hand-rolled on top of the
/// raw 64-bit stream so that draws are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    double uniform();                 // [0, 1)
    double normal();                  // standard normal, Box-Muller
    std::uint32_t below(std::uint32_t n);  // uniform in [0, n)

    /// Uniform random subset of size k from {0, ..., n-1}, in draw order.
    std::vector<int> subset(int n, int k);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(static_cast<std::uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mms
