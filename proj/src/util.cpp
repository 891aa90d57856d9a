#include "mms/util.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mms {

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return std::string(buf);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = master;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t t : tags) {
        s ^= t + 0x9e3779b97f4a7c15ull + (out << 6) + (out >> 2);
        out = splitmix64(s);
    }
    return out;
}

std::uint64_t tag64(const std::string& s) {
    Fnv1a h;
    h.str(s);
    return h.value();
}

// xoshiro256** seeded via splitmix64.
Rng::Rng(std::uint64_t seed) {
    for (auto& word : s_) word = splitmix64(seed);
    // Avoid the all-zero state.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

std::uint32_t Rng::below(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    // Rejection sampling to avoid modulo bias.
    std::uint64_t threshold = (~std::uint64_t{0} - n + 1) % n;
    for (;;) {
        std::uint64_t r = next();
        if (r >= threshold) return static_cast<std::uint32_t>(r % n);
    }
}

std::vector<int> Rng::subset(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("Rng::subset: k out of range");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: after k swaps the prefix is a uniform k-subset.
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(below(static_cast<std::uint32_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace mms
