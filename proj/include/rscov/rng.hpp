#pragma once

#include <cstdint>
#include <random>

namespace rscov {

namespace detail {
// splitmix64 finalizer, used both to seed engines and to mix substream keys
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Keyed random stream. Substreams are derived from the key, not from the
// engine state, so child(a, b) is the same stream no matter how many draws
// were taken from the parent. This is what makes procedure runs and
// experiment reports independent of worker scheduling.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : key_(detail::mix64(seed)), engine_(key_) {}

    RngStream child(std::uint64_t a) const { return RngStream(detail::mix64(key_ ^ detail::mix64(a))); }
    RngStream child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }
    RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return child(a).child(b).child(c);
    }

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller, pairs cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rscov
