#ifndef SPECSUB_NUMERIC_HPP
#define SPECSUB_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace specsub {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// Neumaier-compensated running sum. Results are independent of how the
/// terms were grouped to within a few ulps of the total.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum &operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// splitmix64 finalizer; used to derive independent sub-seeds from a master.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for a named component (e.g. "proposal", "projection") and an
/// optional index (e.g. group number). Fixed derivation, so any stage can be
/// rerun in isolation.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(master ^ h) + index);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

} // namespace specsub

#endif
