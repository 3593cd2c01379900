#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace chessmix {

/// Accumulates doubles without intermediate rounding (Shewchuk partials, as
/// in Python's math.fsum) and rounds once to nearest on value().
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  /// Adds factor * count exactly (two-product via fma).
  void add_product(double factor, std::uint64_t count) {
    const auto c = static_cast<double>(count);
    const double hi = factor * c;
    add(hi);
    add(std::fma(factor, c, -hi));
  }

  double value() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    // Half-way case: nudge toward the sign of the remaining partials.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

}  // namespace chessmix
