#pragma once

// boost 1.74 pchip calls unqualified isnan; <math.h> puts it in the global namespace.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

#include <span>
#include <vector>

#include "ccmp/error.hpp"

namespace ccmp {

/// Monotone piecewise cubic (Fritsch-Carlson) interpolant over strictly increasing
/// abscissae. Evaluation outside [front, back] returns `outside`.
class MonotoneCubic {
 public:
  MonotoneCubic(std::span<const double> x, std::span<const double> y, double outside = 0.0)
      : lo_(x.empty() ? 0.0 : x.front()), hi_(x.empty() ? 0.0 : x.back()), outside_(outside),
        impl_(make(x, y)) {}

  double operator()(double t) const {
    if (t < lo_ || t > hi_) return outside_;
    return impl_(t);
  }

  double prime(double t) const {
    if (t < lo_ || t > hi_) return 0.0;
    return impl_.prime(t);
  }

  double lower() const { return lo_; }
  double upper() const { return hi_; }

 private:
  using Impl = boost::math::interpolators::pchip<std::vector<double>>;

  static Impl make(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 4)
      throw InvalidArgument("MonotoneCubic: need at least 4 matching samples");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw InvalidArgument("MonotoneCubic: abscissae must increase strictly");
    return Impl(std::vector<double>(x.begin(), x.end()), std::vector<double>(y.begin(), y.end()));
  }

  double lo_, hi_, outside_;
  Impl impl_;
};

}  // namespace ccmp
