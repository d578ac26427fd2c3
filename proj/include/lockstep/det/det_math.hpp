#pragma once

// Transcendental functions built only from IEEE-754 basic operations
// (+, -, *, /, fabs, floor, comparisons and exponent bit manipulation), so
// they return identical bits on every conforming platform. Accuracy is traded
// for that: sin/cos are good to ~1e-3, exp/ln to ~1e-9 relative.
//
// Build with -ffp-contract=off; fused multiply-add would change the bits.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace lockstep::det {

inline constexpr double kPi = 3.141592653589793;
inline constexpr double kTwoPi = 6.283185307179586;
inline constexpr double kHalfPi = 1.5707963267948966;

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Parabola through (0,0), (pi/2,1), (pi,0) and its odd extension.
inline constexpr double kParabolaLinear = 4.0 / kPi;
inline constexpr double kParabolaQuadratic = -4.0 / (kPi * kPi);
// Blend toward y*|y|; 0.224 minimises the peak error (9.2e-4) on [-pi, pi].
inline constexpr double kParabolaCorrection = 0.224;

// ln 2 split so that k * kLn2Hi is exact for |k| < 2^11.
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kInvLn2 = 1.44269504088896338700e+00;
inline constexpr double kSqrt2 = 1.41421356237309504880;

inline constexpr std::uint64_t kExponentMask = 0x7FF0000000000000ULL;
inline constexpr std::uint64_t kMantissaMask = 0x000FFFFFFFFFFFFFULL;
inline constexpr std::uint64_t kExponentOfOne = 0x3FF0000000000000ULL;

// x >= 0, finite.
inline double sin_nonnegative(double x) {
  const double r = x - kTwoPi * std::floor((x + kPi) / kTwoPi);  // [-pi, pi)
  const double y = kParabolaLinear * r + kParabolaQuadratic * r * std::fabs(r);
  return kParabolaCorrection * (y * std::fabs(y) - y) + y;
}

// 2^k for normal exponents, k in [-1022, 1023].
inline double pow2(int k) {
  return std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
}

// p * 2^k, with a single rounding when the result is subnormal.
inline double scale(double p, int k) {
  if (k > 1023) return (p * pow2(1023)) * pow2(k - 1023);
  if (k < -1022) return (p * pow2(k + 1022)) * pow2(-1022);
  return p * pow2(k);
}

}  // namespace detail

/// Corrected-parabola sine. NaN for non-finite input.
/// Exactly odd: det_sin(-x) == -det_sin(x) bit for bit.
inline double det_sin(double x) {
  if (!std::isfinite(x)) return detail::kNaN;
  const double s = detail::sin_nonnegative(std::fabs(x));
  return std::signbit(x) ? -s : s;
}

/// det_sin(|x| + pi/2); exactly even.
inline double det_cos(double x) {
  if (!std::isfinite(x)) return detail::kNaN;
  return detail::sin_nonnegative(std::fabs(x) + kHalfPi);
}

/// det_sin / det_cos. Near the poles the result is a large finite value or
/// +-infinity when det_cos is exactly zero.
inline double det_tan(double x) { return det_sin(x) / det_cos(x); }

/// e^x via x = k ln2 + r, |r| <= ln2/2, and a degree-8 Taylor polynomial for
/// e^r. Overflows to +inf above ~709.78, underflows to 0 below ~-745.13.
inline double det_exp(double x) {
  if (std::isnan(x)) return x;
  if (x > 709.782712893384) return detail::kInf;
  if (x < -746.0) return 0.0;
  const double k = std::floor(x * detail::kInvLn2 + 0.5);
  const double r = (x - k * detail::kLn2Hi) - k * detail::kLn2Lo;
  const double p =
      1.0 + r * (1.0 + r * (5.0e-01 + r * (1.6666666666666666e-01 +
      r * (4.1666666666666664e-02 + r * (8.3333333333333332e-03 +
      r * (1.3888888888888889e-03 + r * (1.9841269841269841e-04 +
      r * 2.4801587301587302e-05)))))));
  return detail::scale(p, static_cast<int>(k));
}

/// Natural log via x = m * 2^e, m in [sqrt(2)/2, sqrt(2)], and the atanh
/// series in s = (m-1)/(m+1). NaN for x <= 0 or NaN, +inf for +inf.
inline double det_ln(double x) {
  if (std::isnan(x) || x <= 0.0) return detail::kNaN;
  if (std::isinf(x)) return x;
  int e = 0;
  if (x < std::numeric_limits<double>::min()) {
    x *= 18014398509481984.0;  // 2^54, lifts subnormals into the normal range
    e = -54;
  }
  const auto bits = std::bit_cast<std::uint64_t>(x);
  e += static_cast<int>((bits & detail::kExponentMask) >> 52) - 1023;
  double m = std::bit_cast<double>((bits & detail::kMantissaMask) | detail::kExponentOfOne);
  if (m > detail::kSqrt2) {
    m *= 0.5;
    ++e;
  }
  const double s = (m - 1.0) / (m + 1.0);
  const double s2 = s * s;
  const double series =
      s * (2.0 + s2 * (6.6666666666666663e-01 + s2 * (4.0000000000000002e-01 +
      s2 * (2.8571428571428570e-01 + s2 * (2.2222222222222221e-01 +
      s2 * (1.8181818181818182e-01 + s2 * (1.5384615384615385e-01 +
      s2 * 1.3333333333333333e-01)))))));
  const double k = static_cast<double>(e);
  return k * detail::kLn2Hi + (series + k * detail::kLn2Lo);
}

}  // namespace lockstep::det
