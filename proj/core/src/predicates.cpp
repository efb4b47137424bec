#include "meshstab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace meshstab {
namespace {

using BigInt = boost::multiprecision::cpp_int;

constexpr double kEpsilon = 0x1p-53;
constexpr double kOrientBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;
constexpr double kInCircleBound = (10.0 + 96.0 * kEpsilon) * kEpsilon;

template <typename T>
int sign_of(const T& v) {
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

// Every finite double is an integer multiple of 2^e for some e. Scaling all
// inputs by a shared power of two turns them into exact big integers and
// leaves the sign of any homogeneous polynomial unchanged.
template <std::size_t N>
std::array<BigInt, N> to_scaled_integers(const std::array<double, N>& values) {
  std::array<std::int64_t, N> mantissa{};
  std::array<int, N> exponent{};
  int min_exp = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < N; ++i) {
    int e = 0;
    const double m = std::frexp(values[i], &e);
    mantissa[i] = static_cast<std::int64_t>(std::ldexp(m, 53));
    exponent[i] = e - 53;
    if (mantissa[i] != 0) min_exp = std::min(min_exp, exponent[i]);
  }
  std::array<BigInt, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = mantissa[i];
    if (mantissa[i] != 0) out[i] <<= static_cast<unsigned>(exponent[i] - min_exp);
  }
  return out;
}

int orient2d_exact(Point2 a, Point2 b, Point2 c) {
  const auto v = to_scaled_integers<6>({a.x, a.y, b.x, b.y, c.x, c.y});
  const BigInt det = (v[0] - v[4]) * (v[3] - v[5]) - (v[1] - v[5]) * (v[2] - v[4]);
  return sign_of(det);
}

int incircle_exact(Point2 a, Point2 b, Point2 c, Point2 d) {
  const auto v = to_scaled_integers<8>({a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y});
  const BigInt adx = v[0] - v[6], ady = v[1] - v[7];
  const BigInt bdx = v[2] - v[6], bdy = v[3] - v[7];
  const BigInt cdx = v[4] - v[6], cdy = v[5] - v[7];
  const BigInt alift = adx * adx + ady * ady;
  const BigInt blift = bdx * bdx + bdy * bdy;
  const BigInt clift = cdx * cdx + cdy * cdy;
  const BigInt det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                     clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d(Point2 a, Point2 b, Point2 c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound || -det > bound) return sign_of(det);
  return orient2d_exact(a, b, c);
}

int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kInCircleBound * permanent;
  if (det > bound || -det > bound) return sign_of(det);
  return incircle_exact(a, b, c, d);
}

}  // namespace meshstab
