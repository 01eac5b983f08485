#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdiv_afem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

using CellId = int;
using FaceId = int;
inline constexpr int invalid_id = -1;

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  double &operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }

  Vec2 &operator+=(const Vec2 &o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2 &operator-=(const Vec2 &o)
  {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2 &operator*=(double s)
  {
    x *= s;
    y *= s;
    return *this;
  }
};

inline Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double norm_sq(const Vec2 &a) { return dot(a, a); }

/// 2x2 tensor, `a[i][j]` = d v_i / d x_j when used as a velocity gradient.
struct Mat2
{
  std::array<std::array<double, 2>, 2> a{};

  double &operator()(int i, int j) { return a[i][j]; }
  double operator()(int i, int j) const { return a[i][j]; }

  Mat2 &operator+=(const Mat2 &o)
  {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        a[i][j] += o.a[i][j];
    return *this;
  }
  Mat2 &operator-=(const Mat2 &o)
  {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        a[i][j] -= o.a[i][j];
    return *this;
  }
  Mat2 &operator*=(double s)
  {
    for (auto &row : a)
      for (auto &v : row)
        v *= s;
    return *this;
  }

  Vec2 operator*(const Vec2 &n) const
  {
    return {a[0][0] * n.x + a[0][1] * n.y, a[1][0] * n.x + a[1][1] * n.y};
  }
};

inline Mat2 operator+(Mat2 a, const Mat2 &b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2 &b) { return a -= b; }
inline Mat2 operator*(double s, Mat2 a) { return a *= s; }

inline double frobenius_dot(const Mat2 &a, const Mat2 &b)
{
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      s += a(i, j) * b(i, j);
  return s;
}
inline double frobenius_sq(const Mat2 &a) { return frobenius_dot(a, a); }

} // namespace hdiv_afem
