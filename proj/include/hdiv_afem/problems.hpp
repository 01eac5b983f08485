#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "afem.hpp"
#include "assembly.hpp"
#include "common.hpp"
#include "estimator.hpp"
#include "mesh.hpp"

namespace hdiv_afem {

/// Singular Stokes solution on (-1,1)^2 \ (0,1)^2 with the re-entrant corner
/// at the origin. lambda is the smallest positive root of
/// sin^2(lambda omega) = lambda^2 sin^2(omega) for omega = 3 pi / 2.
/// Theta is measured from the edge {x = 0, y > 0} and runs over [0, 3 pi / 2]
/// through the domain; the velocity is the curl of the stream function
/// r^{1+lambda} psi(Theta).
struct LShapeSolution
{
  double lambda = 0.54448373678246;
  double omega = 1.5 * std::numbers::pi;

  struct Polar
  {
    double r;
    double theta; // angle from the corner edge, in [0, 3 pi / 2]
    double phi;   // standard polar angle, theta + pi / 2
  };

  static Polar polar(const Vec2 &x)
  {
    const double r = std::hypot(x.x, x.y);
    if (r == 0.0)
      throw Error("LShapeSolution: evaluation at the singular corner");
    double t = std::atan2(x.y, x.x) - 0.5 * std::numbers::pi; // in (-3pi/2, pi/2]
    if (t < 0.0)
      t += 2.0 * std::numbers::pi;
    // points on the edge {y = 0, x > 0} sit at the end of the range
    if (t > 1.5 * std::numbers::pi + 1e-14)
      t = 1.5 * std::numbers::pi;
    return {r, t, t + 0.5 * std::numbers::pi};
  }

  /// psi and its first three derivatives.
  std::array<double, 4> psi(double t) const
  {
    const double a = 1.0 + lambda, b = 1.0 - lambda, c = std::cos(lambda * omega);
    const double sa = std::sin(a * t), ca = std::cos(a * t), sb = std::sin(b * t), cb = std::cos(b * t);
    return {
      sa * c / a - ca - sb * c / b + cb,
      ca * c + a * sa - cb * c - b * sb,
      -a * sa * c + a * a * ca + b * sb * c - b * b * cb,
      -a * a * ca * c - a * a * a * sa + b * b * cb * c + b * b * b * sb,
    };
  }

  Vec2 velocity(const Vec2 &x) const
  {
    const Polar p = polar(x);
    const auto s = psi(p.theta);
    const double rl = std::pow(p.r, lambda), sn = std::sin(p.phi), cs = std::cos(p.phi);
    return {rl * ((1.0 + lambda) * sn * s[0] + cs * s[1]), rl * (sn * s[1] - (1.0 + lambda) * cs * s[0])};
  }

  /// Velocity gradient from the second derivatives of the stream function.
  Mat2 gradient(const Vec2 &x) const
  {
    const Polar p = polar(x);
    const auto s = psi(p.theta);
    const double a = 1.0 + lambda, r = p.r;
    const double ra = std::pow(r, a);
    // derivatives of Phi = r^a psi in (r, theta)
    const double pr = a * ra / r * s[0];
    const double pt = ra * s[1];
    const double prr = a * (a - 1.0) * ra / (r * r) * s[0];
    const double prt = a * ra / r * s[1];
    const double ptt = ra * s[2];
    const double sn = std::sin(p.phi), cs = std::cos(p.phi);
    const double pxx = cs * cs * prr + sn * sn * pr / r + sn * sn * ptt / (r * r) - 2.0 * sn * cs * prt / r +
                       2.0 * sn * cs * pt / (r * r);
    const double pyy = sn * sn * prr + cs * cs * pr / r + cs * cs * ptt / (r * r) + 2.0 * sn * cs * prt / r -
                       2.0 * sn * cs * pt / (r * r);
    const double pxy = sn * cs * prr - sn * cs * pr / r - sn * cs * ptt / (r * r) +
                       (cs * cs - sn * sn) * prt / r - (cs * cs - sn * sn) * pt / (r * r);
    // u = (Phi_y, -Phi_x)
    Mat2 g;
    g(0, 0) = pxy;
    g(0, 1) = pyy;
    g(1, 0) = -pxx;
    g(1, 1) = -pxy;
    return g;
  }

  double pressure(const Vec2 &x) const
  {
    const Polar p = polar(x);
    const auto s = psi(p.theta);
    const double a = 1.0 + lambda;
    return -std::pow(p.r, lambda - 1.0) * (a * a * s[1] + s[3]) / (1.0 - lambda);
  }

  /// sin^2(lambda omega) - lambda^2 sin^2(omega)
  double characteristic_residual() const
  {
    const double s = std::sin(lambda * omega), t = std::sin(omega);
    return s * s - lambda * lambda * t * t;
  }
};

/// L-shape benchmark: f = 0, g = exact velocity.
inline Problem lshape_problem()
{
  const LShapeSolution s;
  Problem p;
  p.name = "lshape";
  p.f = [](const Vec2 &) { return Vec2{}; };
  p.f0 = p.f;
  p.g = [s](const Vec2 &x) { return s.velocity(x); };
  p.exact = ExactVelocity{p.g, [s](const Vec2 &x) { return s.gradient(x); }, Vec2{0.0, 0.0}};
  p.initial_cells = lshape_cells();
  return p;
}

/// u = curl(sin^2(pi x) sin^2(pi y)), p = sin(pi x) cos(pi y) on the unit
/// square; f = -Laplace u + grad p.
struct SmoothSolution
{
  static constexpr double pi = std::numbers::pi;

  Vec2 velocity(const Vec2 &x) const
  {
    const double sx = std::sin(pi * x.x), cx = std::cos(pi * x.x);
    const double sy = std::sin(pi * x.y), cy = std::cos(pi * x.y);
    return {2.0 * pi * sx * sx * sy * cy, -2.0 * pi * sx * cx * sy * sy};
  }

  Mat2 gradient(const Vec2 &x) const
  {
    const double s2x = std::sin(2 * pi * x.x), c2x = std::cos(2 * pi * x.x);
    const double s2y = std::sin(2 * pi * x.y), c2y = std::cos(2 * pi * x.y);
    const double sx2 = 0.5 * (1.0 - c2x), sy2 = 0.5 * (1.0 - c2y);
    // u1 = pi sx^2 sin(2 pi y), u2 = -pi sin(2 pi x) sy^2
    Mat2 g;
    g(0, 0) = pi * pi * s2x * s2y;
    g(0, 1) = 2.0 * pi * pi * sx2 * c2y;
    g(1, 0) = -2.0 * pi * pi * c2x * sy2;
    g(1, 1) = -pi * pi * s2x * s2y;
    return g;
  }

  Vec2 laplacian(const Vec2 &x) const
  {
    const double s2x = std::sin(2 * pi * x.x), c2x = std::cos(2 * pi * x.x);
    const double s2y = std::sin(2 * pi * x.y), c2y = std::cos(2 * pi * x.y);
    const double p3 = pi * pi * pi;
    // u1 = (pi/2)(1 - c2x) s2y, u2 = -(pi/2) s2x (1 - c2y)
    return {2.0 * p3 * c2x * s2y - 2.0 * p3 * (1.0 - c2x) * s2y,
            -(-2.0 * p3 * s2x * (1.0 - c2y) + 2.0 * p3 * s2x * c2y)};
  }

  double pressure(const Vec2 &x) const { return std::sin(pi * x.x) * std::cos(pi * x.y); }

  Vec2 pressure_gradient(const Vec2 &x) const
  {
    return {pi * std::cos(pi * x.x) * std::cos(pi * x.y), -pi * std::sin(pi * x.x) * std::sin(pi * x.y)};
  }

  Vec2 forcing(const Vec2 &x) const { return pressure_gradient(x) - laplacian(x); }
  /// Divergence-free part of the forcing.
  Vec2 forcing0(const Vec2 &x) const { return -1.0 * laplacian(x); }
};

inline Problem smooth_problem()
{
  const SmoothSolution s;
  Problem p;
  p.name = "manufactured";
  p.f = [s](const Vec2 &x) { return s.forcing(x); };
  p.f0 = [s](const Vec2 &x) { return s.forcing0(x); };
  p.g = [s](const Vec2 &x) { return s.velocity(x); };
  p.exact = ExactVelocity{p.g, [s](const Vec2 &x) { return s.gradient(x); }, std::nullopt};
  p.initial_cells = grid_cells({0.0, 0.0, 1.0, 1.0}, 2, 2);
  return p;
}

} // namespace hdiv_afem
