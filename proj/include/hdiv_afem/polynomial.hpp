#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace hdiv_afem {

/// Univariate polynomial in the monomial basis, coefficient k multiplies x^k.
/// Only low degrees (below ~10) are used, where the monomial basis is benign.
class Polynomial
{
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients)
    : coefficients_(std::move(coefficients))
  {}

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  const std::vector<double> &coefficients() const { return coefficients_; }

  double operator()(double x) const
  {
    double v = 0.0;
    for (std::size_t k = coefficients_.size(); k-- > 0;)
      v = v * x + coefficients_[k];
    return v;
  }

  Polynomial derivative() const
  {
    if (coefficients_.size() <= 1)
      return Polynomial({0.0});
    std::vector<double> d(coefficients_.size() - 1);
    for (std::size_t k = 1; k < coefficients_.size(); ++k)
      d[k - 1] = static_cast<double>(k) * coefficients_[k];
    return Polynomial(std::move(d));
  }

  Polynomial &operator*=(double s)
  {
    for (auto &c : coefficients_)
      c *= s;
    return *this;
  }

  friend Polynomial operator+(const Polynomial &a, const Polynomial &b)
  {
    std::vector<double> c(std::max(a.coefficients_.size(), b.coefficients_.size()), 0.0);
    for (std::size_t k = 0; k < a.coefficients_.size(); ++k)
      c[k] += a.coefficients_[k];
    for (std::size_t k = 0; k < b.coefficients_.size(); ++k)
      c[k] += b.coefficients_[k];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(const Polynomial &a, const Polynomial &b)
  {
    if (a.coefficients_.empty() || b.coefficients_.empty())
      return Polynomial({0.0});
    std::vector<double> c(a.coefficients_.size() + b.coefficients_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coefficients_.size(); ++i)
      for (std::size_t j = 0; j < b.coefficients_.size(); ++j)
        c[i + j] += a.coefficients_[i] * b.coefficients_[j];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(double s, Polynomial p) { return p *= s; }

private:
  std::vector<double> coefficients_{0.0};
};

/// Legendre polynomial L_n on [-1,1] with L_n(1) = 1.
inline Polynomial legendre(int n)
{
  Polynomial p0({1.0});
  if (n == 0)
    return p0;
  Polynomial p1({0.0, 1.0});
  const Polynomial x({0.0, 1.0});
  for (int k = 1; k < n; ++k)
  {
    // (k+1) L_{k+1} = (2k+1) x L_k - k L_{k-1}
    Polynomial next = (static_cast<double>(2 * k + 1) / (k + 1)) * (x * p1) +
                      (-static_cast<double>(k) / (k + 1)) * p0;
    p0 = std::move(p1);
    p1 = std::move(next);
  }
  return p1;
}

/// Squared L2(-1,1) norm of L_n.
inline double legendre_norm_sq(int n) { return 2.0 / (2.0 * n + 1.0); }

/// Value and first derivative of L_n at x by the three-term recurrence.
inline std::pair<double, double> legendre_value_and_derivative(int n, double x)
{
  double p0 = 1.0, p1 = x;
  if (n == 0)
    return {1.0, 0.0};
  for (int k = 1; k < n; ++k)
  {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  // derivative from (1-x^2) L_n' = n (L_{n-1} - x L_n), valid away from +-1
  const double dp = n * (p0 - x * p1) / (1.0 - x * x);
  return {p1, dp};
}

} // namespace hdiv_afem
