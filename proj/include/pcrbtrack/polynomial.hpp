#pragma once

#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pcrbtrack {

/// Real univariate polynomial; coeffs()[q] multiplies x^q. Degree is capped at
/// kMaxDegree, which covers every product built by the planner.
class Polynomial {
 public:
  static constexpr int kMaxDegree = 32;

  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs);
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial constant(double c) { return Polynomial({c}); }
  /// s * x + m
  static Polynomial affine(double s, double m) { return Polynomial({m, s}); }

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  std::span<const double> coeffs() const { return coeffs_; }
  /// Coefficient of x^q, zero past the degree.
  double operator[](int q) const;

  double eval(double x) const;
  Polynomial derivative() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) { return multiply(a, b); }

  /// Throws std::length_error when the product degree exceeds kMaxDegree.
  static Polynomial multiply(const Polynomial& a, const Polynomial& b);
  Polynomial pow(int k) const;

  /// p(s * u + m) as a polynomial in u.
  Polynomial compose_affine(double s, double m) const;

  double max_abs_coeff() const;
  bool operator==(const Polynomial&) const = default;

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

/// Affine map between an interval and [-1, 1]: x = center + half_width * u.
struct AffineMap {
  double center = 0.0;
  double half_width = 1.0;

  static AffineMap onto(const Interval& iv) { return {iv.mid(), 0.5 * iv.width()}; }
  double to_x(double u) const { return center + half_width * u; }
  double to_u(double x) const { return (x - center) / half_width; }
};

struct Minimum {
  double x = 0.0;
  double value = 0.0;
};

/// Real roots of p in [-1, 1]: companion-matrix eigenvalues with imaginary
/// part below 1e-8, polished by Newton and merged within 1e-10.
std::vector<double> real_roots_in_unit_interval(const Polynomial& p);

/// Global minimum over [lo, hi] by comparing both endpoints with every
/// stationary point. The interval is mapped onto [-1, 1] before root finding.
Minimum minimize_on_interval(const Polynomial& p, const Interval& iv);

/// Same as minimize_on_interval but roots are taken in the raw variable. Used
/// to check that normalization does not move the answer.
Minimum minimize_on_interval_unnormalized(const Polynomial& p, const Interval& iv);

}  // namespace pcrbtrack
