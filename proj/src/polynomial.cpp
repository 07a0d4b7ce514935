#include "pcrbtrack/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace pcrbtrack {

Polynomial::Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { trim(); }

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (degree() > kMaxDegree) throw std::length_error("polynomial degree exceeds 32");
}

double Polynomial::operator[](int q) const {
  return (q >= 0 && q <= degree()) ? coeffs_[static_cast<size_t>(q)] : 0.0;
}

double Polynomial::eval(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (degree() < 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (size_t q = 1; q < coeffs_.size(); ++q) d[q - 1] = static_cast<double>(q) * coeffs_[q];
  return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0.0);
  for (size_t q = 0; q < o.coeffs_.size(); ++q) coeffs_[q] += o.coeffs_[q];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0.0);
  for (size_t q = 0; q < o.coeffs_.size(); ++q) coeffs_[q] -= o.coeffs_[q];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  trim();
  return *this;
}

Polynomial Polynomial::multiply(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.degree() + b.degree() > kMaxDegree)
    throw std::length_error("polynomial product degree exceeds 32");
  std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (size_t i = 0; i < a.coeffs_.size(); ++i)
    for (size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::pow(int k) const {
  Polynomial out = constant(1.0);
  for (int i = 0; i < k; ++i) out = multiply(out, *this);
  return out;
}

Polynomial Polynomial::compose_affine(double s, double m) const {
  // Horner in the polynomial ring: p(y) = (...(c_n y + c_{n-1}) y + ...) with y = s u + m.
  const Polynomial y = affine(s, m);
  Polynomial acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = multiply(acc, y) + constant(*it);
  return acc;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

namespace {

// Diagonal similarity scaling of the companion matrix (LAPACK dgebal style).
void balance(Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  constexpr double kRadix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (int i = 0; i < n; ++i) {
      const double c = A.col(i).lpNorm<1>() - std::abs(A(i, i));
      const double r = A.row(i).lpNorm<1>() - std::abs(A(i, i));
      if (c == 0.0 || r == 0.0) continue;
      double g = r / kRadix;
      double f = 1.0;
      const double s = c + r;
      double cc = c;
      while (cc < g) {
        f *= kRadix;
        cc *= kRadix * kRadix;
      }
      g = r * kRadix;
      while (cc > g) {
        f /= kRadix;
        cc /= kRadix * kRadix;
      }
      if ((r + cc) < 0.95 * s * f) {
        converged = false;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
}

std::vector<double> real_roots_in(const Polynomial& p, double lo, double hi, double imag_tol) {
  std::vector<double> roots;
  // Drop numerically-vanishing leading terms; their roots sit far outside any
  // interval the planner uses.
  const double scale = p.max_abs_coeff();
  int n = p.degree();
  while (n > 0 && std::abs(p[n]) <= 1e-14 * scale) --n;
  if (n < 1) return roots;

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) C(0, i) = -p[n - 1 - i] / p[n];
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  balance(C);

  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("companion eigen-solve failed");

  const Polynomial dp = p.derivative();
  const double pad = 1e-9 * std::max(1.0, hi - lo);
  for (int i = 0; i < n; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) >= imag_tol) continue;
    double r = z.real();
    if (r < lo - pad || r > hi + pad) continue;
    // Newton polish; keep the original if it does not improve |p|.
    for (int it = 0; it < 3; ++it) {
      const double f = p.eval(r);
      const double df = dp.eval(r);
      if (df == 0.0 || !std::isfinite(f / df)) break;
      const double next = r - f / df;
      if (std::abs(p.eval(next)) >= std::abs(f) || std::abs(next - r) > 1e-6 * (1.0 + std::abs(r)))
        break;
      r = next;
    }
    roots.push_back(std::clamp(r, lo, hi));
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots)
    if (merged.empty() || std::abs(r - merged.back()) > 1e-10) merged.push_back(r);
  return merged;
}

}  // namespace

std::vector<double> real_roots_in_unit_interval(const Polynomial& p) {
  return real_roots_in(p, -1.0, 1.0, 1e-8);
}

Minimum minimize_on_interval(const Polynomial& p, const Interval& iv) {
  if (!(iv.lo <= iv.hi)) throw std::invalid_argument("minimize_on_interval: empty interval");
  if (iv.lo == iv.hi) return {iv.lo, p.eval(iv.lo)};

  const AffineMap map = AffineMap::onto(iv);
  const Polynomial q = p.compose_affine(map.half_width, map.center);
  Minimum best{iv.lo, q.eval(-1.0)};
  const double v_hi = q.eval(1.0);
  if (v_hi < best.value) best = {iv.hi, v_hi};
  for (double u : real_roots_in_unit_interval(q.derivative())) {
    const double v = q.eval(u);
    if (v < best.value) best = {iv.clamp(map.to_x(u)), v};
  }
  return best;
}

Minimum minimize_on_interval_unnormalized(const Polynomial& p, const Interval& iv) {
  if (!(iv.lo <= iv.hi)) throw std::invalid_argument("minimize_on_interval: empty interval");
  Minimum best{iv.lo, p.eval(iv.lo)};
  const double v_hi = p.eval(iv.hi);
  if (v_hi < best.value) best = {iv.hi, v_hi};
  for (double x : real_roots_in(p.derivative(), iv.lo, iv.hi, 1e-8 * std::max(1.0, iv.width()))) {
    const double v = p.eval(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

}  // namespace pcrbtrack
