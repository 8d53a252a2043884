#include "colearn/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace colearn {

namespace {

Interval padded_range(std::span<const double> v, double padding, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string("no samples to derive the ") + what + " range from");
  if (padding < 0.0) throw std::invalid_argument("padding must be nonnegative");
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  Interval iv{*mn, *mx};
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
    throw std::invalid_argument(std::string("non-finite ") + what + " sample");
  if (!(iv.hi > iv.lo)) throw std::invalid_argument(std::string("degenerate ") + what + " range: all samples equal");
  const double pad = padding * iv.width();
  iv.lo -= pad;
  iv.hi += pad;
  return iv;
}

double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

}  // namespace

LearningDomain domain_from_data(std::span<const double> r, std::span<const double> s, double padding) {
  LearningDomain d;
  d.r = padded_range(r, padding, "distance");
  d.r.lo = std::max(0.0, d.r.lo);
  if (!s.empty()) d.s = padded_range(s, padding, "feature");
  return d;
}

LearningDomain domain_from_data(std::span<const double> r, double padding) {
  return domain_from_data(r, std::span<const double>{}, padding);
}

const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::pw_constant: return "pw-constant";
    case BasisKind::pw_linear: return "pw-linear";
    case BasisKind::tensor_pw_linear: return "tensor-pw-linear";
    case BasisKind::bspline2: return "clamped-bspline-2";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "pw-constant") return BasisKind::pw_constant;
  if (s == "pw-linear") return BasisKind::pw_linear;
  if (s == "tensor-pw-linear") return BasisKind::tensor_pw_linear;
  if (s == "clamped-bspline-2") return BasisKind::bspline2;
  throw std::invalid_argument("unknown basis kind: " + s);
}

Basis::Basis(BasisSpec spec) : spec_(std::move(spec)) {
  const Interval& r = spec_.domain.r;
  if (!(r.hi > r.lo) || r.lo < 0.0) throw std::invalid_argument("learning domain must satisfy 0 <= R_min < R_max");
  switch (spec_.kind) {
    case BasisKind::pw_constant:
      if (spec_.count_r < 1) throw std::invalid_argument("pw-constant basis needs at least one piece");
      size_ = spec_.count_r;
      step_r_ = r.width() / spec_.count_r;
      break;
    case BasisKind::pw_linear:
      if (spec_.count_r < 2) throw std::invalid_argument("pw-linear basis needs at least two nodes");
      size_ = spec_.count_r;
      step_r_ = r.width() / (spec_.count_r - 1);
      break;
    case BasisKind::tensor_pw_linear:
      if (!spec_.domain.s) throw std::invalid_argument("tensor basis requires a two-dimensional domain");
      if (!(spec_.domain.s->hi > spec_.domain.s->lo)) throw std::invalid_argument("degenerate feature interval");
      if (spec_.count_r < 2 || spec_.count_s < 2) throw std::invalid_argument("tensor basis needs two nodes per axis");
      size_ = spec_.count_r * spec_.count_s;
      step_r_ = r.width() / (spec_.count_r - 1);
      step_s_ = spec_.domain.s->width() / (spec_.count_s - 1);
      break;
    case BasisKind::bspline2: {
      if (spec_.count_r < 3) throw std::invalid_argument("quadratic B-spline basis needs at least three functions");
      size_ = spec_.count_r;
      const int spans = size_ - 2;
      step_r_ = r.width() / spans;
      knots_.assign(3, r.lo);
      for (int i = 1; i < spans; ++i) knots_.push_back(r.lo + step_r_ * i);
      knots_.insert(knots_.end(), 3, r.hi);
      break;
    }
  }
}

bool Basis::inside(double r, double s) const {
  if (!(r >= spec_.domain.r.lo && r <= spec_.domain.r.hi)) return false;
  if (spec_.kind == BasisKind::tensor_pw_linear) return s >= spec_.domain.s->lo && s <= spec_.domain.s->hi;
  return true;
}

int Basis::bspline_span(double r) const {
  const int spans = size_ - 2;
  int q = static_cast<int>(std::floor((r - spec_.domain.r.lo) / step_r_));
  q = std::clamp(q, 0, spans - 1);
  return q + 2;
}

int Basis::nonzero(double r, double s, int* idx, double* val) const {
  if (!inside(r, s)) return 0;
  const double lo = spec_.domain.r.lo;
  switch (spec_.kind) {
    case BasisKind::pw_constant: {
      int p = static_cast<int>(std::floor((r - lo) / step_r_));
      p = std::clamp(p, 0, size_ - 1);
      idx[0] = p;
      val[0] = 1.0;
      return 1;
    }
    case BasisKind::pw_linear: {
      int p = static_cast<int>(std::floor((r - lo) / step_r_));
      p = std::clamp(p, 0, size_ - 2);
      const double t = (r - (lo + p * step_r_)) / step_r_;
      idx[0] = p;
      val[0] = 1.0 - t;
      idx[1] = p + 1;
      val[1] = t;
      return 2;
    }
    case BasisKind::tensor_pw_linear: {
      const int nr = spec_.count_r, ns = spec_.count_s;
      const double slo = spec_.domain.s->lo;
      int p = std::clamp(static_cast<int>(std::floor((r - lo) / step_r_)), 0, nr - 2);
      int q = std::clamp(static_cast<int>(std::floor((s - slo) / step_s_)), 0, ns - 2);
      const double tr = (r - (lo + p * step_r_)) / step_r_;
      const double ts = (s - (slo + q * step_s_)) / step_s_;
      const double wr[2] = {1.0 - tr, tr};
      const double ws[2] = {1.0 - ts, ts};
      int c = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          idx[c] = (p + a) * ns + (q + b);
          val[c] = wr[a] * ws[b];
          ++c;
        }
      return 4;
    }
    case BasisKind::bspline2: {
      // Cox-de Boor triangle for the three functions alive on this span
      const int mu = bspline_span(r);
      const auto& u = knots_;
      double n[3] = {1.0, 0.0, 0.0};
      double left[3] = {0, 0, 0}, right[3] = {0, 0, 0};
      for (int j = 1; j <= 2; ++j) {
        left[j] = r - u[static_cast<std::size_t>(mu + 1 - j)];
        right[j] = u[static_cast<std::size_t>(mu + j)] - r;
        double saved = 0.0;
        for (int k = 0; k < j; ++k) {
          const double temp = n[k] / (right[k + 1] + left[j - k]);
          n[k] = saved + right[k + 1] * temp;
          saved = left[j - k] * temp;
        }
        n[j] = saved;
      }
      for (int k = 0; k < 3; ++k) {
        idx[k] = mu - 2 + k;
        val[k] = n[k];
      }
      return 3;
    }
  }
  return 0;
}

double Basis::eval(int j, double r, double s) const {
  if (j < 0 || j >= size_) throw std::out_of_range("basis index out of range");
  int idx[kMaxSupport];
  double val[kMaxSupport];
  const int m = nonzero(r, s, idx, val);
  for (int k = 0; k < m; ++k)
    if (idx[k] == j) return val[k];
  return 0.0;
}

double Basis::combine(std::span<const double> coeffs, double r, double s) const {
  if (static_cast<int>(coeffs.size()) != size_) throw std::invalid_argument("coefficient count differs from basis size");
  int idx[kMaxSupport];
  double val[kMaxSupport];
  const int m = nonzero(r, s, idx, val);
  double acc = 0.0;
  for (int k = 0; k < m; ++k) acc += coeffs[static_cast<std::size_t>(idx[k])] * val[k];
  return acc;
}

std::vector<double> Basis::interval_centers() const {
  const double lo = spec_.domain.r.lo;
  int pieces = 0;
  switch (spec_.kind) {
    case BasisKind::pw_constant: pieces = size_; break;
    case BasisKind::pw_linear:
    case BasisKind::tensor_pw_linear: pieces = spec_.count_r - 1; break;
    case BasisKind::bspline2: pieces = size_ - 2; break;
  }
  std::vector<double> c(static_cast<std::size_t>(pieces));
  for (int i = 0; i < pieces; ++i) c[static_cast<std::size_t>(i)] = lo + (i + 0.5) * step_r_;
  return c;
}

double Basis::bspline_second(int i, int mu) const {
  const auto& u = knots_;
  auto knot = [&](int k) { return u[static_cast<std::size_t>(k)]; };
  auto n0 = [&](int k) { return k == mu ? 1.0 : 0.0; };
  auto d1 = [&](int k) {
    return safe_div(n0(k), knot(k + 1) - knot(k)) - safe_div(n0(k + 1), knot(k + 2) - knot(k + 1));
  };
  return 2.0 * (safe_div(d1(i), knot(i + 2) - knot(i)) - safe_div(d1(i + 1), knot(i + 3) - knot(i + 1)));
}

double Basis::second_derivative(int j, double r) const {
  if (spec_.kind != BasisKind::bspline2) throw std::logic_error("second derivatives are defined for B-splines only");
  if (!inside(r, 0.0)) return 0.0;
  const int mu = bspline_span(r);
  if (j < mu - 2 || j > mu) return 0.0;
  return bspline_second(j, mu);
}

Eigen::MatrixXd Basis::roughness_matrix() const {
  if (spec_.kind != BasisKind::bspline2) throw std::logic_error("roughness matrix requires a quadratic B-spline basis");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(size_, size_);
  const int spans = size_ - 2;
  for (int q = 0; q < spans; ++q) {
    const int mu = q + 2;
    const double w = knots_[static_cast<std::size_t>(mu + 1)] - knots_[static_cast<std::size_t>(mu)];
    double dd[3];
    for (int k = 0; k < 3; ++k) dd[k] = bspline_second(mu - 2 + k, mu);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r(mu - 2 + a, mu - 2 + b) += dd[a] * dd[b] * w;
  }
  return r;
}

}  // namespace colearn
