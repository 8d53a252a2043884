#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace colearn {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

struct LearningDomain {
  Interval r;
  std::optional<Interval> s;
  bool operator==(const LearningDomain&) const = default;
};

/// Observed range of r (and s) widened by a relative padding on each side.
/// R_min is clamped at 0.
LearningDomain domain_from_data(std::span<const double> r, std::span<const double> s, double padding);
LearningDomain domain_from_data(std::span<const double> r, double padding);

enum class BasisKind { pw_constant, pw_linear, tensor_pw_linear, bspline2 };

const char* to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

struct BasisSpec {
  BasisKind kind = BasisKind::pw_constant;
  int count_r = 1;  // pieces (pw-constant), nodes (pw-linear), functions (B-spline)
  int count_s = 0;  // tensor kinds only
  LearningDomain domain;

  bool operator==(const BasisSpec&) const = default;
};

/// Uniform piecewise-polynomial or B-spline family on a learning domain.
/// All evaluation is zero outside the domain.
class Basis {
 public:
  static constexpr int kMaxSupport = 4;

  Basis() = default;
  explicit Basis(BasisSpec spec);

  const BasisSpec& spec() const { return spec_; }
  int size() const { return size_; }
  bool two_variable() const { return spec_.kind == BasisKind::tensor_pw_linear; }

  double eval(int j, double r, double s = 0.0) const;

  /// Indices and values of the basis functions that may be nonzero at the
  /// point; returns how many were written (at most kMaxSupport).
  int nonzero(double r, double s, int* idx, double* val) const;

  double combine(std::span<const double> coeffs, double r, double s = 0.0) const;

  /// Mid-points of the sub-intervals along r on which the family is built.
  std::vector<double> interval_centers() const;

  /// B-spline only: knot vector and second derivatives.
  const std::vector<double>& knots() const { return knots_; }
  double second_derivative(int j, double r) const;
  /// Exact matrix of integrals of psi_j'' psi_k'' over the domain.
  Eigen::MatrixXd roughness_matrix() const;

 private:
  bool inside(double r, double s) const;
  int bspline_span(double r) const;
  double bspline_second(int j, int span) const;

  BasisSpec spec_;
  int size_ = 0;
  double step_r_ = 1.0;
  double step_s_ = 1.0;
  std::vector<double> knots_;
};

}  // namespace colearn
