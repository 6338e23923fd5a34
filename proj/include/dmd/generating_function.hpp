// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "dmd/jet.hpp"

namespace dmd {

/// Generating function phi of the (phi, alpha, sigma) logarithm, carried with
/// its first three derivatives.
///
/// Catalog entries build the derivatives by evaluating one generic expression
/// on Jet values; user code can do the same through from_expression() or pass
/// four hand-written callables.
class GeneratingFunction {
 public:
  using Fn = std::function<double(double)>;

  GeneratingFunction(std::string label, Fn phi, Fn dphi, Fn d2phi, Fn d3phi,
                     std::map<std::string, double> params = {})
      : label_(std::move(label)),
        phi_(std::move(phi)),
        dphi_(std::move(dphi)),
        d2phi_(std::move(d2phi)),
        d3phi_(std::move(d3phi)),
        params_(std::move(params)) {}

  /// `expr` must be callable with both double and Jet.
  template <typename Expr>
  static GeneratingFunction from_expression(std::string label, Expr expr,
                                            std::map<std::string, double> params = {}) {
    auto deriv = [expr](int k) {
      return [expr, k](double x) { return expr(Jet::variable(x)).derivative(k); };
    };
    return GeneratingFunction(std::move(label), [expr](double x) { return expr(x); }, deriv(1),
                              deriv(2), deriv(3), std::move(params));
  }

  double operator()(double x) const { return phi_(x); }
  double d1(double x) const { return dphi_(x); }
  double d2(double x) const { return d2phi_(x); }
  double d3(double x) const { return d3phi_(x); }

  const std::string& label() const { return label_; }
  /// Parameters the catalog constructor was called with (empty for custom phi).
  const std::map<std::string, double>& params() const { return params_; }

 private:
  std::string label_;
  Fn phi_, dphi_, d2phi_, d3phi_;
  std::map<std::string, double> params_;
};

/// Catalog of generating functions that reproduce the named deformed logarithms.
namespace phi {

namespace detail {
using std::exp;
using std::log;
using std::pow;

template <typename T>
T power(const T& x, double p) {
  return pow(x, p);
}
}  // namespace detail

/// phi(x) = a x - c. Gives the Tsallis logarithm with sigma = q - 1.
inline GeneratingFunction linear(double a, double c) {
  return GeneratingFunction::from_expression(
      "linear", [a, c](auto x) { return decltype(x)(a) * x - decltype(x)(c); },
      {{"a", a}, {"c", c}});
}

/// phi(x) = 1/x. Gives the extended Kaniadakis logarithm.
inline GeneratingFunction reciprocal() {
  return GeneratingFunction::from_expression("reciprocal",
                                             [](auto x) { return decltype(x)(1.0) / x; });
}

/// phi(x) = lambda^kappa x^(r+kappa) - lambda^-kappa x^(r-kappa) + x.
/// With alpha = 1, sigma = -1 this is the (kappa, r, lambda) logarithm.
inline GeneratingFunction kaniadakis_three(double kappa, double r, double lambda) {
  const double lp = std::pow(lambda, kappa);
  const double lm = std::pow(lambda, -kappa);
  return GeneratingFunction::from_expression(
      "kaniadakis_three",
      [=](auto x) {
        using T = decltype(x);
        return T(lp) * detail::power(x, r + kappa) - T(lm) * detail::power(x, r - kappa) + x;
      },
      {{"kappa", kappa}, {"r", r}, {"lambda", lambda}});
}

/// phi(x) = (x^a - x^b) / (a x^b - b x^a) + x.
/// With alpha = 1, sigma = -1 this is the two-parameter HTG logarithm.
inline GeneratingFunction htg(double a, double b) {
  return GeneratingFunction::from_expression(
      "htg",
      [=](auto x) {
        using T = decltype(x);
        const T xa = detail::power(x, a);
        const T xb = detail::power(x, b);
        return (xa - xb) / (T(a) * xb - T(b) * xa) + x;
      },
      {{"a", a}, {"b", b}});
}

/// phi(x) = (lambda1 x)^a - (lambda2 x)^b + c x. With alpha = 1, sigma = -1,
/// c = 1 it covers the Kaniadakis-Scarfone (a = -b = kappa) and Euler
/// (lambda1 = lambda2 = 1) logarithms.
inline GeneratingFunction power_pair(double lambda1, double a, double lambda2, double b,
                                     double c) {
  return GeneratingFunction::from_expression(
      "power_pair",
      [=](auto x) {
        using T = decltype(x);
        return detail::power(T(lambda1) * x, a) - detail::power(T(lambda2) * x, b) + T(c) * x;
      },
      {{"lambda1", lambda1}, {"a", a}, {"lambda2", lambda2}, {"b", b}, {"c", c}});
}

}  // namespace phi
}  // namespace dmd
