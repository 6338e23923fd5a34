// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "dmd/errors.hpp"
#include "dmd/generating_function.hpp"

namespace dmd {

/// Parameters within this distance of a singular value (q = 1, kappa = 0,
/// a = b, sigma = 0, ...) select the limiting branch.
inline constexpr double kSingularBand = 1e-12;

/// Odd squashing function used by the generalized HTG logarithm.
enum class HKind { Tanh, Arctan };

inline std::string_view to_string(HKind h) { return h == HKind::Tanh ? "tanh" : "arctan"; }

namespace family {

struct Natural {};
/// log(x) = x - 1. Not a deformed logarithm (not strictly concave); it turns
/// MMD into projected gradient descent and exists for that check.
struct Identity {};
struct Tsallis {
  double q = 0.7;
};
struct Kaniadakis {
  double kappa = 0.5;
};
struct ExtKaniadakis {
  double alpha = 0.5;
  double sigma = 0.5;
};
struct KLS {
  double kappa = 0.5;
  double r = 0.2;
};
struct ThreeParam {
  double kappa = 0.5;
  double r = 0.2;
  double lambda = 2.0;
};
struct HTG {
  double a = 0.3;
  double b = -0.2;
};
struct HTGGeneral {
  double a = 0.3;
  double b = -0.2;
  HKind h = HKind::Arctan;
};
struct KS {
  double kappa = 0.5;
  double lambda = 2.0;
};
struct Euler {
  double a = 0.5;
  double b = -0.3;
};
struct Tempesta {
  GeneratingFunction phi = phi::reciprocal();
  double alpha = 2.0;
  double sigma = 0.4;
};

}  // namespace family

using FamilyVariant =
    std::variant<family::Natural, family::Identity, family::Tsallis, family::Kaniadakis,
                 family::ExtKaniadakis, family::KLS, family::ThreeParam, family::HTG,
                 family::HTGGeneral, family::KS, family::Euler, family::Tempesta>;

std::vector<std::string> validate_params(const FamilyVariant& v);

/// Immutable descriptor of a deformed logarithm plus its hyperparameters.
///
/// Validation runs once at construction and the result is cached, so
/// evaluation only checks a flag. Copies share the cached result.
class LinkFamily {
 public:
  LinkFamily() : LinkFamily(family::Natural{}) {}
  LinkFamily(FamilyVariant v)  // NOLINT: implicit conversion from the variant is intended
      : v_(std::move(v)),
        violations_(std::make_shared<const std::vector<std::string>>(validate_params(v_))) {}

  static LinkFamily natural() { return LinkFamily(FamilyVariant(family::Natural{})); }
  static LinkFamily identity() { return LinkFamily(FamilyVariant(family::Identity{})); }
  static LinkFamily tsallis(double q) { return LinkFamily(FamilyVariant(family::Tsallis{q})); }
  static LinkFamily kaniadakis(double kappa) { return LinkFamily(FamilyVariant(family::Kaniadakis{kappa})); }
  static LinkFamily ext_kaniadakis(double alpha, double sigma) {
    return LinkFamily(FamilyVariant(family::ExtKaniadakis{alpha, sigma}));
  }
  static LinkFamily kls(double kappa, double r) { return LinkFamily(FamilyVariant(family::KLS{kappa, r})); }
  static LinkFamily three_param(double kappa, double r, double lambda) {
    return LinkFamily(FamilyVariant(family::ThreeParam{kappa, r, lambda}));
  }
  static LinkFamily htg(double a, double b) { return LinkFamily(FamilyVariant(family::HTG{a, b})); }
  static LinkFamily htg_general(double a, double b, HKind h) {
    return LinkFamily(FamilyVariant(family::HTGGeneral{a, b, h}));
  }
  static LinkFamily ks(double kappa, double lambda) { return LinkFamily(FamilyVariant(family::KS{kappa, lambda})); }
  static LinkFamily euler(double a, double b) { return LinkFamily(FamilyVariant(family::Euler{a, b})); }
  static LinkFamily tempesta(GeneratingFunction phi, double alpha, double sigma) {
    return LinkFamily(FamilyVariant(family::Tempesta{std::move(phi), alpha, sigma}));
  }

  const FamilyVariant& variant() const { return v_; }
  bool valid() const { return violations_->empty(); }
  const std::vector<std::string>& violations() const { return *violations_; }

  /// Throws InvalidParams listing the first violation.
  void require_valid() const {
    if (!valid()) throw InvalidParams(std::string(tag()) + ": " + violations_->front());
  }

  std::string_view tag() const;
  /// Scalar hyperparameters by name (the generating function is not included).
  std::map<std::string, double> params() const;
  /// Human-readable form, e.g. "tsallis(q=0.7)".
  std::string describe() const;

 private:
  FamilyVariant v_;
  std::shared_ptr<const std::vector<std::string>> violations_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline bool near_zero(double v) { return std::abs(v) < kSingularBand; }

/// Shortest representation that reads back to the same double.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double h_eval(HKind h, double z) {
  if (h == HKind::Tanh) return std::tanh(z);
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  return std::atan(kHalfPi * z) / kHalfPi;
}

inline double h_deriv(HKind h, double z) {
  if (h == HKind::Tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  const double s = kHalfPi * z;
  return 1.0 / (1.0 + s * s);
}

/// KLS upper bound on r: 1/2 - |1/2 - |kappa||.
inline double kls_r_max(double kappa) { return 0.5 - std::abs(0.5 - std::abs(kappa)); }

inline void check_finite(std::vector<std::string>& out, std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      out.emplace_back("parameters must be finite");
      return;
    }
  }
}

/// Tempesta validity: alpha phi'(alpha) != 1 and, on a symmetric log grid,
/// positivity of (1 - alpha phi'(y)) / (1 - alpha phi'(alpha)) (monotonicity)
/// and of ((1 + sigma)(1 - alpha phi'(y)) - sigma alpha^2 x^sigma phi''(y)) /
/// (1 - alpha phi'(alpha)) (concavity), with y = alpha x^sigma.
inline void validate_tempesta(const family::Tempesta& t, std::vector<std::string>& out) {
  check_finite(out, {t.alpha, t.sigma});
  if (!out.empty()) return;
  if (near_zero(t.sigma)) return;  // natural-log branch
  const double denom = 1.0 - t.alpha * t.phi.d1(t.alpha);
  if (!std::isfinite(denom)) {
    out.emplace_back("phi'(alpha) is not finite");
    return;
  }
  if (std::abs(denom) < kSingularBand) {
    out.emplace_back("alpha*phi'(alpha) = 1");
    return;
  }
  constexpr int kGrid = 64;
  const double lo = std::log(1e-6);
  const double hi = std::log(1e6);
  for (int i = 0; i < kGrid; ++i) {
    const double x = std::exp(lo + (hi - lo) * i / (kGrid - 1));
    const double xs = std::pow(x, t.sigma);
    const double y = t.alpha * xs;
    const double mono = (1.0 - t.alpha * t.phi.d1(y)) / denom;
    const double conc = ((1.0 + t.sigma) * (1.0 - t.alpha * t.phi.d1(y)) -
                         t.sigma * t.alpha * t.alpha * xs * t.phi.d2(y)) /
                        denom;
    if (!std::isfinite(mono) || !std::isfinite(conc)) {
      out.emplace_back("condition not finite at x=" + fmt_num(x));
      return;
    }
    if (mono <= 0.0) {
      out.emplace_back("monotonicity condition fails at x=" + fmt_num(x));
      return;
    }
    if (conc <= 0.0) {
      out.emplace_back("concavity condition fails at x=" + fmt_num(x));
      return;
    }
  }
}

/// Arctan-generated HTG: with s = (a+b)/2, d = a-b and G(u) = (2/d) h(d u/2),
/// log = G/(1 - sG) is concave in x iff (1 - sG)(G'' - G') + 2 s G'^2 < 0.
/// Tails are concave whenever a*b <= 0, so a grid over z = d u/2 suffices.
inline void validate_htg_arctan(double a, double b, std::vector<std::string>& out) {
  const double d = a - b;
  if (near_zero(d)) return;
  const double s = 0.5 * (a + b);
  constexpr double c = std::numbers::pi / 2.0;
  constexpr int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) {
    const double z = -40.0 + 80.0 * i / (kGrid - 1);
    const double q = 1.0 + c * c * z * z;
    const double g = 2.0 / d * std::atan(c * z) / c;
    const double g1 = 1.0 / q;
    const double g2 = 0.5 * d * (-2.0 * c * c * z / (q * q));
    const double den = 1.0 - s * g;
    if (!(den > 0.0)) {
      out.emplace_back("1 - (a+b)/2 * G must stay positive");
      return;
    }
    if (!(den * (g2 - g1) + 2.0 * s * g1 * g1 < 0.0)) {
      out.emplace_back("concavity condition fails at z=" + fmt_num(z));
      return;
    }
  }
}

/// Shared (a, b) constraints of HTG and Euler: a*b <= 0.
inline void validate_opposite_signs(double a, double b, std::vector<std::string>& out) {
  if (a * b > 0.0) out.emplace_back("a and b must not share a sign (a*b <= 0)");
}

}  // namespace detail

/// Per-family validity constraints. Empty result means the family is a valid
/// link function (monotone, strictly concave, normalized) on all of (0, inf).
inline std::vector<std::string> validate_params(const FamilyVariant& v) {
  std::vector<std::string> out;
  std::visit(
      detail::overloaded{
          [](const family::Natural&) {},
          [](const family::Identity&) {},
          [&](const family::Tsallis& f) {
            detail::check_finite(out, {f.q});
            if (out.empty() && !(f.q > 0.0)) out.emplace_back("q must be > 0");
          },
          [&](const family::Kaniadakis& f) {
            detail::check_finite(out, {f.kappa});
            if (out.empty() && std::abs(f.kappa) > 1.0) out.emplace_back("kappa not in [-1, 1]");
          },
          [&](const family::ExtKaniadakis& f) {
            detail::check_finite(out, {f.alpha, f.sigma});
            if (!out.empty()) return;
            if (std::abs(f.sigma) > 1.0) out.emplace_back("sigma not in [-1, 1]");
            if (!(f.alpha > 0.0)) out.emplace_back("alpha must be > 0");
          },
          [&](const family::KLS& f) {
            detail::check_finite(out, {f.kappa, f.r});
            if (!out.empty()) return;
            if (std::abs(f.kappa) > 1.0) {
              out.emplace_back("kappa not in [-1, 1]");
              return;
            }
            if (f.r < -std::abs(f.kappa) || f.r > detail::kls_r_max(f.kappa)) {
              out.emplace_back("r not in [-|kappa|, 1/2 - |1/2 - |kappa||]");
            }
          },
          [&](const family::ThreeParam& f) {
            detail::check_finite(out, {f.kappa, f.r, f.lambda});
            if (!out.empty()) return;
            if (!(f.lambda > 0.0)) out.emplace_back("lambda must be > 0");
            if (std::abs(f.kappa) > 1.0) out.emplace_back("kappa not in [-1, 1]");
            if (detail::near_zero(f.kappa)) {
              if (!detail::near_zero(f.r)) out.emplace_back("kappa = 0 requires r = 0");
            } else if (!(std::abs(f.r) < std::abs(f.kappa))) {
              out.emplace_back("r not in (-|kappa|, |kappa|)");
            } else if (f.r + std::abs(f.kappa) > 1.0) {
              out.emplace_back("r + |kappa| must be <= 1");
            }
          },
          [&](const family::HTG& f) {
            detail::check_finite(out, {f.a, f.b});
            if (!out.empty()) return;
            detail::validate_opposite_signs(f.a, f.b, out);
            if (!(std::abs(f.a - f.b) < 1.0)) out.emplace_back("|a - b| must be < 1");
          },
          [&](const family::HTGGeneral& f) {
            detail::check_finite(out, {f.a, f.b});
            if (!out.empty()) return;
            detail::validate_opposite_signs(f.a, f.b, out);
            if (!out.empty()) return;
            if (f.h == HKind::Tanh) {
              if (!(std::abs(f.a - f.b) < 1.0)) out.emplace_back("|a - b| must be < 1");
            } else {
              detail::validate_htg_arctan(f.a, f.b, out);
            }
          },
          [&](const family::KS& f) {
            detail::check_finite(out, {f.kappa, f.lambda});
            if (!out.empty()) return;
            if (!(f.lambda > 0.0)) out.emplace_back("lambda must be > 0");
            if (std::abs(f.kappa) > 1.0) out.emplace_back("kappa not in [-1, 1]");
          },
          [&](const family::Euler& f) {
            detail::check_finite(out, {f.a, f.b});
            if (!out.empty()) return;
            detail::validate_opposite_signs(f.a, f.b, out);
            if (!(std::max(f.a, f.b) < 1.0)) out.emplace_back("max(a, b) must be < 1");
          },
          [&](const family::Tempesta& f) { detail::validate_tempesta(f, out); },
      },
      v);
  return out;
}

inline std::vector<std::string> validate_params(const LinkFamily& f) {
  return validate_params(f.variant());
}

inline std::string_view LinkFamily::tag() const {
  return std::visit(
      detail::overloaded{
          [](const family::Natural&) { return std::string_view("natural"); },
          [](const family::Identity&) { return std::string_view("identity"); },
          [](const family::Tsallis&) { return std::string_view("tsallis"); },
          [](const family::Kaniadakis&) { return std::string_view("kaniadakis"); },
          [](const family::ExtKaniadakis&) { return std::string_view("ext_kaniadakis"); },
          [](const family::KLS&) { return std::string_view("kls"); },
          [](const family::ThreeParam&) { return std::string_view("three_param"); },
          [](const family::HTG&) { return std::string_view("htg"); },
          [](const family::HTGGeneral&) { return std::string_view("htg_general"); },
          [](const family::KS&) { return std::string_view("ks"); },
          [](const family::Euler&) { return std::string_view("euler"); },
          [](const family::Tempesta&) { return std::string_view("tempesta"); },
      },
      v_);
}

inline std::map<std::string, double> LinkFamily::params() const {
  return std::visit(
      detail::overloaded{
          [](const family::Natural&) { return std::map<std::string, double>{}; },
          [](const family::Identity&) { return std::map<std::string, double>{}; },
          [](const family::Tsallis& f) { return std::map<std::string, double>{{"q", f.q}}; },
          [](const family::Kaniadakis& f) {
            return std::map<std::string, double>{{"kappa", f.kappa}};
          },
          [](const family::ExtKaniadakis& f) {
            return std::map<std::string, double>{{"alpha", f.alpha}, {"sigma", f.sigma}};
          },
          [](const family::KLS& f) {
            return std::map<std::string, double>{{"kappa", f.kappa}, {"r", f.r}};
          },
          [](const family::ThreeParam& f) {
            return std::map<std::string, double>{
                {"kappa", f.kappa}, {"r", f.r}, {"lambda", f.lambda}};
          },
          [](const family::HTG& f) { return std::map<std::string, double>{{"a", f.a}, {"b", f.b}}; },
          [](const family::HTGGeneral& f) {
            return std::map<std::string, double>{{"a", f.a}, {"b", f.b}};
          },
          [](const family::KS& f) {
            return std::map<std::string, double>{{"kappa", f.kappa}, {"lambda", f.lambda}};
          },
          [](const family::Euler& f) {
            return std::map<std::string, double>{{"a", f.a}, {"b", f.b}};
          },
          [](const family::Tempesta& f) {
            return std::map<std::string, double>{{"alpha", f.alpha}, {"sigma", f.sigma}};
          },
      },
      v_);
}

inline std::string LinkFamily::describe() const {
  std::string s(tag());
  s += '(';
  bool first = true;
  if (const auto* t = std::get_if<family::Tempesta>(&v_)) {
    s += "phi=" + t->phi.label();
    for (const auto& [k, v] : t->phi.params()) s += ',' + k + '=' + detail::fmt_num(v);
    first = false;
  }
  if (const auto* h = std::get_if<family::HTGGeneral>(&v_)) {
    s += "h=" + std::string(to_string(h->h));
    first = false;
  }
  for (const auto& [k, v] : params()) {
    if (!first) s += ',';
    s += k + '=' + detail::fmt_num(v);
    first = false;
  }
  s += ')';
  return s;
}

namespace detail {

inline double checked_log_arg(double x) {
  if (!(x > 0.0)) throw DomainError("deformed logarithm requires x > 0, got " + fmt_num(x));
  return std::log(x);
}

/// (x^a - x^b)/(a - b) written as x^b expm1((a-b) u)/(a-b), u = ln x.
inline double power_difference(double a, double b, double u) {
  const double d = a - b;
  if (near_zero(d)) return std::exp(a * u) * u;
  return std::exp(b * u) * std::expm1(d * u) / d;
}

/// chi(alpha e^t) - chi(alpha) with chi(y) = phi(y) - y / alpha. Near t = 0
/// the direct difference cancels (badly so when alpha phi'(alpha) ~ 1), so
/// chi' = phi' - 1/alpha is integrated instead; the interval is short enough
/// for 10-point Gauss-Legendre to be exact to rounding.
inline double tempesta_numerator(const GeneratingFunction& phi, double alpha, double t) {
  if (std::abs(t) > 0.25) return (phi(alpha * std::exp(t)) - phi(alpha)) - std::expm1(t);
  // Integrate over a unit parameter so the interval length is delta exactly;
  // rounding alpha + delta would cost eps / t relative accuracy.
  const double delta = alpha * std::expm1(t);
  const double inv_alpha = 1.0 / alpha;
  return delta * boost::math::quadrature::gauss<double, 10>::integrate(
                     [&](double s) { return phi.d1(alpha + delta * s) - inv_alpha; }, 0.0, 1.0);
}

inline double tempesta_log(const family::Tempesta& f, double u) {
  if (near_zero(f.sigma)) return u;
  const double t = -f.sigma * u;  // x^-sigma = e^t
  if (f.alpha == 0.0) return -std::expm1(t) / f.sigma;
  const double denom = 1.0 - f.alpha * f.phi.d1(f.alpha);
  return tempesta_numerator(f.phi, f.alpha, t) / (f.sigma * denom);
}

inline double tempesta_dlog(const family::Tempesta& f, double x, double u) {
  if (near_zero(f.sigma)) return 1.0 / x;
  const double s = std::exp(-f.sigma * u);
  if (f.alpha == 0.0) return s / x;
  const double denom = 1.0 - f.alpha * f.phi.d1(f.alpha);
  return s * (1.0 - f.alpha * f.phi.d1(f.alpha * s)) / (x * denom);
}

}  // namespace detail

/// Deformed logarithm of x under `fam`.
///
/// Throws DomainError for x <= 0 and InvalidParams when the family fails
/// validate_params.
inline double log_eval(const LinkFamily& fam, double x) {
  fam.require_valid();
  const double u = detail::checked_log_arg(x);
  using detail::near_zero;
  return std::visit(
      detail::overloaded{
          [&](const family::Natural&) { return u; },
          [&](const family::Identity&) { return x - 1.0; },
          [&](const family::Tsallis& f) {
            const double k = 1.0 - f.q;
            return near_zero(k) ? u : std::expm1(k * u) / k;
          },
          [&](const family::Kaniadakis& f) {
            return near_zero(f.kappa) ? u : std::sinh(f.kappa * u) / f.kappa;
          },
          [&](const family::ExtKaniadakis& f) {
            if (near_zero(f.sigma)) return u;
            return (std::expm1(f.sigma * u) - f.alpha * std::expm1(-f.sigma * u)) /
                   ((1.0 + f.alpha) * f.sigma);
          },
          [&](const family::KLS& f) {
            if (near_zero(f.kappa)) return u;
            return std::exp(f.r * u) * std::sinh(f.kappa * u) / f.kappa;
          },
          [&](const family::ThreeParam& f) {
            if (near_zero(f.kappa)) return u;
            const double lp = std::pow(f.lambda, f.kappa);
            const double lm = 1.0 / lp;
            const double p = f.r + f.kappa;
            const double m = f.r - f.kappa;
            return (lp * std::expm1(p * u) - lm * std::expm1(m * u)) / (p * lp - m * lm);
          },
          [&](const family::HTG& f) {
            const double d = f.a - f.b;
            if (near_zero(d)) return near_zero(f.a) ? u : u / (1.0 - f.a * u);
            if (near_zero(f.a + f.b)) return std::tanh(f.a * u) / f.a;
            const double du = d * u;
            if (du > 0.0) {
              const double e = std::exp(-du);
              return -std::expm1(-du) / (f.a * e - f.b);
            }
            return std::expm1(du) / (f.a - f.b * std::exp(du));
          },
          [&](const family::HTGGeneral& f) {
            const double d = f.a - f.b;
            const double g = near_zero(d) ? u : 2.0 / d * detail::h_eval(f.h, d * u / 2.0);
            return g / (1.0 - 0.5 * (f.a + f.b) * g);
          },
          [&](const family::KS& f) {
            if (near_zero(f.kappa)) return u;
            const double ll = std::log(f.lambda);
            // sinh(k(L+u)) - sinh(kL) = 2 cosh(k(L + u/2)) sinh(k u/2)
            return 2.0 * std::cosh(f.kappa * (ll + 0.5 * u)) * std::sinh(0.5 * f.kappa * u) /
                   (f.kappa * std::cosh(f.kappa * ll));
          },
          [&](const family::Euler& f) { return detail::power_difference(f.a, f.b, u); },
          [&](const family::Tempesta& f) { return detail::tempesta_log(f, u); },
      },
      fam.variant());
}

/// Analytic derivative of log_eval with respect to x.
inline double dlog_eval(const LinkFamily& fam, double x) {
  fam.require_valid();
  const double u = detail::checked_log_arg(x);
  using detail::near_zero;
  return std::visit(
      detail::overloaded{
          [&](const family::Natural&) { return 1.0 / x; },
          [&](const family::Identity&) { return 1.0; },
          [&](const family::Tsallis& f) { return std::exp(-f.q * u); },
          [&](const family::Kaniadakis& f) { return std::cosh(f.kappa * u) / x; },
          [&](const family::ExtKaniadakis& f) {
            if (near_zero(f.sigma)) return 1.0 / x;
            return (std::exp((f.sigma - 1.0) * u) + f.alpha * std::exp((-f.sigma - 1.0) * u)) /
                   (1.0 + f.alpha);
          },
          [&](const family::KLS& f) {
            if (near_zero(f.kappa)) return 1.0 / x;
            return std::exp((f.r - 1.0) * u) *
                   (f.r * std::sinh(f.kappa * u) / f.kappa + std::cosh(f.kappa * u));
          },
          [&](const family::ThreeParam& f) {
            if (near_zero(f.kappa)) return 1.0 / x;
            const double lp = std::pow(f.lambda, f.kappa);
            const double lm = 1.0 / lp;
            const double p = f.r + f.kappa;
            const double m = f.r - f.kappa;
            return (p * lp * std::exp((p - 1.0) * u) - m * lm * std::exp((m - 1.0) * u)) /
                   (p * lp - m * lm);
          },
          [&](const family::HTG& f) {
            const double d = f.a - f.b;
            if (near_zero(d)) {
              const double den = 1.0 - f.a * u;
              return 1.0 / (x * den * den);
            }
            if (near_zero(f.a + f.b)) {
              const double c = std::cosh(f.a * u);
              return 1.0 / (x * c * c);
            }
            const double du = d * u;
            if (du > 0.0) {
              const double e = std::exp(-du);
              const double den = f.a * e - f.b;
              return d * d * e / (x * den * den);
            }
            const double t = std::exp(du);
            const double den = f.a - f.b * t;
            return d * d * t / (x * den * den);
          },
          [&](const family::HTGGeneral& f) {
            const double d = f.a - f.b;
            double g = u;
            double hp = 1.0;
            if (!near_zero(d)) {
              g = 2.0 / d * detail::h_eval(f.h, d * u / 2.0);
              hp = detail::h_deriv(f.h, d * u / 2.0);
            }
            const double den = 1.0 - 0.5 * (f.a + f.b) * g;
            return hp / (x * den * den);
          },
          [&](const family::KS& f) {
            if (near_zero(f.kappa)) return 1.0 / x;
            const double ll = std::log(f.lambda);
            return std::cosh(f.kappa * (ll + u)) / (x * std::cosh(f.kappa * ll));
          },
          [&](const family::Euler& f) {
            const double d = f.a - f.b;
            if (near_zero(d)) return std::exp((f.a - 1.0) * u) * (1.0 + f.a * u);
            return (f.a * std::exp((f.a - 1.0) * u) - f.b * std::exp((f.b - 1.0) * u)) / d;
          },
          [&](const family::Tempesta& f) { return detail::tempesta_dlog(f, x, u); },
      },
      fam.variant());
}

namespace detail {

/// Deformed exponential result: 0 when y lies below the logarithm's range
/// (the [.]_+ clip), DomainError when it lies above (overflow).
inline double finite_or_throw(double value, double y) {
  if (!std::isfinite(value)) {
    throw DomainError("deformed exponential overflows at y=" + fmt_num(y));
  }
  return value;
}

inline double tsallis_exp(double q, double y) {
  const double k = 1.0 - q;
  if (near_zero(k)) return finite_or_throw(std::exp(y), y);
  const double base = 1.0 + k * y;
  if (base <= 0.0) {
    if (k > 0.0) return 0.0;
    throw DomainError("Tsallis exponential undefined: [1+(1-q)y]_+ = 0 with 1/(1-q) < 0");
  }
  return finite_or_throw(std::exp(std::log1p(k * y) / k), y);
}

inline double kaniadakis_exp(double kappa, double y) {
  if (near_zero(kappa)) return finite_or_throw(std::exp(y), y);
  return finite_or_throw(std::exp(std::asinh(kappa * y) / kappa), y);
}

}  // namespace detail

/// Closed-form deformed exponential (inverse of log_eval), or std::nullopt
/// when the family has none; callers then fall back to numeric inversion.
inline std::optional<double> exp_closed(const LinkFamily& fam, double y) {
  fam.require_valid();
  if (!std::isfinite(y)) throw DomainError("deformed exponential requires finite y");
  using detail::near_zero;
  using R = std::optional<double>;
  return std::visit(
      detail::overloaded{
          [&](const family::Natural&) -> R { return detail::finite_or_throw(std::exp(y), y); },
          [&](const family::Identity&) -> R { return std::max(1.0 + y, 0.0); },
          [&](const family::Tsallis& f) -> R { return detail::tsallis_exp(f.q, y); },
          [&](const family::Kaniadakis& f) -> R { return detail::kaniadakis_exp(f.kappa, y); },
          [&](const family::ExtKaniadakis& f) -> R {
            if (near_zero(f.sigma)) return std::exp(y);
            return std::nullopt;
          },
          [&](const family::KLS& f) -> R {
            if (near_zero(f.kappa)) return detail::finite_or_throw(std::exp(y), y);
            if (near_zero(f.r)) return detail::kaniadakis_exp(f.kappa, y);
            if (near_zero(f.r - f.kappa)) return detail::tsallis_exp(1.0 - 2.0 * f.kappa, y);
            if (near_zero(f.r + f.kappa)) return detail::tsallis_exp(1.0 + 2.0 * f.kappa, y);
            return std::nullopt;
          },
          [&](const family::ThreeParam& f) -> R {
            if (near_zero(f.kappa)) return detail::finite_or_throw(std::exp(y), y);
            return std::nullopt;
          },
          [&](const family::HTG& f) -> R {
            const double d = f.a - f.b;
            const double ba = 1.0 + f.a * y;
            const double bb = 1.0 + f.b * y;
            if (near_zero(d)) {
              if (ba <= 0.0) {
                if (y < 0.0) return 0.0;
                throw DomainError("HTG exponential overflows");
              }
              return detail::finite_or_throw(std::exp(y / ba), y);
            }
            if (ba <= 0.0 || bb <= 0.0) {
              if (y < 0.0) return 0.0;
              throw DomainError("HTG exponential overflows at y=" + detail::fmt_num(y));
            }
            return detail::finite_or_throw(
                std::exp((std::log1p(f.a * y) - std::log1p(f.b * y)) / d), y);
          },
          [&](const family::HTGGeneral& f) -> R {
            if (near_zero(f.a) && near_zero(f.b)) return detail::finite_or_throw(std::exp(y), y);
            return std::nullopt;
          },
          [&](const family::KS& f) -> R {
            if (near_zero(f.kappa)) return detail::finite_or_throw(std::exp(y), y);
            const double ll = std::log(f.lambda);
            const double arg = y * std::cosh(f.kappa * ll) + std::sinh(f.kappa * ll) / f.kappa;
            return detail::finite_or_throw(std::exp(std::asinh(f.kappa * arg) / f.kappa - ll), y);
          },
          [&](const family::Euler& f) -> R {
            if (near_zero(f.a) && near_zero(f.b)) return detail::finite_or_throw(std::exp(y), y);
            return std::nullopt;
          },
          [&](const family::Tempesta& f) -> R {
            if (near_zero(f.sigma)) return detail::finite_or_throw(std::exp(y), y);
            return std::nullopt;
          },
      },
      fam.variant());
}

/// Quadratic and cubic coefficients of the expansion
/// log(x) = u + a1 u^2 / 2 + a2 u^3 / 6 + ..., u = ln x.
struct SeriesCoeffs {
  double a1 = 0.0;
  double a2 = 0.0;
};

/// Series coefficients of the (phi, alpha, sigma) logarithm around x = 1:
///   a1 = -sigma (alpha^2 phi'' + alpha phi' - 1) / (alpha phi' - 1)
///   a2 = sigma^2 (alpha^3 phi''' + 3 alpha^2 phi'' + alpha phi' - 1) / (alpha phi' - 1)
/// with every derivative taken at alpha.
inline SeriesCoeffs tempesta_series_coeffs(const GeneratingFunction& phi, double alpha,
                                           double sigma) {
  const double d1 = phi.d1(alpha);
  const double den = alpha * d1 - 1.0;
  if (!std::isfinite(den) || std::abs(den) < kSingularBand) {
    throw InvalidParams("series coefficients undefined: alpha*phi'(alpha) = 1");
  }
  if (sigma == 0.0) return {};
  const double a2_ = alpha * alpha;
  const double d2 = phi.d2(alpha);
  const double d3 = phi.d3(alpha);
  SeriesCoeffs c;
  c.a1 = -sigma * (a2_ * d2 + alpha * d1 - 1.0) / den;
  c.a2 = sigma * sigma * (a2_ * alpha * d3 + 3.0 * a2_ * d2 + alpha * d1 - 1.0) / den;
  return c;
}

/// Trace-form entropy sum_i p_i log(1/p_i).
inline double entropy(const LinkFamily& fam, std::span<const double> p) {
  double s = 0.0;
  for (double pi : p) {
    if (!(pi > 0.0)) throw DomainError("entropy requires strictly positive probabilities");
    s += pi * log_eval(fam, 1.0 / pi);
  }
  return s;
}

/// One catalog entry: tag, a short description of the parameter ranges and a
/// default-parameter instance.
struct CatalogEntry {
  std::string tag;
  std::string ranges;
  LinkFamily defaults;
};

/// Every named deformed logarithm with default hyperparameters. The Identity
/// pseudo-family is not part of the catalog.
inline std::vector<CatalogEntry> catalog() {
  return {
      {"natural", "(no parameters)", LinkFamily::natural()},
      {"tsallis", "q > 0", LinkFamily(FamilyVariant(family::Tsallis{}))},
      {"kaniadakis", "kappa in [-1, 1]", LinkFamily(FamilyVariant(family::Kaniadakis{}))},
      {"ext_kaniadakis", "alpha > 0, sigma in [-1, 1]", LinkFamily(FamilyVariant(family::ExtKaniadakis{}))},
      {"kls", "kappa in [-1, 1], -|kappa| <= r <= 1/2 - |1/2 - |kappa||", LinkFamily(FamilyVariant(family::KLS{}))},
      {"three_param", "lambda > 0, kappa in [-1, 1], -|kappa| < r < |kappa|, r + |kappa| <= 1",
       LinkFamily(FamilyVariant(family::ThreeParam{}))},
      {"htg", "a*b <= 0, |a - b| < 1", LinkFamily(FamilyVariant(family::HTG{}))},
      {"htg_general", "a*b <= 0; tanh: |a - b| < 1; arctan: concave on checked grid", LinkFamily(FamilyVariant(family::HTGGeneral{}))},
      {"ks", "lambda > 0, kappa in [-1, 1]", LinkFamily(FamilyVariant(family::KS{}))},
      {"euler", "a*b <= 0, max(a, b) < 1", LinkFamily(FamilyVariant(family::Euler{}))},
      {"tempesta", "alpha*phi'(alpha) != 1, monotone/concave on [1e-6, 1e6]",
       LinkFamily(FamilyVariant(family::Tempesta{}))},
  };
}

}  // namespace dmd
