#pragma once
/// Test functions, the second difference Delta_phi, its cutoff variant and the
/// interaction kernels.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wtk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;  // may be empty
  double support_upper = kInf;
  std::optional<double> value_at_infinity;
  /// Number of continuous derivatives (1 or 2 for everything built here).
  int smoothness = 1;
  std::string name;

  double operator()(double x) const { return value(x); }
  bool has_d2() const { return static_cast<bool>(d2); }
};

/// phi(x + y) - 2 phi(x) + phi(x - y) for x >= y >= 0.
inline double delta_phi(const TestFunction& phi, double x, double y) {
  if (x < y) throw std::invalid_argument("delta_phi: requires x >= y");
  if (y < 0.0) throw std::invalid_argument("delta_phi: requires y >= 0");
  if (y == 0.0) return 0.0;
  return phi.value(x + y) - 2.0 * phi.value(x) + phi.value(x - y);
}

/// Cubic smoothstep cutoff: 0 on [0, eps], 1 on [2 eps, inf).
inline double eta_eps(double x, double eps) {
  const double u = (x - eps) / eps;
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

inline double delta_phi_eps(const TestFunction& phi, double x, double y, double eps) {
  if (x < y) throw std::invalid_argument("delta_phi_eps: requires x >= y");
  if (y < eps) return 0.0;
  const double e = eta_eps(x - y, eps);
  double out = 0.0;
  if (e < 1.0) out += (1.0 - e) * (phi.value(2.0 * x) - 2.0 * phi.value(x));
  if (e > 0.0) out += e * delta_phi(phi, x, y);
  return out;
}

/// ((x + eps)(y + eps))^{-1/2}.
inline double kernel_reg(double x, double y, double eps) {
  if (x < 0.0 || y < 0.0 || eps < 0.0) {
    throw std::invalid_argument("kernel_reg: arguments must be nonnegative");
  }
  if (eps == 0.0 && (x == 0.0 || y == 0.0)) {
    throw std::domain_error("kernel_reg: singular at the origin with eps = 0");
  }
  return 1.0 / std::sqrt((x + eps) * (y + eps));
}

// ---------------------------------------------------------------------------
// Constructors.

inline TestFunction constant_function(double c = 1.0) {
  TestFunction f;
  f.value = [c](double) { return c; };
  f.d1 = [](double) { return 0.0; };
  f.d2 = [](double) { return 0.0; };
  f.value_at_infinity = c;
  f.smoothness = 2;
  f.name = "constant";
  return f;
}

/// x / (1 + eps x): the identity saturated at 1/eps.
inline TestFunction saturating(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("saturating: eps must be > 0");
  TestFunction f;
  f.value = [eps](double x) { return x / (1.0 + eps * x); };
  f.d1 = [eps](double x) { return 1.0 / ((1.0 + eps * x) * (1.0 + eps * x)); };
  f.d2 = [eps](double x) {
    const double q = 1.0 + eps * x;
    return -2.0 * eps / (q * q * q);
  };
  f.value_at_infinity = 1.0 / eps;
  f.smoothness = 2;
  f.name = "saturating";
  return f;
}

/// (1 - K x)_+ with the kink replaced by a parabola of half-width s; convex, C^1.
inline TestFunction smoothed_hinge(double K, double s = -1.0) {
  if (!(K > 0.0)) throw std::invalid_argument("smoothed_hinge: K must be > 0");
  const double xk = 1.0 / K;
  if (s < 0.0) s = 0.1 * xk;
  if (!(s > 0.0) || !(s < xk)) throw std::invalid_argument("smoothed_hinge: need 0 < s < 1/K");
  TestFunction f;
  f.value = [K, xk, s](double x) {
    if (x <= xk - s) return 1.0 - K * x;
    if (x >= xk + s) return 0.0;
    const double d = x - xk - s;
    return K * d * d / (4.0 * s);
  };
  f.d1 = [K, xk, s](double x) {
    if (x <= xk - s) return -K;
    if (x >= xk + s) return 0.0;
    return K * (x - xk - s) / (2.0 * s);
  };
  f.d2 = [K, xk, s](double x) {
    if (x < xk - s || x > xk + s) return 0.0;
    return K / (2.0 * s);
  };
  f.support_upper = xk + s;
  f.value_at_infinity = 0.0;
  f.smoothness = 1;
  f.name = "smoothed_hinge";
  return f;
}

/// (1 - ((x - c)/r)^2)^3 on |x - c| < r; C^2. With c = 0 it is an even bump
/// with phi(0) = 1.
inline TestFunction bump(double center, double radius, double height = 1.0) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump: radius must be > 0");
  TestFunction f;
  f.value = [=](double x) {
    const double u = (x - center) / radius;
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return height * q * q * q;
  };
  f.d1 = [=](double x) {
    const double u = (x - center) / radius;
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return height * (-6.0 * u * q * q) / radius;
  };
  f.d2 = [=](double x) {
    const double u = (x - center) / radius;
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return height * (-6.0 * q * q + 24.0 * u * u * q) / (radius * radius);
  };
  f.support_upper = center + radius;
  f.value_at_infinity = 0.0;
  f.smoothness = 2;
  f.name = "bump";
  return f;
}

/// Bump in log space: (1 - r^2)^3 with r = ln(x / c) / w; vanishes near 0.
inline TestFunction log_bump(double center, double width) {
  if (!(center > 0.0) || !(width > 0.0)) throw std::invalid_argument("log_bump: bad parameters");
  const double lc = std::log(center);
  const double lo = center * std::exp(-width), hi = center * std::exp(width);
  TestFunction f;
  f.value = [=](double x) {
    if (x <= lo || x >= hi) return 0.0;
    const double r = (std::log(x) - lc) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    const double q = 1.0 - r * r;
    return q * q * q;
  };
  f.d1 = [=](double x) {
    if (x <= lo || x >= hi) return 0.0;
    const double r = (std::log(x) - lc) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    const double q = 1.0 - r * r;
    return -6.0 * r * q * q / (width * x);
  };
  f.d2 = [=](double x) {
    if (x <= lo || x >= hi) return 0.0;
    const double r = (std::log(x) - lc) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    const double q = 1.0 - r * r;
    const double g1 = -6.0 * r * q * q;                  // d/dr
    const double g2 = -6.0 * q * q + 24.0 * r * r * q;   // d2/dr2
    return (g2 / (width * width) - g1 / width) / (x * x);
  };
  f.support_upper = hi;
  f.value_at_infinity = 0.0;
  f.smoothness = 2;
  f.name = "log_bump";
  return f;
}

namespace detail {
// Uniform cubic B-spline on knots -2..2 (support [-2, 2]), with derivatives.
inline double bspline3(double u) {
  const double a = std::abs(u);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double t = 2.0 - a;
    return t * t * t / 6.0;
  }
  return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}
inline double bspline3_d1(double u) {
  const double a = std::abs(u);
  const double sg = u < 0.0 ? -1.0 : 1.0;
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double t = 2.0 - a;
    return -sg * t * t / 2.0;
  }
  return sg * (-2.0 * a + 1.5 * a * a);
}
inline double bspline3_d2(double u) {
  const double a = std::abs(u);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) return 2.0 - a;
  return -2.0 + 3.0 * a;
}
}  // namespace detail

/// Cubic B-spline in ln x centred at c with knot spacing w (support c e^{+-2w}).
inline TestFunction log_spline(double center, double spacing) {
  if (!(center > 0.0) || !(spacing > 0.0)) throw std::invalid_argument("log_spline: bad parameters");
  const double lc = std::log(center);
  TestFunction f;
  f.value = [=](double x) {
    if (x <= 0.0) return 0.0;
    return detail::bspline3((std::log(x) - lc) / spacing);
  };
  f.d1 = [=](double x) {
    if (x <= 0.0) return 0.0;
    return detail::bspline3_d1((std::log(x) - lc) / spacing) / (spacing * x);
  };
  f.d2 = [=](double x) {
    if (x <= 0.0) return 0.0;
    const double u = (std::log(x) - lc) / spacing;
    return (detail::bspline3_d2(u) / (spacing * spacing) - detail::bspline3_d1(u) / spacing) / (x * x);
  };
  f.support_upper = center * std::exp(2.0 * spacing);
  f.value_at_infinity = 0.0;
  f.smoothness = 2;
  f.name = "log_spline";
  return f;
}

/// Smoothstep in ln x from a to b: 0 below a, 1 above b, C^2 (quintic).
inline TestFunction log_step(double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("log_step: need 0 < a < b");
  const double la = std::log(a), L = std::log(b) - la;
  TestFunction f;
  f.value = [=](double x) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double u = (std::log(x) - la) / L;
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
  };
  f.d1 = [=](double x) {
    if (x <= a || x >= b) return 0.0;
    const double u = (std::log(x) - la) / L;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u) / (L * x);
  };
  f.d2 = [=](double x) {
    if (x <= a || x >= b) return 0.0;
    const double u = (std::log(x) - la) / L;
    const double g1 = 30.0 * u * u * (1.0 - u) * (1.0 - u);
    const double g2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
    return (g2 / (L * L) - g1 / L) / (x * x);
  };
  f.value_at_infinity = 1.0;
  f.smoothness = 2;
  f.name = "log_step";
  return f;
}

/// x^p for p >= 2 (so that phi is C^2 at the origin); mostly for tests.
inline TestFunction power(double p) {
  TestFunction f;
  f.value = [p](double x) { return std::pow(x, p); };
  f.d1 = [p](double x) { return p == 0.0 ? 0.0 : p * std::pow(x, p - 1.0); };
  f.d2 = [p](double x) { return (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(x, p - 2.0); };
  f.smoothness = 2;
  f.name = "power";
  return f;
}

/// phi(x / lambda).
inline TestFunction dilate(const TestFunction& phi, double lambda) {
  TestFunction f = phi;
  f.value = [g = phi.value, lambda](double x) { return g(x / lambda); };
  f.d1 = [g = phi.d1, lambda](double x) { return g(x / lambda) / lambda; };
  if (phi.has_d2()) {
    f.d2 = [g = phi.d2, lambda](double x) { return g(x / lambda) / (lambda * lambda); };
  }
  f.support_upper = phi.support_upper * lambda;
  f.name = phi.name + "/dilated";
  return f;
}

/// x * theta(x), the test function that pairs with an energy measure.
inline TestFunction times_x(const TestFunction& theta) {
  TestFunction f;
  f.value = [g = theta.value](double x) { return x * g(x); };
  f.d1 = [g = theta.value, g1 = theta.d1](double x) { return g(x) + x * g1(x); };
  if (theta.has_d2()) {
    f.d2 = [g1 = theta.d1, g2 = theta.d2](double x) { return 2.0 * g1(x) + x * g2(x); };
  }
  f.support_upper = theta.support_upper;
  f.smoothness = theta.smoothness;
  f.name = "x*" + theta.name;
  return f;
}

enum class BasisKind { constant, saturating, smoothed_hinge, bump, log_bump, log_spline, log_step, power };

inline BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "constant") return BasisKind::constant;
  if (s == "saturating") return BasisKind::saturating;
  if (s == "smoothed_hinge") return BasisKind::smoothed_hinge;
  if (s == "bump") return BasisKind::bump;
  if (s == "log_bump") return BasisKind::log_bump;
  if (s == "log_spline") return BasisKind::log_spline;
  if (s == "log_step") return BasisKind::log_step;
  if (s == "power") return BasisKind::power;
  throw std::invalid_argument("unknown basis kind '" + s + "'");
}

/// Parameters per kind:
///   constant:       {c}                    (default 1)
///   saturating:     {eps, ...}             one function per eps
///   smoothed_hinge: {K, ...}               one per K, default smoothing width
///   bump:           {center, radius}
///   log_bump:       {x_lo, x_hi, n, width} n bumps with centres log-spaced on [x_lo, x_hi]
///   log_spline:     {x_lo, x_hi, n}        n B-splines with knot spacing from the centres
///   log_step:       {a, b}
///   power:          {p, ...}
inline std::vector<TestFunction> basis(BasisKind kind, const std::vector<double>& params) {
  std::vector<TestFunction> out;
  auto need = [&](std::size_t n) {
    if (params.size() < n) throw std::invalid_argument("basis: too few parameters");
  };
  auto log_centres = [&](double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("basis: bad log range");
    std::vector<double> c;
    for (int k = 0; k < n; ++k) c.push_back(lo * std::pow(hi / lo, double(k) / (n - 1)));
    return c;
  };
  switch (kind) {
    case BasisKind::constant:
      out.push_back(constant_function(params.empty() ? 1.0 : params[0]));
      break;
    case BasisKind::saturating:
      need(1);
      for (double e : params) out.push_back(saturating(e));
      break;
    case BasisKind::smoothed_hinge:
      need(1);
      for (double K : params) out.push_back(smoothed_hinge(K));
      break;
    case BasisKind::bump:
      need(2);
      out.push_back(bump(params[0], params[1]));
      break;
    case BasisKind::log_bump: {
      need(4);
      for (double c : log_centres(params[0], params[1], static_cast<int>(params[2]))) {
        out.push_back(log_bump(c, params[3]));
      }
      break;
    }
    case BasisKind::log_spline: {
      need(3);
      const int n = static_cast<int>(params[2]);
      const double w = std::log(params[1] / params[0]) / (n - 1);
      for (double c : log_centres(params[0], params[1], n)) out.push_back(log_spline(c, w));
      break;
    }
    case BasisKind::log_step:
      need(2);
      out.push_back(log_step(params[0], params[1]));
      break;
    case BasisKind::power:
      need(1);
      for (double p : params) out.push_back(power(p));
      break;
  }
  return out;
}

inline std::vector<TestFunction> basis(const std::string& kind, const std::vector<double>& params) {
  return basis(basis_kind_from_string(kind), params);
}

}  // namespace wtk
