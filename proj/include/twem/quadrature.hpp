#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "twem/errors.hpp"

namespace twem {

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  /// Fraction of the interval trimmed at a singular endpoint. Zero selects
  /// the u^2 = x - a substitution instead of trimming.
  double endpoint_inset = 0.0;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw ConfigError("quadrature tolerances must be positive");
    if (max_subdivisions < 1)
      throw ConfigError("max_subdivisions must be at least 1");
    if (!(endpoint_inset >= 0.0) || !(endpoint_inset < 0.5))
      throw ConfigError("endpoint_inset must lie in [0, 0.5)");
  }
};

/// Narrow feature whose location is known to the caller.
struct Spike {
  double center;
  double width;
};

enum class EndpointKind {
  Auto,        ///< singular iff f is non-finite at the endpoint
  Regular,
  InverseSqrt, ///< integrable 1/sqrt divergence
};

struct IntegrationHints {
  std::vector<Spike> spikes;
  EndpointKind lower = EndpointKind::Auto;
  EndpointKind upper = EndpointKind::Auto;
};

struct QuadratureResult {
  double value = 0.0;
  double err_est = 0.0;
  int subdivisions = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule.
inline constexpr std::array<double, 11> kGk21Nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> kGk21Weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980016483, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGauss10Weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

/// How a working interval maps onto the original variable.
enum class Map { Identity, SqrtFromLower, SqrtFromUpper };

struct Panel {
  double lo;
  double hi;
  Map map;
  double anchor; // singular endpoint in x for the sqrt maps
  double value;
  double error;

  bool operator<(const Panel &other) const { return error < other.error; }
};

template <class F>
double evaluate_mapped(const F &f, Map map, double anchor, double u, double toward) {
  double x = u;
  double jac = 1.0;
  if (map == Map::SqrtFromLower) {
    x = anchor + u * u;
    if (x <= anchor) x = std::nextafter(anchor, toward);
    jac = 2.0 * u;
  } else if (map == Map::SqrtFromUpper) {
    x = anchor - u * u;
    if (x >= anchor) x = std::nextafter(anchor, toward);
    jac = 2.0 * u;
  }
  const double fx = f(x);
  if (!std::isfinite(fx))
    throw DomainError("integrand is not finite at interior point x = " + std::to_string(x));
  return jac * fx;
}

template <class F>
void gauss_kronrod21(const F &f, Panel &p, double toward) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double centr = 0.5 * (p.lo + p.hi);
  const double hlgth = 0.5 * (p.hi - p.lo);

  std::array<double, 10> fv1{};
  std::array<double, 10> fv2{};
  const double fc = evaluate_mapped(f, p.map, p.anchor, centr, toward);
  double resk = kGk21Weights[10] * fc;
  double resg = 0.0;
  double resabs = std::fabs(resk);
  for (int j = 0; j < 10; ++j) {
    const double absc = hlgth * kGk21Nodes[j];
    fv1[j] = evaluate_mapped(f, p.map, p.anchor, centr - absc, toward);
    fv2[j] = evaluate_mapped(f, p.map, p.anchor, centr + absc, toward);
    const double fsum = fv1[j] + fv2[j];
    resk += kGk21Weights[j] * fsum;
    resabs += kGk21Weights[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j % 2 == 1) resg += kGauss10Weights[j / 2] * fsum;
  }
  const double reskh = 0.5 * resk;
  double resasc = kGk21Weights[10] * std::fabs(fc - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kGk21Weights[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));

  const double dh = std::fabs(hlgth);
  resabs *= dh;
  resasc *= dh;
  double err = std::fabs((resk - resg) * hlgth);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);

  p.value = resk * hlgth;
  p.error = err;
}

inline bool too_narrow(const Panel &p) {
  const double mid = 0.5 * (p.lo + p.hi);
  return !(mid > p.lo && mid < p.hi) ||
         (p.hi - p.lo) <= 64.0 * std::numeric_limits<double>::epsilon() *
                              std::max(std::fabs(p.lo), std::fabs(p.hi));
}

} // namespace detail

/**
 * Adaptive Gauss-Kronrod (10/21) integration of f over [a, b].
 *
 * Endpoints with integrable 1/sqrt divergences are handled by the change of
 * variables x = a + u^2 (mirrored at b); the integrand is never evaluated at
 * a singular endpoint. Declared spikes pre-split the interval at
 * center + {0, +-1, +-3, +-10} * width so the first pass already resolves them.
 *
 * Throws AccuracyError (carrying the best estimate) when the subdivision
 * budget is exhausted, and DomainError on a non-finite interior value.
 */
template <class F>
QuadratureResult integrate(const F &f, double a, double b, const QuadratureConfig &cfg = {},
                           const IntegrationHints &hints = {}) {
  using detail::Map;
  using detail::Panel;
  cfg.validate();
  if (!std::isfinite(a) || !std::isfinite(b))
    throw DomainError("integration limits must be finite");
  if (!(a < b)) throw DomainError("integration requires a < b");

  auto singular = [&](EndpointKind kind, double x) {
    if (kind == EndpointKind::InverseSqrt) return true;
    if (kind == EndpointKind::Regular) return false;
    return !std::isfinite(f(x));
  };
  const bool sing_lo = singular(hints.lower, a);
  const bool sing_hi = singular(hints.upper, b);

  double lo = a;
  double hi = b;
  bool sub_lo = sing_lo;
  bool sub_hi = sing_hi;
  if (cfg.endpoint_inset > 0.0) {
    const double trim = cfg.endpoint_inset * (b - a);
    if (sing_lo) lo += trim;
    if (sing_hi) hi -= trim;
    sub_lo = sub_hi = false;
  }

  std::vector<double> cuts{lo, hi};
  for (const Spike &s : hints.spikes) {
    if (!std::isfinite(s.center) || !(s.width > 0.0)) continue;
    for (double k : {-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0}) {
      const double c = s.center + k * s.width;
      if (c > lo && c < hi) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (cuts.size() == 2 && sub_lo && sub_hi) cuts.insert(cuts.begin() + 1, 0.5 * (lo + hi));

  const double mid_all = 0.5 * (lo + hi);
  std::priority_queue<Panel> work;
  std::vector<Panel> done;
  double total = 0.0;
  double total_err = 0.0;

  auto push = [&](Panel p) {
    detail::gauss_kronrod21(f, p, mid_all);
    total += p.value;
    total_err += p.error;
    if (detail::too_narrow(p))
      done.push_back(p);
    else
      work.push(p);
  };

  const std::size_t last = cuts.size() - 2;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double x0 = cuts[i];
    const double x1 = cuts[i + 1];
    if (i == 0 && sub_lo)
      push(Panel{0.0, std::sqrt(x1 - x0), Map::SqrtFromLower, x0, 0.0, 0.0});
    else if (i == last && sub_hi)
      push(Panel{0.0, std::sqrt(x1 - x0), Map::SqrtFromUpper, x1, 0.0, 0.0});
    else
      push(Panel{x0, x1, Map::Identity, 0.0, 0.0, 0.0});
  }

  int splits = 0;
  auto converged = [&] { return total_err <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total)); };
  while (!converged()) {
    if (work.empty())
      throw AccuracyError("quadrature cannot subdivide further", total, total_err);
    if (splits >= cfg.max_subdivisions)
      throw AccuracyError("quadrature exceeded max_subdivisions", total, total_err);
    Panel p = work.top();
    work.pop();
    total -= p.value;
    total_err -= p.error;
    const double mid = 0.5 * (p.lo + p.hi);
    push(Panel{p.lo, mid, p.map, p.anchor, 0.0, 0.0});
    push(Panel{mid, p.hi, p.map, p.anchor, 0.0, 0.0});
    ++splits;
  }

  // Re-sum from the leaves so the running-update drift does not leak out.
  double value = 0.0;
  double err = 0.0;
  for (const Panel &p : done) {
    value += p.value;
    err += p.error;
  }
  while (!work.empty()) {
    value += work.top().value;
    err += work.top().error;
    work.pop();
  }
  return {value, err, splits};
}

} // namespace twem
