#pragma once
/// Finite nonnegative measures on [0, inf) made of a condensate at the origin
/// plus finitely many weighted atoms on (0, inf).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace wtk {

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

inline bool operator==(const Atom& a, const Atom& b) {
  return a.position == b.position && a.weight == b.weight;
}

/// Immutable after construction. Atoms are sorted by position, atoms sharing a
/// position are merged by adding weights, zero-weight atoms are kept (they
/// carry no mass but keep grid layouts stable).
class Measure {
 public:
  Measure() = default;

  explicit Measure(double condensate, std::vector<Atom> atoms = {})
      : condensate_(condensate), atoms_(std::move(atoms)) {
    if (!(condensate_ >= 0.0) || !std::isfinite(condensate_)) {
      throw std::invalid_argument("Measure: condensate must be finite and >= 0");
    }
    for (const Atom& a : atoms_) {
      if (!(a.position > 0.0) || !std::isfinite(a.position)) {
        throw std::invalid_argument("Measure: atom positions must be finite and > 0");
      }
      if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
        throw std::invalid_argument("Measure: atom weights must be finite and >= 0");
      }
    }
    std::stable_sort(atoms_.begin(), atoms_.end(),
                     [](const Atom& a, const Atom& b) { return a.position < b.position; });
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (const Atom& a : atoms_) {
      if (!merged.empty() && merged.back().position == a.position) {
        merged.back().weight += a.weight;
      } else {
        merged.push_back(a);
      }
    }
    atoms_ = std::move(merged);
  }

  double condensate() const { return condensate_; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return condensate_ == 0.0 && atoms_.empty(); }

  friend bool operator==(const Measure& a, const Measure& b) {
    return a.condensate_ == b.condensate_ && a.atoms_ == b.atoms_;
  }

 private:
  double condensate_ = 0.0;
  std::vector<Atom> atoms_;
};

struct ScalingParams {
  double kappa = 1.0;
  double lambda = 1.0;

  void validate() const {
    if (!(kappa > 0.0) || !(lambda > 0.0)) {
      throw std::invalid_argument("ScalingParams: kappa and lambda must be > 0");
    }
  }
};

inline double total_mass(const Measure& mu) {
  double s = mu.condensate();
  for (const Atom& a : mu.atoms()) s += a.weight;
  return s;
}

struct MomentResult {
  double value = 0.0;
  /// alpha <= -3/2: outside the range where profile moments are expected finite.
  bool below_domain = false;
  /// alpha < 0 with a nonzero condensate: the condensate term is undefined and
  /// was left out.
  bool condensate_excluded = false;
};

/// Sum of weight * position^alpha over atoms; the condensate contributes its
/// mass for alpha == 0 and nothing for alpha > 0.
inline MomentResult moment(const Measure& mu, double alpha) {
  MomentResult r;
  r.below_domain = alpha <= -1.5;
  double s = 0.0;
  if (alpha == 0.0) {
    s = mu.condensate();
  } else if (alpha < 0.0 && mu.condensate() > 0.0) {
    r.condensate_excluded = true;
  }
  for (const Atom& a : mu.atoms()) s += a.weight * std::pow(a.position, alpha);
  r.value = s;
  return r;
}

/// Condensate plus atoms at positions <= delta.
inline double near_mass(const Measure& mu, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("near_mass: delta must be > 0");
  double s = mu.condensate();
  for (const Atom& a : mu.atoms()) {
    if (a.position > delta) break;
    s += a.weight;
  }
  return s;
}

/// Atoms at positions >= R.
inline double tail_mass(const Measure& mu, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("tail_mass: R must be > 0");
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (a.position >= R) s += a.weight;
  }
  return s;
}

/// Mass on (0, r], i.e. near_mass without the condensate.
inline double active_mass_below(const Measure& mu, double r) {
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (a.position > r) break;
    s += a.weight;
  }
  return s;
}

/// Snapshot form of G -> kappa * G(kappa lambda t, lambda x) lambda dx:
/// kappa times the pushforward under y -> y / lambda.
inline Measure rescale(const Measure& mu, ScalingParams p) {
  p.validate();
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const Atom& a : mu.atoms()) atoms.push_back({a.position / p.lambda, p.kappa * a.weight});
  return Measure(p.kappa * mu.condensate(), std::move(atoms));
}

namespace detail {

/// Concave piecewise-linear function on [-1, 1] given by its vertices.
struct ConcavePL {
  std::vector<double> f;
  std::vector<double> v;

  double eval(double x) const {
    if (x <= f.front()) return v.front();
    if (x >= f.back()) return v.back();
    auto it = std::upper_bound(f.begin(), f.end(), x);
    std::size_t k = static_cast<std::size_t>(it - f.begin());
    double t = (x - f[k - 1]) / (f[k] - f[k - 1]);
    return v[k - 1] + t * (v[k] - v[k - 1]);
  }

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  }

  /// W(x) = max of V over [x - d, x + d] intersected with [-1, 1].
  ConcavePL window_max(double d) const {
    const std::size_t m = argmax();
    const double fm = f[m];
    std::vector<double> pts{-1.0, 1.0};
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f[k] <= fm) pts.push_back(f[k] - d);
      if (f[k] >= fm) pts.push_back(f[k] + d);
    }
    std::vector<double> keep;
    for (double p : pts) {
      if (p >= -1.0 && p <= 1.0) keep.push_back(p);
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-15; }),
               keep.end());
    ConcavePL w;
    w.f = keep;
    w.v.reserve(keep.size());
    for (double x : keep) {
      double val;
      if (x + d <= fm) {
        val = eval(x + d);
      } else if (x - d >= fm) {
        val = eval(x - d);
      } else {
        val = v[m];
      }
      w.v.push_back(val);
    }
    return w;
  }
};

}  // namespace detail

/// Bounded-Lipschitz distance: sup of the integral of f d(mu - nu) over f with
/// |f| <= 1 and Lip(f) <= 1. Solved exactly on the merged support by dynamic
/// programming over concave piecewise-linear value functions.
inline double bl_distance(const Measure& mu, const Measure& nu) {
  std::vector<Atom> charges;  // weight carries the signed charge here
  charges.push_back({0.0, mu.condensate() - nu.condensate()});
  for (const Atom& a : mu.atoms()) charges.push_back({a.position, a.weight});
  for (const Atom& a : nu.atoms()) charges.push_back({a.position, -a.weight});
  std::stable_sort(charges.begin(), charges.end(),
                   [](const Atom& a, const Atom& b) { return a.position < b.position; });
  std::vector<Atom> pts;
  for (const Atom& c : charges) {
    if (!pts.empty() && pts.back().position == c.position) {
      pts.back().weight += c.weight;
    } else {
      pts.push_back(c);
    }
  }
  // Drop points with no charge; gaps merge, which keeps the Lipschitz chain exact.
  std::vector<Atom> nz;
  for (const Atom& p : pts) {
    if (p.weight != 0.0) nz.push_back(p);
  }
  if (nz.empty()) return 0.0;

  detail::ConcavePL V;
  V.f = {-1.0, 1.0};
  V.v = {-nz.back().weight, nz.back().weight};
  for (std::size_t i = nz.size() - 1; i-- > 0;) {
    const double gap = nz[i + 1].position - nz[i].position;
    V = V.window_max(gap);
    for (std::size_t k = 0; k < V.f.size(); ++k) V.v[k] += nz[i].weight * V.f[k];
  }
  return std::max(0.0, V.v[V.argmax()]);
}

// ---------------------------------------------------------------------------
// Text record: `condensate=<decimal>` then one `x,w` line per atom.

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline void write_measure(std::ostream& os, const Measure& mu) {
  os << "condensate=" << format_double(mu.condensate()) << '\n';
  for (const Atom& a : mu.atoms()) {
    os << format_double(a.position) << ',' << format_double(a.weight) << '\n';
  }
}

inline std::string to_text(const Measure& mu) {
  std::ostringstream os;
  write_measure(os, mu);
  return os.str();
}

inline Measure read_measure(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  double condensate = -1.0;
  std::vector<Atom> atoms;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      if (condensate < 0.0) {
        const std::string key = "condensate=";
        if (line.rfind(key, 0) != 0) throw std::invalid_argument("expected 'condensate=<value>'");
        condensate = parse_double(std::string_view(line).substr(key.size()));
        continue;
      }
      auto comma = line.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("expected 'x,w'");
      std::string_view sv(line);
      atoms.push_back({parse_double(sv.substr(0, comma)), parse_double(sv.substr(comma + 1))});
      if (atoms.size() > 1 && !(atoms[atoms.size() - 2].position < atoms.back().position)) {
        throw std::invalid_argument("positions must be strictly increasing");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("measure record line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (condensate < 0.0) throw std::invalid_argument("measure record: missing condensate line");
  return Measure(condensate, std::move(atoms));
}

inline Measure from_text(const std::string& text) {
  std::istringstream is(text);
  return read_measure(is);
}

}  // namespace wtk
