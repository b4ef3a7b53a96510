#pragma once
//
// Nonlinearities F(x, s) = int_0^s f(x, t) dt for semilinear energy functionals,
// their discrete-dilation and spatial asymptotic limits, and the sample-based
// structure checks (growth bounds, Ambrosetti-Rabinowitz, selfsimilarity).
//
// Positions are scalars: |x| on radial grids, the coordinate on line grids.
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ccmp/error.hpp"
#include "ccmp/interpolation.hpp"

namespace ccmp {

/// 2N/(N-2); defined for N >= 3 only.
inline double critical_exponent(int N) {
  if (N < 3) throw InvalidArgument("critical exponent 2* requires N >= 3");
  return 2.0 * N / (N - 2.0);
}

enum class NonlinearityKind { power, critical_stem, oscillating_stem, spatial_modulation, sum, table_selfsimilar, custom };

inline const char* to_string(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::power: return "power";
    case NonlinearityKind::critical_stem: return "critical_stem";
    case NonlinearityKind::oscillating_stem: return "oscillating_stem";
    case NonlinearityKind::spatial_modulation: return "spatial_modulation";
    case NonlinearityKind::sum: return "sum";
    case NonlinearityKind::table_selfsimilar: return "table_selfsimilar";
    case NonlinearityKind::custom: return "custom";
  }
  return "?";
}

/// Radial envelope 1 + amplitude * exp(-(|x|/width)^2).
struct Envelope {
  double amplitude = 0.0;
  double width = 1.0;

  double operator()(double x) const { return 1.0 + amplitude * std::exp(-(x / width) * (x / width)); }
  double at_origin() const { return 1.0 + amplitude; }
};

/// Samples of a selfsimilar F over one dilation period, on [1, P] and [-P, -1]
/// with P = gamma^{(N-2)/2}. Abscissae are stored by increasing magnitude.
struct SelfsimilarTable {
  int N = 3;
  double gamma = 2.0;
  std::vector<double> pos_s, pos_F;
  std::vector<double> neg_s, neg_F;

  double period() const { return std::pow(gamma, (N - 2) / 2.0); }

  /// Tabulates `F` on n log-uniform points per sign.
  static SelfsimilarTable sample(int N, double gamma, const std::function<double(double)>& F, std::size_t n) {
    if (N < 3) throw InvalidArgument("selfsimilar table requires N >= 3");
    if (!(gamma > 1.0)) throw InvalidArgument("selfsimilar table requires gamma > 1");
    if (n < 4) throw InvalidArgument("selfsimilar table requires at least 4 samples");
    SelfsimilarTable t;
    t.N = N;
    t.gamma = gamma;
    const double lp = std::log(t.period());
    for (std::size_t i = 0; i < n; ++i) {
      double s = std::exp(lp * static_cast<double>(i) / static_cast<double>(n - 1));
      if (i == n - 1) s = t.period();
      t.pos_s.push_back(s);
      t.pos_F.push_back(F(s));
      t.neg_s.push_back(s);
      t.neg_F.push_back(F(-s));
    }
    return t;
  }
};

class NonlinearitySpec;

struct WeightedTerm;

using ScalarField = std::function<double(double x, double s)>;

namespace detail {
struct PowerNode { double p, coeff; };
struct StemNode {};
struct OscillatingNode { double eps; };
struct ModulationNode;
struct SumNode;
struct TableNode {
  SelfsimilarTable table;
  MonotoneCubic pos, neg;
};
struct CustomNode {
  std::string name;
  ScalarField F, f;
  bool autonomous;
};
}  // namespace detail

/// Immutable description of F(x, s) and f(x, s). Cheap to copy (shared, immutable state).
class NonlinearitySpec {
 public:
  /// F = coeff |s|^p (coeff defaults to 1/p). Requires p > 2.
  static NonlinearitySpec power(int N, double p, std::optional<double> coeff = std::nullopt, double gamma = 2.0);
  /// F = |s|^{2*}, f = 2* |s|^{2*-2} s.
  static NonlinearitySpec critical_stem(int N, double gamma = 2.0);
  /// F = |s|^{2*} (1 + eps sin(2 pi ln|s| / ln P)), P = gamma^{(N-2)/2}; selfsimilar with factor gamma.
  static NonlinearitySpec oscillating_stem(int N, double eps, double gamma);
  /// F(x, s) = envelope(|x|) * base(x, s).
  static NonlinearitySpec spatial_modulation(const NonlinearitySpec& base, Envelope envelope);
  /// F = sum_i weight_i F_i. All terms must share N.
  static NonlinearitySpec sum(std::vector<WeightedTerm> terms);
  static NonlinearitySpec zero(int N, double gamma = 2.0);
  static NonlinearitySpec table_selfsimilar(SelfsimilarTable table);
  /// Black-box F and f; `autonomous` states that neither depends on x.
  static NonlinearitySpec custom(int N, std::string name, ScalarField F, ScalarField f, bool autonomous = true,
                                 double gamma = 2.0);

  double F(double x, double s) const;
  double f(double x, double s) const;

  NonlinearityKind kind() const;
  int dim() const { return N_; }
  double gamma() const { return gamma_; }
  bool autonomous() const;
  bool is_zero() const;
  /// Degree p when F(x, t s) = t^p F(x, s) holds by construction.
  std::optional<double> homogeneity() const;
  /// True for kinds that satisfy the discrete selfsimilarity relation exactly (stems, tables).
  bool selfsimilar_by_construction() const;
  std::string describe() const;
  NonlinearitySpec with_gamma(double gamma) const;

  const detail::PowerNode* as_power() const;
  const detail::ModulationNode* as_modulation() const;
  const detail::SumNode* as_sum() const;
  const detail::OscillatingNode* as_oscillating() const;

 private:
  using Node = std::variant<detail::PowerNode, detail::StemNode, detail::OscillatingNode,
                            std::shared_ptr<const detail::ModulationNode>, std::shared_ptr<const detail::SumNode>,
                            std::shared_ptr<const detail::TableNode>, std::shared_ptr<const detail::CustomNode>>;

  NonlinearitySpec(int N, double gamma, Node node) : N_(N), gamma_(gamma), node_(std::move(node)) {}

  int N_;
  double gamma_;
  Node node_;
};

struct WeightedTerm {
  double weight;
  NonlinearitySpec spec;
};

namespace detail {
struct ModulationNode {
  NonlinearitySpec base;
  Envelope envelope;
};
struct SumNode {
  std::vector<WeightedTerm> terms;
};

inline double signum(double s) { return (s > 0.0) - (s < 0.0); }

// Maps s into the base period [1, P] (by magnitude) and returns (j, s_base) with
// s_base = P^j |s|.
inline std::pair<int, double> reduce_to_period(double P, double s) {
  const double a = std::abs(s);
  int j = -static_cast<int>(std::floor(std::log(a) / std::log(P)));
  double sb = a * std::pow(P, j);
  // guard the seam against rounding
  if (sb < 1.0) { ++j; sb = a * std::pow(P, j); }
  if (sb > P) { --j; sb = a * std::pow(P, j); }
  return {j, std::clamp(sb, 1.0, P)};
}
}  // namespace detail

inline NonlinearitySpec NonlinearitySpec::power(int N, double p, std::optional<double> coeff, double gamma) {
  if (N < 1) throw InvalidArgument("power: dimension must be >= 1");
  if (!(p > 2.0)) throw InvalidArgument("power: exponent must satisfy p > 2");
  if (!(gamma > 1.0)) throw InvalidArgument("power: gamma must exceed 1");
  const double c = coeff.value_or(1.0 / p);
  if (!std::isfinite(c)) throw InvalidArgument("power: coefficient must be finite");
  return NonlinearitySpec(N, gamma, detail::PowerNode{p, c});
}

inline NonlinearitySpec NonlinearitySpec::critical_stem(int N, double gamma) {
  critical_exponent(N);
  if (!(gamma > 1.0)) throw InvalidArgument("critical_stem: gamma must exceed 1");
  return NonlinearitySpec(N, gamma, detail::StemNode{});
}

inline NonlinearitySpec NonlinearitySpec::oscillating_stem(int N, double eps, double gamma) {
  critical_exponent(N);
  if (!(gamma > 1.0)) throw InvalidArgument("oscillating_stem: gamma must exceed 1");
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("oscillating_stem: eps must lie in [0, 1)");
  return NonlinearitySpec(N, gamma, detail::OscillatingNode{eps});
}

inline NonlinearitySpec NonlinearitySpec::spatial_modulation(const NonlinearitySpec& base, Envelope envelope) {
  if (!(envelope.width > 0.0)) throw InvalidArgument("spatial_modulation: envelope width must be positive");
  if (!(envelope.amplitude > -1.0)) throw InvalidArgument("spatial_modulation: envelope must stay positive");
  return NonlinearitySpec(base.dim(), base.gamma(),
                          std::make_shared<const detail::ModulationNode>(detail::ModulationNode{base, envelope}));
}

inline NonlinearitySpec NonlinearitySpec::sum(std::vector<WeightedTerm> terms) {
  if (terms.empty()) throw InvalidArgument("sum: at least one term required (use zero())");
  const int N = terms.front().spec.dim();
  for (const auto& t : terms) {
    if (t.spec.dim() != N) throw InvalidArgument("sum: all terms must share the dimension N");
    if (!std::isfinite(t.weight)) throw InvalidArgument("sum: weights must be finite");
  }
  const double g = terms.front().spec.gamma();
  return NonlinearitySpec(N, g, std::make_shared<const detail::SumNode>(detail::SumNode{std::move(terms)}));
}

inline NonlinearitySpec NonlinearitySpec::zero(int N, double gamma) {
  return NonlinearitySpec(N, gamma, std::make_shared<const detail::SumNode>(detail::SumNode{}));
}

inline NonlinearitySpec NonlinearitySpec::table_selfsimilar(SelfsimilarTable table) {
  critical_exponent(table.N);
  if (table.pos_s.size() < 4 || table.neg_s.size() < 4) throw InvalidArgument("table_selfsimilar: too few samples");
  const double P = table.period();
  auto check = [P](const std::vector<double>& s) {
    if (std::abs(s.front() - 1.0) > 1e-12 || std::abs(s.back() - P) > 1e-9 * P)
      throw InvalidArgument("table_selfsimilar: samples must span one period [1, gamma^{(N-2)/2}]");
  };
  check(table.pos_s);
  check(table.neg_s);
  MonotoneCubic pos(table.pos_s, table.pos_F), neg(table.neg_s, table.neg_F);
  const int N = table.N;
  const double g = table.gamma;
  return NonlinearitySpec(N, g, std::make_shared<const detail::TableNode>(
                                    detail::TableNode{std::move(table), std::move(pos), std::move(neg)}));
}

inline NonlinearitySpec NonlinearitySpec::custom(int N, std::string name, ScalarField F, ScalarField f,
                                                 bool autonomous, double gamma) {
  if (!F || !f) throw InvalidArgument("custom: F and f must be callable");
  if (!(gamma > 1.0)) throw InvalidArgument("custom: gamma must exceed 1");
  return NonlinearitySpec(
      N, gamma,
      std::make_shared<const detail::CustomNode>(detail::CustomNode{std::move(name), std::move(F), std::move(f), autonomous}));
}

inline NonlinearityKind NonlinearitySpec::kind() const {
  switch (node_.index()) {
    case 0: return NonlinearityKind::power;
    case 1: return NonlinearityKind::critical_stem;
    case 2: return NonlinearityKind::oscillating_stem;
    case 3: return NonlinearityKind::spatial_modulation;
    case 4: return NonlinearityKind::sum;
    case 5: return NonlinearityKind::table_selfsimilar;
    default: return NonlinearityKind::custom;
  }
}

inline double NonlinearitySpec::F(double x, double s) const {
  if (s == 0.0) return 0.0;
  struct Visitor {
    const NonlinearitySpec& self;
    double x, s;
    double operator()(const detail::PowerNode& n) const { return n.coeff * std::pow(std::abs(s), n.p); }
    double operator()(const detail::StemNode&) const { return std::pow(std::abs(s), critical_exponent(self.N_)); }
    double operator()(const detail::OscillatingNode& n) const {
      const double a = std::abs(s);
      const double L = 0.5 * (self.N_ - 2) * std::log(self.gamma_);
      return std::pow(a, critical_exponent(self.N_)) * (1.0 + n.eps * std::sin(2.0 * std::numbers::pi * std::log(a) / L));
    }
    double operator()(const std::shared_ptr<const detail::ModulationNode>& n) const {
      return n->envelope(x) * n->base.F(x, s);
    }
    double operator()(const std::shared_ptr<const detail::SumNode>& n) const {
      double acc = 0.0;
      for (const auto& t : n->terms) acc += t.weight * t.spec.F(x, s);
      return acc;
    }
    double operator()(const std::shared_ptr<const detail::TableNode>& n) const {
      const auto [j, sb] = detail::reduce_to_period(n->table.period(), s);
      const double base = s > 0 ? n->pos(sb) : n->neg(sb);
      return std::pow(self.gamma_, -static_cast<double>(self.N_) * j) * base;
    }
    double operator()(const std::shared_ptr<const detail::CustomNode>& n) const { return n->F(x, s); }
  };
  return std::visit(Visitor{*this, x, s}, node_);
}

inline double NonlinearitySpec::f(double x, double s) const {
  if (s == 0.0) return 0.0;
  struct Visitor {
    const NonlinearitySpec& self;
    double x, s;
    double operator()(const detail::PowerNode& n) const {
      return n.coeff * n.p * std::pow(std::abs(s), n.p - 1.0) * detail::signum(s);
    }
    double operator()(const detail::StemNode&) const {
      const double q = critical_exponent(self.N_);
      return q * std::pow(std::abs(s), q - 1.0) * detail::signum(s);
    }
    double operator()(const detail::OscillatingNode& n) const {
      const double a = std::abs(s);
      const double q = critical_exponent(self.N_);
      const double L = 0.5 * (self.N_ - 2) * std::log(self.gamma_);
      const double th = 2.0 * std::numbers::pi * std::log(a) / L;
      return detail::signum(s) * std::pow(a, q - 1.0) *
             (q * (1.0 + n.eps * std::sin(th)) + n.eps * (2.0 * std::numbers::pi / L) * std::cos(th));
    }
    double operator()(const std::shared_ptr<const detail::ModulationNode>& n) const {
      return n->envelope(x) * n->base.f(x, s);
    }
    double operator()(const std::shared_ptr<const detail::SumNode>& n) const {
      double acc = 0.0;
      for (const auto& t : n->terms) acc += t.weight * t.spec.f(x, s);
      return acc;
    }
    double operator()(const std::shared_ptr<const detail::TableNode>& n) const {
      const double P = n->table.period();
      const auto [j, sb] = detail::reduce_to_period(P, s);
      // d/ds [gamma^{-Nj} F_b(P^j s)]; on the negative branch F_b is tabulated against |s|
      const double scale = std::pow(self.gamma_, -static_cast<double>(self.N_) * j) * std::pow(P, j);
      return s > 0 ? scale * n->pos.prime(sb) : -scale * n->neg.prime(sb);
    }
    double operator()(const std::shared_ptr<const detail::CustomNode>& n) const { return n->f(x, s); }
  };
  return std::visit(Visitor{*this, x, s}, node_);
}

inline bool NonlinearitySpec::autonomous() const {
  if (auto m = std::get_if<std::shared_ptr<const detail::ModulationNode>>(&node_))
    return (*m)->envelope.amplitude == 0.0 && (*m)->base.autonomous();
  if (auto s = std::get_if<std::shared_ptr<const detail::SumNode>>(&node_)) {
    return std::all_of((*s)->terms.begin(), (*s)->terms.end(), [](const auto& t) { return t.spec.autonomous(); });
  }
  if (auto c = std::get_if<std::shared_ptr<const detail::CustomNode>>(&node_)) return (*c)->autonomous;
  return true;
}

inline bool NonlinearitySpec::is_zero() const {
  if (auto p = std::get_if<detail::PowerNode>(&node_)) return p->coeff == 0.0;
  if (auto s = std::get_if<std::shared_ptr<const detail::SumNode>>(&node_)) {
    return std::all_of((*s)->terms.begin(), (*s)->terms.end(),
                       [](const auto& t) { return t.weight == 0.0 || t.spec.is_zero(); });
  }
  if (auto m = std::get_if<std::shared_ptr<const detail::ModulationNode>>(&node_)) return (*m)->base.is_zero();
  return false;
}

inline std::optional<double> NonlinearitySpec::homogeneity() const {
  if (auto p = std::get_if<detail::PowerNode>(&node_)) return p->p;
  if (std::holds_alternative<detail::StemNode>(node_)) return critical_exponent(N_);
  if (auto m = std::get_if<std::shared_ptr<const detail::ModulationNode>>(&node_)) return (*m)->base.homogeneity();
  if (auto s = std::get_if<std::shared_ptr<const detail::SumNode>>(&node_)) {
    std::optional<double> deg;
    for (const auto& t : (*s)->terms) {
      if (t.weight == 0.0 || t.spec.is_zero()) continue;
      auto d = t.spec.homogeneity();
      if (!d || (deg && std::abs(*deg - *d) > 1e-14)) return std::nullopt;
      deg = d;
    }
    return deg;
  }
  return std::nullopt;
}

inline bool NonlinearitySpec::selfsimilar_by_construction() const {
  switch (kind()) {
    case NonlinearityKind::critical_stem:
    case NonlinearityKind::oscillating_stem:
    case NonlinearityKind::table_selfsimilar: return true;
    case NonlinearityKind::power: {
      const auto* p = as_power();
      return N_ >= 3 && std::abs(p->p - critical_exponent(N_)) < 1e-14;
    }
    case NonlinearityKind::sum: {
      const auto* s = as_sum();
      return !s->terms.empty() && std::all_of(s->terms.begin(), s->terms.end(), [this](const auto& t) {
        return t.spec.selfsimilar_by_construction() && std::abs(t.spec.gamma() - gamma_) < 1e-14;
      });
    }
    default: return false;
  }
}

inline std::string NonlinearitySpec::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind()) {
    case NonlinearityKind::power: {
      const auto* p = as_power();
      os << "power(p=" << p->p << ",c=" << p->coeff << ")";
      break;
    }
    case NonlinearityKind::critical_stem: os << "critical_stem(N=" << N_ << ")"; break;
    case NonlinearityKind::oscillating_stem:
      os << "oscillating_stem(eps=" << as_oscillating()->eps << ",gamma=" << gamma_ << ")";
      break;
    case NonlinearityKind::spatial_modulation: {
      const auto* m = as_modulation();
      os << "spatial_modulation(" << m->base.describe() << ",a=" << m->envelope.amplitude
         << ",w=" << m->envelope.width << ")";
      break;
    }
    case NonlinearityKind::sum: {
      const auto* s = as_sum();
      if (s->terms.empty()) { os << "zero"; break; }
      os << "sum(";
      for (std::size_t i = 0; i < s->terms.size(); ++i)
        os << (i ? "," : "") << s->terms[i].weight << "*" << s->terms[i].spec.describe();
      os << ")";
      break;
    }
    case NonlinearityKind::table_selfsimilar: os << "table_selfsimilar(gamma=" << gamma_ << ")"; break;
    case NonlinearityKind::custom:
      os << "custom(" << std::get<std::shared_ptr<const detail::CustomNode>>(node_)->name << ")";
      break;
  }
  return os.str();
}

inline NonlinearitySpec NonlinearitySpec::with_gamma(double gamma) const {
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must exceed 1");
  NonlinearitySpec copy = *this;
  copy.gamma_ = gamma;
  return copy;
}

inline const detail::PowerNode* NonlinearitySpec::as_power() const { return std::get_if<detail::PowerNode>(&node_); }
inline const detail::OscillatingNode* NonlinearitySpec::as_oscillating() const {
  return std::get_if<detail::OscillatingNode>(&node_);
}
inline const detail::ModulationNode* NonlinearitySpec::as_modulation() const {
  auto p = std::get_if<std::shared_ptr<const detail::ModulationNode>>(&node_);
  return p ? p->get() : nullptr;
}
inline const detail::SumNode* NonlinearitySpec::as_sum() const {
  auto p = std::get_if<std::shared_ptr<const detail::SumNode>>(&node_);
  return p ? p->get() : nullptr;
}

// ---------------------------------------------------------------------------
// Pointwise evaluation and rescaling
// ---------------------------------------------------------------------------

inline double eval_F(const NonlinearitySpec& spec, double x, double s) { return spec.F(x, s); }
inline double eval_f(const NonlinearitySpec& spec, double x, double s) { return spec.f(x, s); }

/// gamma^{-Nj} F(gamma^{-j} x, gamma^{(N-2)j/2} s): the nonlinearity seen by the profile
/// gamma^{(N-2)j/2} w(gamma^j .) after the change of variables.
inline double dilation_rescaled_F(const NonlinearitySpec& spec, int j, double x, double s) {
  const int N = spec.dim();
  if (N < 3) throw InvalidArgument("dilation rescaling requires N >= 3");
  const double g = spec.gamma();
  const double amp = std::pow(g, 0.5 * (N - 2) * j) * s;
  const double pos = std::pow(g, -static_cast<double>(j)) * x;
  constexpr double kLimit = 1e150;
  if (!std::isfinite(amp) || std::abs(amp) > kLimit || !std::isfinite(pos))
    throw OutOfRange("dilation_rescaled_F: scale gamma^j out of representable range");
  const double v = std::pow(g, -static_cast<double>(N) * j) * spec.F(pos, amp);
  if (!std::isfinite(v)) throw OutOfRange("dilation_rescaled_F: rescaled value overflows");
  return v;
}

/// Matching rescaling of f: gamma^{-(N+2)j/2} f(gamma^{-j} x, gamma^{(N-2)j/2} s).
inline double dilation_rescaled_f(const NonlinearitySpec& spec, int j, double x, double s) {
  const int N = spec.dim();
  if (N < 3) throw InvalidArgument("dilation rescaling requires N >= 3");
  const double g = spec.gamma();
  const double amp = std::pow(g, 0.5 * (N - 2) * j) * s;
  const double pos = std::pow(g, -static_cast<double>(j)) * x;
  if (!std::isfinite(amp) || std::abs(amp) > 1e150) throw OutOfRange("dilation_rescaled_f: scale out of range");
  return std::pow(g, -0.5 * (N + 2) * j) * spec.f(pos, amp);
}

// ---------------------------------------------------------------------------
// Asymptotic limits
// ---------------------------------------------------------------------------

/// plus: concentration (j -> +inf), minus: spreading (j -> -inf), spatial: |x| -> inf.
enum class Direction { plus, minus, spatial };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::plus: return "plus";
    case Direction::minus: return "minus";
    case Direction::spatial: return "spatial";
  }
  return "?";
}

struct AsymptoticValue {
  double value = 0.0;
  bool certified = false;
  int steps = 0;
};

/// Iterates the rescaled value until three successive values agree within tol
/// (relative to max(1, |value|)). Throws DivergenceError when the iterates grow
/// geometrically without bound; returns certified = false when j_max is reached otherwise.
inline AsymptoticValue asymptotic_limit(const NonlinearitySpec& spec, Direction dir, double s, double tol = 1e-9,
                                        int j_max = 60, double x = 1.0) {
  if (!std::isfinite(s)) throw InvalidArgument("asymptotic_limit: s must be finite");
  if (!(tol > 0.0)) throw InvalidArgument("asymptotic_limit: tol must be positive");
  auto value_at = [&](int k) {
    switch (dir) {
      case Direction::plus: return dilation_rescaled_F(spec, k, x, s);
      case Direction::minus: return dilation_rescaled_F(spec, -k, x, s);
      case Direction::spatial: return spec.F(x * std::ldexp(1.0, k) + (x == 0.0 ? std::ldexp(1.0, k) : 0.0), s);
    }
    return 0.0;
  };
  std::vector<double> v;
  int stable = 0;
  for (int k = 0; k <= j_max; ++k) {
    double cur;
    try {
      cur = value_at(k);
    } catch (const OutOfRange&) {
      throw DivergenceError("asymptotic_limit: rescaled values left the representable range");
    }
    v.push_back(cur);
    if (v.size() >= 2) {
      const double d = std::abs(v[v.size() - 1] - v[v.size() - 2]);
      stable = d < tol * std::max(1.0, std::abs(cur)) ? stable + 1 : 0;
      if (stable >= 2) {
        const double val = std::abs(cur) < tol ? 0.0 : cur;
        return {val, true, k};
      }
    }
  }
  // distinguish geometric blow-up from mere non-stabilization
  const std::size_t n = v.size();
  if (n >= 6) {
    bool growing = true;
    for (std::size_t i = n - 5; i < n; ++i)
      growing = growing && std::abs(v[i]) > 1.001 * std::abs(v[i - 1]);
    if (growing && std::abs(v.back()) > 1e8 * std::max(1.0, std::abs(v.front())))
      throw DivergenceError("asymptotic_limit: rescaled values grow without bound (" + std::string(to_string(dir)) + ")");
  }
  return {v.back(), false, j_max};
}

namespace detail {
// Closed-form limit of the built-in kinds. nullopt: diverges. Custom kinds return nullopt
// through `structural` and are handled numerically by the caller.
struct StructuralLimit {
  std::optional<NonlinearitySpec> spec;
  bool known = true;
};

inline StructuralLimit structural_limit(const NonlinearitySpec& spec, Direction dir) {
  const int N = spec.dim();
  switch (spec.kind()) {
    case NonlinearityKind::power: {
      if (dir == Direction::spatial) return {spec};
      const auto* p = spec.as_power();
      const double e = 0.5 * (N - 2) * p->p - N;  // rescaled value ~ gamma^{e j}
      const double sign = dir == Direction::plus ? 1.0 : -1.0;
      if (std::abs(e) < 1e-14 || p->coeff == 0.0) return {spec};
      if (sign * e < 0) return {NonlinearitySpec::zero(N, spec.gamma())};
      return {std::nullopt};
    }
    case NonlinearityKind::critical_stem:
    case NonlinearityKind::oscillating_stem:
    case NonlinearityKind::table_selfsimilar: return {spec};
    case NonlinearityKind::spatial_modulation: {
      const auto* m = spec.as_modulation();
      auto base = structural_limit(m->base, dir);
      if (!base.known || !base.spec) return base;
      if (dir == Direction::plus && m->envelope.amplitude != 0.0)
        return {NonlinearitySpec::sum({{m->envelope.at_origin(), *base.spec}})};
      return base;
    }
    case NonlinearityKind::sum: {
      const auto* s = spec.as_sum();
      std::vector<WeightedTerm> out;
      for (const auto& t : s->terms) {
        auto lim = structural_limit(t.spec, dir);
        if (!lim.known) return lim;
        if (!lim.spec) {
          if (t.weight == 0.0) continue;
          return {std::nullopt};
        }
        if (!lim.spec->is_zero() && t.weight != 0.0) out.push_back({t.weight, *lim.spec});
      }
      if (out.empty()) return {NonlinearitySpec::zero(N, spec.gamma())};
      return {NonlinearitySpec::sum(std::move(out))};
    }
    case NonlinearityKind::custom:
      if (dir == Direction::spatial && spec.autonomous()) return {spec};
      return {std::nullopt, false};
  }
  return {std::nullopt, false};
}
}  // namespace detail

/// Sample box used by the sample-based checks: |s| log-spaced on [s_min, s_max]
/// (both signs) at every listed position.
struct SampleBox {
  double s_min = 1e-3;
  double s_max = 1e3;
  std::size_t n_s = 121;
  std::vector<double> positions{0.0};

  std::vector<double> magnitudes() const {
    std::vector<double> out(n_s);
    const double a = std::log(s_min), b = std::log(s_max);
    for (std::size_t i = 0; i < n_s; ++i)
      out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n_s - 1));
    return out;
  }
};

struct AsymptoticLimit {
  std::optional<NonlinearitySpec> F;  // present when available
  bool available = false;
  bool certified = false;
  double tolerance = 1e-9;
  std::string note;
};

/// F0 (|x| -> inf, critical naming), Fplus, Fminus (dilations), Finf (|x| -> inf, subcritical naming).
struct AsymptoticFamily {
  AsymptoticLimit F0, Fplus, Fminus, Finf;

  const AsymptoticLimit& get(Direction d) const {
    switch (d) {
      case Direction::plus: return Fplus;
      case Direction::minus: return Fminus;
      case Direction::spatial: return F0;
    }
    return F0;
  }
};

namespace detail {
inline AsymptoticLimit certify_limit(const NonlinearitySpec& spec, Direction dir, const SampleBox& box, double tol,
                                     int j_max) {
  AsymptoticLimit out;
  out.tolerance = tol;
  if (dir != Direction::spatial && spec.dim() < 3) {
    out.note = "dilation limits undefined for N < 3";
    return out;
  }
  auto lim = structural_limit(spec, dir);
  // numeric probes on a few magnitudes spanning the box
  std::vector<double> probes;
  // moderate magnitudes: a limit approached like gamma^{-j}|s|^p needs j ~ log|s| extra steps
  for (double s : {1e-2, 0.1, 0.5, 1.0, 1.7, 3.0, 10.0})
    if (s >= box.s_min && s <= box.s_max) probes.push_back(s);
  const double xprobe = box.positions.empty() ? 1.0 : std::max(1.0, box.positions.back());
  bool certified = true;
  std::vector<double> numeric;
  for (double s : probes) {
    for (double sg : {1.0, -1.0}) {
      try {
        auto v = asymptotic_limit(spec, dir, sg * s, tol, j_max, xprobe);
        certified = certified && v.certified;
        numeric.push_back(v.value);
        if (lim.known && lim.spec) {
          const double ref = lim.spec->F(0.0, sg * s);
          if (std::abs(ref - v.value) > 1e-6 * std::max(1.0, std::abs(ref))) certified = false;
        }
      } catch (const DivergenceError&) {
        out.note = "diverges";
        return out;
      }
    }
  }
  if (lim.known) {
    if (!lim.spec) {
      out.note = "diverges";
      return out;
    }
    out.F = lim.spec;
    out.available = true;
    out.certified = certified;
    if (lim.spec->is_zero()) out.note = "certified zero";
    return out;
  }
  // custom kinds: tabulate the numeric limit over one period (dilations) when certified
  if (dir != Direction::spatial && certified) {
    const int N = spec.dim();
    auto table = SelfsimilarTable::sample(N, spec.gamma(), [&](double s) {
      return asymptotic_limit(spec, dir, s, tol, j_max, xprobe).value;
    }, 2048);
    out.F = NonlinearitySpec::table_selfsimilar(std::move(table));
    out.available = true;
    out.certified = true;
    out.note = "tabulated";
  } else if (dir == Direction::spatial && certified) {
    const double far = xprobe * std::ldexp(1.0, j_max);
    out.F = NonlinearitySpec::custom(
        spec.dim(), "spatial-limit",
        [spec, far](double, double s) { return spec.F(far, s); },
        [spec, far](double, double s) { return spec.f(far, s); }, true, spec.gamma());
    out.available = true;
    out.certified = true;
    out.note = "evaluated far field";
  } else {
    out.note = "not certified";
  }
  return out;
}
}  // namespace detail

/// Builds and certifies the asymptotic family of `spec` over the sample box.
inline AsymptoticFamily asymptotic_family(const NonlinearitySpec& spec, const SampleBox& box = {}, double tol = 1e-9,
                                          int j_max = 60) {
  AsymptoticFamily fam;
  fam.F0 = detail::certify_limit(spec, Direction::spatial, box, tol, j_max);
  fam.Finf = fam.F0;
  fam.Fplus = detail::certify_limit(spec, Direction::plus, box, tol, j_max);
  fam.Fminus = detail::certify_limit(spec, Direction::minus, box, tol, j_max);
  return fam;
}

// ---------------------------------------------------------------------------
// Selfsimilar extension and checks
// ---------------------------------------------------------------------------

/// F(s) for the selfsimilar function determined by `base` (one dilation period).
inline double selfsimilar_extend(double gamma, const SelfsimilarTable& base, double s) {
  if (!(gamma > 1.0)) throw InvalidArgument("selfsimilar_extend: gamma must exceed 1");
  if (s == 0.0) return 0.0;
  SelfsimilarTable t = base;
  t.gamma = gamma;
  return NonlinearitySpec::table_selfsimilar(std::move(t)).F(0.0, s);
}

/// Largest scaled deviation |F(s) - gamma^{-Nj} F(gamma^{(N-2)j/2} s)| / |s|^{2*}
/// over j in [-3, 3] and a log grid of s (both signs), at position x.
inline double selfsimilar_deviation(const NonlinearitySpec& spec, double gamma, double x = 0.0) {
  const int N = spec.dim();
  const double q = critical_exponent(N);
  const double P = std::pow(gamma, 0.5 * (N - 2));
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double a = std::exp(std::log(1e-2) + (std::log(1e2) - std::log(1e-2)) * i / 200.0);
    for (double s : {a, -a}) {
      const double Fs = spec.F(x, s);
      for (int j = -3; j <= 3; ++j) {
        const double rhs = std::pow(gamma, -static_cast<double>(N) * j) * spec.F(x, std::pow(P, j) * s);
        worst = std::max(worst, std::abs(Fs - rhs) / std::pow(a, q));
      }
    }
  }
  return worst;
}

inline bool check_selfsimilar(const NonlinearitySpec& spec, double gamma, double tol) {
  return selfsimilar_deviation(spec, gamma) < tol;
}

enum class GrowthRegime { critical, bounded_domain, subcritical };

inline const char* to_string(GrowthRegime r) {
  switch (r) {
    case GrowthRegime::critical: return "critical";
    case GrowthRegime::bounded_domain: return "bounded_domain";
    case GrowthRegime::subcritical: return "subcritical";
  }
  return "?";
}

struct GrowthReport {
  GrowthRegime regime;
  std::map<std::string, double> constants;
  bool pass = true;
  std::vector<std::string> notes;
};

namespace detail {
// q[i] indexed by increasing |s|; unbounded when the top quarter exceeds the
// preceding quarter by more than `factor` (or is non-finite).
inline bool grows_at_top(const std::vector<double>& q, double factor = 4.0) {
  const std::size_t n = q.size(), a = n / 2, b = (3 * n) / 4;
  double prev = 0.0, top = 0.0;
  for (std::size_t i = a; i < b; ++i) prev = std::max(prev, q[i]);
  for (std::size_t i = b; i < n; ++i) {
    if (!std::isfinite(q[i])) return true;
    top = std::max(top, q[i]);
  }
  return top > factor * prev && top > 0.0;
}
inline bool grows_at_bottom(const std::vector<double>& q, double factor = 4.0) {
  std::vector<double> r(q.rbegin(), q.rend());
  return grows_at_top(r, factor);
}
}  // namespace detail

/// Empirical growth constants of f (and F in the critical regime) over the sample box.
inline GrowthReport check_growth(const NonlinearitySpec& spec, GrowthRegime regime, const SampleBox& box = {}) {
  GrowthReport rep{regime, {}, true, {}};
  const int N = spec.dim();
  const auto mags = box.magnitudes();
  auto envelope_max = [&](auto&& ratio) {
    std::vector<double> q(mags.size(), 0.0);
    for (std::size_t i = 0; i < mags.size(); ++i)
      for (double x : box.positions)
        for (double sg : {1.0, -1.0}) {
          const double r = ratio(x, sg * mags[i]);
          q[i] = std::isfinite(r) ? std::max(q[i], r) : std::numeric_limits<double>::infinity();
        }
    return q;
  };
  auto max_of = [](const std::vector<double>& q) { return *std::max_element(q.begin(), q.end()); };

  switch (regime) {
    case GrowthRegime::critical: {
      const double q = critical_exponent(N);
      auto qF = envelope_max([&](double x, double s) { return std::abs(spec.F(x, s)) / std::pow(std::abs(s), q); });
      auto qf = envelope_max([&](double x, double s) { return std::abs(spec.f(x, s)) / std::pow(std::abs(s), q - 1); });
      rep.constants["C_F"] = max_of(qF);
      rep.constants["C_f"] = max_of(qf);
      rep.pass = !detail::grows_at_top(qF) && !detail::grows_at_top(qf);
      if (rep.pass && qf.back() < 0.5 * rep.constants["C_f"]) rep.notes.push_back("subcritical decay at infinity");
      if (detail::grows_at_bottom(qf)) rep.notes.push_back("ratio singular near s = 0 on the sample");
      break;
    }
    case GrowthRegime::bounded_domain: {
      const double q = critical_exponent(N);
      auto qf = envelope_max([&](double x, double s) {
        return std::abs(spec.f(x, s)) / (1.0 + std::pow(std::abs(s), q - 1));
      });
      rep.constants["C"] = max_of(qf);
      rep.pass = !detail::grows_at_top(qf);
      break;
    }
    case GrowthRegime::subcritical: {
      std::vector<double> candidates;
      if (N >= 3) {
        const double q = critical_exponent(N);
        for (int k = 1; k <= 7; ++k) candidates.push_back(2.0 + k * (q - 2.0) / 8.0);
      } else {
        candidates = {3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0};
      }
      for (double eps : {1e-1, 1e-2, 1e-3}) {
        bool found = false;
        for (double p : candidates) {
          auto qf = envelope_max([&](double x, double s) {
            const double a = std::abs(s);
            double bound = eps * a;
            if (N >= 3) bound += eps * std::pow(a, critical_exponent(N) - 1);
            return std::max(0.0, std::abs(spec.f(x, s)) - bound) / std::pow(a, p - 1);
          });
          if (!detail::grows_at_top(qf) && !detail::grows_at_bottom(qf)) {
            std::ostringstream key;
            key << "C_eps(" << eps << ")";
            rep.constants[key.str()] = max_of(qf);
            key.str("");
            key << "p_eps(" << eps << ")";
            rep.constants[key.str()] = p;
            found = true;
            break;
          }
        }
        if (!found) {
          rep.pass = false;
          std::ostringstream msg;
          msg << "no admissible p_eps for eps = " << eps;
          rep.notes.push_back(msg.str());
        }
      }
      break;
    }
  }
  return rep;
}

/// Condition (R): f(x, s) s >= mu F(x, s) at every sample with s != 0. Requires mu > 2.
inline bool check_AR(const NonlinearitySpec& spec, double mu, const SampleBox& box = {}) {
  if (!(mu > 2.0)) throw InvalidArgument("check_AR: mu must exceed 2");
  for (double a : box.magnitudes())
    for (double x : box.positions)
      for (double s : {a, -a}) {
        const double fs = spec.f(x, s) * s, F = spec.F(x, s);
        if (fs - mu * F < -1e-12 * (std::abs(fs) + mu * std::abs(F))) return false;
      }
  return true;
}

}  // namespace ccmp
