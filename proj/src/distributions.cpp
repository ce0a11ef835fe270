#include "triroc/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

namespace triroc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "distribution parameter " << what << " must be positive and finite, got " << v;
    throw std::invalid_argument(msg.str());
  }
  return v;
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "distribution parameter " << what << " must be finite";
    throw std::invalid_argument(msg.str());
  }
  return v;
}

double normal_pdf(const DistributionSpec::Normal& d, double x) {
  return norm_pdf((x - d.mu) / d.sigma) / d.sigma;
}
double normal_cdf(const DistributionSpec::Normal& d, double x) {
  return norm_cdf((x - d.mu) / d.sigma);
}

double lognormal_pdf(const DistributionSpec::LogNormal& d, double x) {
  if (x <= 0.0) return 0.0;
  return norm_pdf((std::log(x) - d.mu) / d.sigma) / (d.sigma * x);
}
double lognormal_cdf(const DistributionSpec::LogNormal& d, double x) {
  if (x <= 0.0) return 0.0;
  return norm_cdf((std::log(x) - d.mu) / d.sigma);
}

double gamma_pdf(const DistributionSpec::Gamma& d, double x) {
  // Density of the open support (0, inf); the value at 0 itself is immaterial
  // for integration and returning 0 avoids propagating inf when shape < 1.
  if (x <= 0.0) return 0.0;
  const double z = x / d.scale;
  return std::exp((d.shape - 1.0) * std::log(z) - z - boost::math::lgamma(d.shape)) /
         d.scale;
}
double gamma_cdf(const DistributionSpec::Gamma& d, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(d.shape, x / d.scale);
}

double component_pdf(const DistributionSpec::Component& c, double x) {
  return std::visit([x](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, DistributionSpec::Normal>) return normal_pdf(d, x);
    else if constexpr (std::is_same_v<T, DistributionSpec::LogNormal>) return lognormal_pdf(d, x);
    else return gamma_pdf(d, x);
  }, c);
}

double component_cdf(const DistributionSpec::Component& c, double x) {
  return std::visit([x](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, DistributionSpec::Normal>) return normal_cdf(d, x);
    else if constexpr (std::is_same_v<T, DistributionSpec::LogNormal>) return lognormal_cdf(d, x);
    else return gamma_cdf(d, x);
  }, c);
}

double component_quantile(const DistributionSpec::Component& c, double p) {
  return std::visit([p](const auto& d) -> double {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, DistributionSpec::Normal>) {
      return d.mu + d.sigma * norm_quantile(p);
    } else if constexpr (std::is_same_v<T, DistributionSpec::LogNormal>) {
      return std::exp(d.mu + d.sigma * norm_quantile(p));
    } else {
      // The inverse regularized incomplete gamma resolves extreme tails that
      // a cdf bisection cannot: for shape < 1 the 1e-9 quantile sits around
      // 1e-45, far below any absolute bisection floor.
      return d.scale * boost::math::gamma_p_inv(d.shape, p);
    }
  }, c);
}

// Mixture quantile by bisection. The bracket is exact: at min_i q_i(p) every
// component cdf is <= p, at max_i q_i(p) every one is >= p. The width test is
// purely relative so roots arbitrarily close to zero still converge.
double mixture_quantile(const DistributionSpec::Mixture& m, double p) {
  const auto cdf_at = [&](double x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.components.size(); ++i)
      sum += m.weights[i] * component_cdf(m.components[i], x);
    return sum;
  };
  double a = kInf, b = -kInf;
  for (const auto& c : m.components) {
    const double q = component_quantile(c, p);
    a = std::min(a, q);
    b = std::max(b, q);
  }
  if (a == b) return a;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;  // bracket exhausted at double precision
    const double c = cdf_at(mid);
    if (std::abs(c - p) <= 1e-12) return mid;
    (c < p ? a : b) = mid;
    if (b - a <= 1e-15 * std::max(std::abs(a), std::abs(b))) break;
  }
  const double x = 0.5 * (a + b);
  if (std::abs(cdf_at(x) - p) > 1e-10)
    throw NumericalError("quantile: did not reach |cdf - p| <= 1e-10");
  return x;
}

double gamma_draw(double shape, double scale, RandomStream& stream) {
  // Marsaglia-Tsang squeeze; the shape < 1 case boosts a shape+1 draw by
  // U^(1/shape).
  if (shape < 1.0) {
    const double g = gamma_draw(shape + 1.0, 1.0, stream);
    const double u = stream.next_uniform();
    return scale * g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = stream.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double component_draw(const DistributionSpec::Component& c, RandomStream& stream) {
  return std::visit([&stream](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, DistributionSpec::Normal>)
      return d.mu + d.sigma * stream.next_normal();
    else if constexpr (std::is_same_v<T, DistributionSpec::LogNormal>)
      return std::exp(d.mu + d.sigma * stream.next_normal());
    else
      return gamma_draw(d.shape, d.scale, stream);
  }, c);
}

// Shortest decimal form that parses back to exactly the same double.
std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string component_to_string(const DistributionSpec::Component& c) {
  return std::visit([](const auto& d) -> std::string {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, DistributionSpec::Normal>)
      return "N(" + fmt_double(d.mu) + "," + fmt_double(d.sigma) + ")";
    else if constexpr (std::is_same_v<T, DistributionSpec::LogNormal>)
      return "LogN(" + fmt_double(d.mu) + "," + fmt_double(d.sigma) + ")";
    else
      return "Gamma(" + fmt_double(d.shape) + "," + fmt_double(d.scale) + ")";
  }, c);
}

}  // namespace

DistributionSpec DistributionSpec::normal(double mu, double sigma) {
  DistributionSpec s;
  s.v_ = Normal{require_finite(mu, "mu"), require_positive(sigma, "sigma")};
  return s;
}

DistributionSpec DistributionSpec::lognormal(double mu, double sigma) {
  DistributionSpec s;
  s.v_ = LogNormal{require_finite(mu, "mu"), require_positive(sigma, "sigma")};
  return s;
}

DistributionSpec DistributionSpec::gamma(double shape, double scale) {
  DistributionSpec s;
  s.v_ = Gamma{require_positive(shape, "shape"), require_positive(scale, "scale")};
  return s;
}

DistributionSpec DistributionSpec::mixture(std::vector<double> weights,
                                           std::vector<DistributionSpec> components) {
  if (weights.size() != components.size() || weights.size() < 2)
    throw std::invalid_argument("mixture: need >= 2 components with matching weights");
  Mixture m;
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("mixture: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw std::invalid_argument("mixture: weights must sum to 1");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& node = components[i].v_;
    if (std::holds_alternative<Mixture>(node))
      throw std::invalid_argument("mixture: components may not themselves be mixtures");
    m.weights.push_back(weights[i] / total);
    std::visit([&m](const auto& d) {
      if constexpr (!std::is_same_v<std::decay_t<decltype(d)>, Mixture>)
        m.components.push_back(d);
    }, node);
  }
  DistributionSpec s;
  s.v_ = std::move(m);
  return s;
}

double DistributionSpec::pdf(double x) const {
  return std::visit([x](const auto& d) -> double {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Mixture>) {
      double sum = 0.0;
      for (std::size_t i = 0; i < d.weights.size(); ++i)
        sum += d.weights[i] * component_pdf(d.components[i], x);
      return sum;
    } else {
      return component_pdf(Component{d}, x);
    }
  }, v_);
}

double DistributionSpec::cdf(double x) const {
  return std::visit([x](const auto& d) -> double {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Mixture>) {
      double sum = 0.0;
      for (std::size_t i = 0; i < d.weights.size(); ++i)
        sum += d.weights[i] * component_cdf(d.components[i], x);
      return sum;
    } else {
      return component_cdf(Component{d}, x);
    }
  }, v_);
}

double DistributionSpec::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("quantile: p must be in (0,1)");
  return std::visit([p](const auto& d) -> double {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Mixture>)
      return mixture_quantile(d, p);
    else
      return component_quantile(Component{d}, p);
  }, v_);
}


std::vector<double> DistributionSpec::sample(std::size_t n, RandomStream& stream) const {
  std::vector<double> out;
  out.reserve(n);
  std::visit([&](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Mixture>) {
      for (std::size_t i = 0; i < n; ++i) {
        // One uniform picks the component, then that component draws.
        const double u = stream.next_uniform();
        double cum = 0.0;
        std::size_t pick = d.weights.size() - 1;
        for (std::size_t j = 0; j < d.weights.size(); ++j) {
          cum += d.weights[j];
          if (u <= cum) {
            pick = j;
            break;
          }
        }
        out.push_back(component_draw(d.components[pick], stream));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        out.push_back(component_draw(Component{d}, stream));
    }
  }, v_);
  return out;
}

std::string DistributionSpec::to_string() const {
  return std::visit([](const auto& d) -> std::string {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Mixture>) {
      std::string out;
      for (std::size_t i = 0; i < d.weights.size(); ++i) {
        if (i) out += "+";
        out += fmt_double(d.weights[i]) + "*" + component_to_string(d.components[i]);
      }
      return out;
    } else {
      return component_to_string(Component{d});
    }
  }, v_);
}

namespace {

struct ParsedTerm {
  std::optional<double> weight;
  DistributionSpec spec;
};

[[noreturn]] void parse_fail(std::string_view text, const std::string& why) {
  throw std::invalid_argument("cannot parse distribution \"" + std::string(text) +
                              "\": " + why);
}

double parse_number(std::string_view text, const std::string& compact, std::size_t* pos) {
  const char* begin = compact.c_str() + *pos;
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) parse_fail(text, "expected a number at \"" + compact.substr(*pos) + "\"");
  *pos += static_cast<std::size_t>(end - begin);
  return v;
}

bool eat(const std::string& compact, std::size_t* pos, std::string_view word) {
  if (compact.size() - *pos < word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(compact[*pos + i])) !=
        std::tolower(static_cast<unsigned char>(word[i])))
      return false;
  *pos += word.size();
  return true;
}

ParsedTerm parse_term(std::string_view text, const std::string& compact, std::size_t* pos) {
  ParsedTerm term;
  // Optional "w*" prefix: a number followed by '*'.
  const std::size_t save = *pos;
  if (compact[*pos] != 'N' && compact[*pos] != 'n' && compact[*pos] != 'L' &&
      compact[*pos] != 'l' && compact[*pos] != 'G' && compact[*pos] != 'g') {
    const double w = parse_number(text, compact, pos);
    if (*pos < compact.size() && compact[*pos] == '*') {
      ++*pos;
      term.weight = w;
    } else {
      *pos = save;
      parse_fail(text, "expected '*' after mixture weight");
    }
  }
  int family;  // 0 normal, 1 lognormal, 2 gamma
  if (eat(compact, pos, "logn")) family = 1;
  else if (eat(compact, pos, "gamma")) family = 2;
  else if (eat(compact, pos, "n")) family = 0;
  else parse_fail(text, "expected N(...), LogN(...) or Gamma(...)");
  if (*pos >= compact.size() || compact[*pos] != '(') parse_fail(text, "expected '('");
  ++*pos;
  const double p1 = parse_number(text, compact, pos);
  if (*pos >= compact.size() || compact[*pos] != ',') parse_fail(text, "expected ','");
  ++*pos;
  const double p2 = parse_number(text, compact, pos);
  if (*pos >= compact.size() || compact[*pos] != ')') parse_fail(text, "expected ')'");
  ++*pos;
  switch (family) {
    case 0: term.spec = DistributionSpec::normal(p1, p2); break;
    case 1: term.spec = DistributionSpec::lognormal(p1, p2); break;
    default: term.spec = DistributionSpec::gamma(p1, p2); break;
  }
  return term;
}

}  // namespace

DistributionSpec DistributionSpec::parse(std::string_view text) {
  std::string compact;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
  if (compact.empty()) parse_fail(text, "empty");

  std::vector<ParsedTerm> terms;
  std::size_t pos = 0;
  terms.push_back(parse_term(text, compact, &pos));
  while (pos < compact.size() && compact[pos] == '+') {
    ++pos;
    terms.push_back(parse_term(text, compact, &pos));
  }
  if (pos != compact.size())
    parse_fail(text, "trailing characters \"" + compact.substr(pos) + "\"");

  if (terms.size() == 1) {
    if (terms[0].weight)
      parse_fail(text, "a single component must not carry a mixture weight");
    return terms[0].spec;
  }
  std::vector<double> weights;
  std::vector<DistributionSpec> specs;
  for (auto& t : terms) {
    if (!t.weight) parse_fail(text, "every mixture component needs a weight");
    weights.push_back(*t.weight);
    specs.push_back(std::move(t.spec));
  }
  try {
    return DistributionSpec::mixture(std::move(weights), std::move(specs));
  } catch (const std::invalid_argument& e) {
    parse_fail(text, e.what());
  }
}

double theoretical_ovl(const DistributionSpec& f1, const DistributionSpec& f2,
                       const DistributionSpec& f3) {
  // min{f1,f2,f3} <= f_i pointwise, so the part of the overlap outside the
  // intersection of the per-class bodies (1e-9 tail quantiles) is below 2e-9.
  // Keeping the domain this tight matters: a union-of-bodies domain can be
  // thousands of times wider than the overlap region and the first quadrature
  // panel would see only zeros. Disjoint bodies mean the overlap itself is
  // negligible.
  double lo = -kInf, hi = kInf;
  for (const auto* f : {&f1, &f2, &f3}) {
    lo = std::max(lo, f->quantile(1e-9));
    hi = std::min(hi, f->quantile(1.0 - 1e-9));
  }
  if (!(lo < hi)) return 0.0;
  const double v = integrate_adaptive(
      [&](double x) { return std::min({f1.pdf(x), f2.pdf(x), f3.pdf(x)}); },
      Interval{lo, hi}, 1e-8);
  return std::clamp(v, 0.0, 1.0);
}

double theoretical_vus(const DistributionSpec& f1, const DistributionSpec& f2,
                       const DistributionSpec& f3) {
  // Substitute u = Q2(t): the integrand F1(u)(1-F3(u))f2(u)du becomes
  // F1(Q2(t))(1-F3(Q2(t)))dt, bounded by 1 even where f2 blows up at a
  // support edge (gamma shapes < 1).  Truncating t to [1e-9, 1-1e-9] then
  // costs at most 2e-9.
  const double v = integrate_adaptive(
      [&](double t) {
        const double u = f2.quantile(t);
        return f1.cdf(u) * (1.0 - f3.cdf(u));
      },
      Interval{1e-9, 1.0 - 1e-9}, 1e-8);
  return std::clamp(v, 0.0, 1.0);
}

OperatingPoint operating_point(const DecisionRule& rule, const DistributionSpec& f1,
                               const DistributionSpec& f2, const DistributionSpec& f3) {
  if (!(rule.c1 < rule.c2))
    throw std::invalid_argument("operating_point: thresholds must satisfy c1 < c2");
  return OperatingPoint{f1.cdf(rule.c1), f2.cdf(rule.c2) - f2.cdf(rule.c1),
                        1.0 - f3.cdf(rule.c2)};
}

int classify(const DecisionRule& rule, double x) {
  if (!(rule.c1 < rule.c2))
    throw std::invalid_argument("classify: thresholds must satisfy c1 < c2");
  if (x <= rule.c1) return 1;
  if (x <= rule.c2) return 2;
  return 3;
}

}  // namespace triroc
