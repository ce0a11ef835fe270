#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "triroc/numerics.hpp"
#include "triroc/random.hpp"

namespace triroc {

// Population model for one diagnostic class. Four families cover every
// simulation scenario: normal, lognormal (mu/sigma on the log scale), gamma
// (shape k, scale theta), and finite mixtures of the first three (depth 1:
// mixture components may not themselves be mixtures).
class DistributionSpec {
 public:
  struct Normal {
    double mu, sigma;
    bool operator==(const Normal&) const = default;
  };
  struct LogNormal {
    double mu, sigma;
    bool operator==(const LogNormal&) const = default;
  };
  struct Gamma {
    double shape, scale;
    bool operator==(const Gamma&) const = default;
  };
  using Component = std::variant<Normal, LogNormal, Gamma>;
  struct Mixture {
    std::vector<double> weights;  // positive, sum to 1 (normalized on build)
    std::vector<Component> components;
    bool operator==(const Mixture&) const = default;
  };

  DistributionSpec() = default;  // standard normal

  static DistributionSpec normal(double mu, double sigma);
  static DistributionSpec lognormal(double mu, double sigma);
  static DistributionSpec gamma(double shape, double scale);
  static DistributionSpec mixture(std::vector<double> weights,
                                  std::vector<DistributionSpec> components);

  double pdf(double x) const;
  double cdf(double x) const;

  // p in (0,1); bracketed root solve on the CDF, |cdf(result) - p| <= 1e-10.
  double quantile(double p) const;

  std::vector<double> sample(std::size_t n, RandomStream& stream) const;

  // Text form, e.g. "N(0,1)", "LogN(1,0.5)", "Gamma(2,1.5)",
  // "0.5*N(0,1)+0.5*Gamma(4,1)". parse() accepts the same grammar,
  // whitespace-insensitively; round-trips exactly.
  std::string to_string() const;
  static DistributionSpec parse(std::string_view text);

  bool operator==(const DistributionSpec&) const = default;

  const std::variant<Normal, LogNormal, Gamma, Mixture>& node() const { return v_; }

 private:
  std::variant<Normal, LogNormal, Gamma, Mixture> v_{Normal{0.0, 1.0}};
};

// Overlap of the three class densities: ∫ min{f1, f2, f3}. 1 means the
// classes are indistinguishable. Integration runs over the intersection of
// the per-class bodies (1e-9 tail quantiles); since the integrand is bounded
// by each density, the truncated mass is below 2e-9 per side.
double theoretical_ovl(const DistributionSpec& f1, const DistributionSpec& f2,
                       const DistributionSpec& f3);

// P(X1 < X2 < X3) for independent draws, computed as the single integral
// ∫ F1(u) (1 - F3(u)) f2(u) du, evaluated on the probability scale of the
// middle class so unbounded densities stay tame. Equals 1/6 when the three
// classes coincide.
double theoretical_vus(const DistributionSpec& f1, const DistributionSpec& f2,
                       const DistributionSpec& f3);

// Two thresholds c1 < c2 carve the marker axis into the three predicted
// classes: x <= c1 -> 1, c1 < x <= c2 -> 2, x > c2 -> 3.
struct DecisionRule {
  double c1, c2;
};

struct OperatingPoint {
  double tpf1, tpf2, tpf3;  // per-class correct-classification fractions
};

OperatingPoint operating_point(const DecisionRule& rule, const DistributionSpec& f1,
                               const DistributionSpec& f2, const DistributionSpec& f3);

int classify(const DecisionRule& rule, double x);  // returns 1, 2 or 3

}  // namespace triroc
