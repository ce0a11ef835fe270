#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triroc/numerics.hpp"

namespace triroc {

// Marker values grouped by true class, ordered class1 -> class3 by increasing
// disease severity (marker values tend upward after orientation).
struct ThreeClassSample {
  std::vector<double> class1, class2, class3;

  const std::vector<double>& cls(int k) const;  // k in {1,2,3}
  std::size_t total() const { return class1.size() + class2.size() + class3.size(); }
};

enum class Measure { kOvl, kVus };
enum class Method { kNormal, kBoxCoxNormal, kKernel, kEmpirical };

std::string to_string(Measure m);
std::string to_string(Method m);

// Per-class normal fits; sigma is the MLE (divisor n). Each class needs
// n >= 2 and a nonzero variance.
struct NormalTriple {
  std::array<double, 3> mu{}, sigma{};

  // Conventional reparameterization used by the trinormal VUS integrand.
  double a() const { return sigma[1] / sigma[0]; }
  double b() const { return (mu[0] - mu[1]) / sigma[0]; }
  double c() const { return sigma[1] / sigma[2]; }
  double d() const { return (mu[2] - mu[1]) / sigma[2]; }
};

NormalTriple fit_normal_triple(const ThreeClassSample& sample);

// VUS under trinormality: ∫ Φ(a·s - b) Φ(-c·s + d) φ(s) ds over s in [-9, 9].
double vus_normal(const NormalTriple& fit);

// OVL under trinormality: ∫ min of the three fitted densities over
// [min mu - 9 max sigma, max mu + 9 max sigma].
double ovl_normal(const NormalTriple& fit);

// One-parameter power transform fitted by profile likelihood across the three
// classes jointly (per-class MLE variances). If any value is <= 0 the whole
// sample is shifted by 1 - min first; shift > 0 therefore doubles as the
// "data were shifted" warning flag, and at_boundary flags a maximum pinned at
// the edge of the search interval.
struct BoxCoxFit {
  double lambda = 1.0;
  double shift = 0.0;
  double loglik = 0.0;
  Interval search_domain{-5.0, 5.0};
  bool at_boundary = false;
};

BoxCoxFit fit_box_cox(const ThreeClassSample& sample);

// ((x + shift)^lambda - 1) / lambda, log branch when |lambda| < 1e-10.
// Requires x + shift > 0.
double apply_box_cox(const BoxCoxFit& fit, double x);
ThreeClassSample apply_box_cox(const BoxCoxFit& fit, const ThreeClassSample& sample);

// Gaussian-kernel density/CDF estimates per class with Silverman bandwidths
// h_k = (4/3)^(1/5) n_k^(-1/5) min(sd_sample, IQR/1.349); if one of the two
// spread measures is zero the other is used, if both are zero the class is
// degenerate and fitting throws.
class KernelEstimator {
 public:
  explicit KernelEstimator(const ThreeClassSample& sample);

  double pdf(int k, double x) const;  // k in {1,2,3}
  double cdf(int k, double x) const;
  double bandwidth(int k) const { return h_[static_cast<std::size_t>(k - 1)]; }

  // Integration range covering all kernel mass: [min obs - 6 max h, max obs + 6 max h].
  Interval support() const { return support_; }

 private:
  std::array<std::vector<double>, 3> data_;
  std::array<double, 3> h_{};
  Interval support_{};
};

double ovl_kernel(const KernelEstimator& fit);   // quadrature tol 1e-7
double vus_kernel(const KernelEstimator& fit);   // ∫ F̂1 (1 - F̂3) f̂2, tol 1e-7

// Empirical VUS: the U-statistic over all (a, b, c) triples with kernel
// 1{a<b<c} + ties scored 1/2 (one equality) and 1/6 (triple tie). Computed
// exactly in integer arithmetic via per-middle-value counts in O(n log n);
// identical to the brute-force triple loop bit for bit.
double vus_empirical(const ThreeClassSample& sample);

struct ConfidenceInterval {
  double lo = 0.0, hi = 0.0;
  double level = 0.95;
  int B = 0;
};

struct EstimateResult {
  Measure measure = Measure::kOvl;
  Method method = Method::kNormal;
  double value = 0.0;
  std::optional<ConfidenceInterval> ci;
  int redraws = 0;  // failed bootstrap attempts that were re-drawn
};

// Point estimate dispatch. (kOvl, kEmpirical) is not a supported pair and
// throws std::invalid_argument.
EstimateResult estimate(const ThreeClassSample& sample, Measure measure, Method method);

namespace detail {
// Estimates clamp to [0,1]; exceedances beyond floating noise (1e-6) are
// counted here so tests can assert clamping never fires in normal use.
std::uint64_t clamp_events();
void reset_clamp_events();
}  // namespace detail

}  // namespace triroc
