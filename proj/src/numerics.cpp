#include "triroc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace triroc {

double norm_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
  static const double kInvSqrt2 = 0.7071067811865475244;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericalError("norm_quantile: p must be in (0,1)");
  // Bisection brings the bracket down to ~1e-12; two Newton steps polish it.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (norm_cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) {
    const double density = norm_pdf(x);
    if (density <= 0.0) break;
    x -= (norm_cdf(x) - p) / density;
  }
  return x;
}

namespace {

// Gauss-Kronrod 15 on [-1,1]: Kronrod abscissae (positive half) and weights,
// plus the embedded 7-point Gauss weights. Verified against Gauss-Legendre
// nodes and polynomial exactness to degree 22 before being committed here.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct Panel {
  double a, b;
  double value;   // Kronrod estimate
  double error;   // |Kronrod - Gauss|
  std::size_t id; // insertion order; deterministic tie-break in the heap
};

struct PanelWorse {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.id > y.id;
  }
};

Panel gk15(const std::function<double(double)>& f, double a, double b, std::size_t id) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  auto eval = [&](double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "integrand returned non-finite value at x = " << x;
      throw NumericalError(msg.str());
    }
    return y;
  };
  const double fc = eval(c);
  double kron = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    const double sum = eval(c - dx) + eval(c + dx);
    kron += kWgk[i] * sum;
    if (i % 2 == 1) gauss += kWg[i / 2] * sum;
  }
  return Panel{a, b, kron * h, std::abs((kron - gauss) * h), id};
}

}  // namespace

QuadratureResult integrate_adaptive_full(const std::function<double(double)>& f,
                                         Interval domain, double abs_tol,
                                         std::size_t max_panels) {
  if (!(domain.lo < domain.hi) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi))
    throw NumericalError("integrate_adaptive: domain must be finite with lo < hi");
  if (!(abs_tol > 0.0)) throw NumericalError("integrate_adaptive: abs_tol must be > 0");

  std::priority_queue<Panel, std::vector<Panel>, PanelWorse> queue;
  std::size_t next_id = 0;
  // Seed with several uniform panels, not one: when the integrand's mass sits
  // in a narrow slice of the domain, a single 15-node panel can read all
  // zeros and report a zero error estimate, ending refinement immediately.
  constexpr std::size_t kInitialPanels = 8;
  std::size_t panels = kInitialPanels;
  double total = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < kInitialPanels; ++i) {
    const double a =
        domain.lo + (domain.hi - domain.lo) * static_cast<double>(i) / kInitialPanels;
    const double b = domain.lo + (domain.hi - domain.lo) * static_cast<double>(i + 1) /
                                     kInitialPanels;
    const Panel p = gk15(f, a, b, next_id++);
    total += p.value;
    err += p.error;
    queue.push(p);
  }
  // Width floor: below this a panel cannot be split meaningfully; its error
  // is frozen (kept in `err` but the panel leaves the queue).
  const double width_floor =
      16.0 * std::numeric_limits<double>::epsilon() *
      (std::abs(domain.lo) + std::abs(domain.hi) + 1.0);
  double frozen_err = 0.0;

  while (err + frozen_err > abs_tol && !queue.empty()) {
    if (panels + 2 > max_panels) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "integrate_adaptive: panel budget (" << max_panels
          << ") exhausted; best estimate " << total << " with error bound "
          << (err + frozen_err);
      throw NumericalError(msg.str());
    }
    const Panel worst = queue.top();
    queue.pop();
    if (worst.b - worst.a < width_floor) {
      err -= worst.error;
      frozen_err += worst.error;
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gk15(f, worst.a, mid, next_id++);
    const Panel right = gk15(f, mid, worst.b, next_id++);
    panels += 2;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  if (err + frozen_err > abs_tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "integrate_adaptive: stalled at machine width; best estimate " << total
        << " with error bound " << (err + frozen_err);
    throw NumericalError(msg.str());
  }
  return QuadratureResult{total, err + frozen_err, panels, true};
}

double integrate_adaptive(const std::function<double(double)>& f, Interval domain,
                          double abs_tol, std::size_t max_panels) {
  return integrate_adaptive_full(f, domain, abs_tol, max_panels).value;
}

namespace {

// Treat non-finite objective values as -inf so the optimizer can walk a
// profile likelihood that degenerates at the domain edge.
double safe_eval(const std::function<double(double)>& g, double x) {
  const double y = g(x);
  return std::isfinite(y) ? y : -std::numeric_limits<double>::infinity();
}

}  // namespace

MaximizeResult refine_grid_maximum(const std::function<double(double)>& g, Interval domain,
                                   std::span<const double> grid_values, double x_tol) {
  if (!(domain.lo < domain.hi)) throw NumericalError("maximize_scalar: empty domain");
  const std::size_t n = grid_values.size();
  if (n < 2) throw NumericalError("maximize_scalar: need at least 2 grid points");

  std::size_t best = n;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = grid_values[i];
    if (std::isfinite(v) && v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == n)
    throw NumericalError("maximize_scalar: objective not finite anywhere on the grid");

  const double step = (domain.hi - domain.lo) / static_cast<double>(n - 1);
  auto grid_x = [&](std::size_t i) { return domain.lo + step * static_cast<double>(i); };
  double a = (best == 0) ? domain.lo : grid_x(best - 1);
  double b = (best + 1 >= n) ? domain.hi : grid_x(best + 1);

  // Golden-section on [a, b]; the maximum of a unimodal patch around the best
  // grid cell is pinned to within x_tol.
  const double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = safe_eval(g, x1), f2 = safe_eval(g, x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = safe_eval(g, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = safe_eval(g, x1);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = safe_eval(g, xm);
  // Keep whichever of (refined midpoint, best probes, best grid point) won;
  // guards against an objective that is flat or noisy at the scale of x_tol.
  if (f1 > fm) { fm = f1; xm = x1; }
  if (f2 > fm) { fm = f2; xm = x2; }
  const double gx = grid_x(best);
  const double gv = safe_eval(g, gx);
  if (gv > fm) { fm = gv; xm = gx; }
  return MaximizeResult{xm, fm};
}

MaximizeResult maximize_scalar(const std::function<double(double)>& g, Interval domain,
                               double x_tol, int grid_points) {
  if (grid_points < 2) throw NumericalError("maximize_scalar: need at least 2 grid points");
  std::vector<double> values(static_cast<std::size_t>(grid_points));
  const double step = (domain.hi - domain.lo) / static_cast<double>(grid_points - 1);
  for (int i = 0; i < grid_points; ++i)
    values[static_cast<std::size_t>(i)] =
        safe_eval(g, domain.lo + step * static_cast<double>(i));
  return refine_grid_maximum(g, domain, values, x_tol);
}

double sample_quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("sample_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("sample_quantile: p must be in [0,1]");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t i = std::min(static_cast<std::size_t>(h), n - 2);
  const double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double sample_quantile(std::span<const double> data, double p) {
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  return sample_quantile_sorted(sorted, p);
}

SampleStats summarize(std::span<const double> data) {
  if (data.size() < 2) throw DataError("summarize: need at least 2 observations");
  for (double x : data)
    if (!std::isfinite(x)) throw DataError("summarize: non-finite observation");

  SampleStats s;
  s.n = data.size();
  double sum = 0.0;
  for (double x : data) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double x : data) {
    const double d = x - s.mean;
    ss += d * d;
  }
  s.sd_mle = std::sqrt(ss / static_cast<double>(s.n));
  s.sd_sample = std::sqrt(ss / static_cast<double>(s.n - 1));

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.iqr = sample_quantile_sorted(sorted, 0.75) - sample_quantile_sorted(sorted, 0.25);
  return s;
}

}  // namespace triroc
