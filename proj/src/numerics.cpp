#include "lowlying/numerics.hpp"

#include <algorithm>
#include <queue>

#include "lowlying/errors.hpp"

namespace lowlying {

double ordered_sum(std::span<const double> values) {
  CompensatedSum<double> acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

Complex ordered_sum(std::span<const Complex> values) {
  CompensatedSum<Complex> acc;
  for (Complex v : values) acc.add(v);
  return acc.value();
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        const GaussLegendreRule& rule) {
  CompensatedSum<double> acc;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      acc.add(0.5 * h * rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]));
    }
  }
  return acc.value();
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error, abs_value;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double absk = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    absk += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h), absk * std::abs(h)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const AdaptiveOptions& opts) {
  QuadratureResult out;
  if (a == b) return out;
  std::priority_queue<Segment> heap;
  const int n0 = std::max(1, opts.initial_panels);
  const double h = (b - a) / n0;
  for (int i = 0; i < n0; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == n0) ? b : lo + h;
    heap.push(gk15(f, lo, hi));
    out.evaluations += 15;
  }
  int subdivisions = 0;
  auto totals = [&heap](double& value, double& error, double& absv) {
    // Sum over a copy so the reduction order is fixed by the heap layout.
    auto copy = heap;
    std::vector<Segment> segs;
    segs.reserve(copy.size());
    while (!copy.empty()) {
      segs.push_back(copy.top());
      copy.pop();
    }
    std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    CompensatedSum<double> v, e, av;
    for (const auto& s : segs) {
      v.add(s.value);
      e.add(s.error);
      av.add(s.abs_value);
    }
    value = v.value();
    error = e.value();
    absv = av.value();
  };
  double value = 0, error = 0, absv = 0;
  totals(value, error, absv);
  // Running totals are refreshed exactly every so often; in between they are
  // updated incrementally.
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
    if (subdivisions >= opts.max_subdivisions) {
      throw ConvergenceError("integrate_adaptive: subdivision cap reached (error estimate " +
                             std::to_string(error) + ")");
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    out.evaluations += 30;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    absv += left.abs_value + right.abs_value - worst.abs_value;
    if (subdivisions % 64 == 0) totals(value, error, absv);
  }
  totals(value, error, absv);
  out.value = value;
  out.abs_error = error;
  out.abs_integral = absv;
  return out;
}

}  // namespace lowlying
