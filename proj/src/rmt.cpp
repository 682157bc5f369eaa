#include "lowlying/rmt.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "lowlying/errors.hpp"

namespace lowlying::rmt {

Group parse_group(const std::string& name) {
  static const std::map<std::string, Group> table = {
      {"so-even", Group::so_even}, {"so-odd", Group::so_odd}, {"o", Group::o}, {"u", Group::u}, {"sp", Group::sp}};
  const auto it = table.find(name);
  if (it == table.end()) throw DomainError("unknown symmetry group '" + name + "' (so-even, so-odd, o, u, sp)");
  return it->second;
}

std::string group_name(Group g) {
  switch (g) {
    case Group::so_even: return "so-even";
    case Group::so_odd: return "so-odd";
    case Group::o: return "o";
    case Group::u: return "u";
    case Group::sp: return "sp";
  }
  return "?";
}

TestFunction make_test_function(double eta) {
  if (!(eta > 0.0) || eta > 4.0) throw DomainError("make_test_function: eta must lie in (0, 4]");
  TestFunction phi;
  phi.eta = eta;
  phi.bump = std::make_shared<const BumpTransform>(eta, BumpTransform::Normalization::unit_peak);
  phi.quadrature_nodes = phi.bump->quadrature_nodes();
  return phi;
}

double test_function_eval(const TestFunction& phi, Space which, double t) {
  if (which == Space::xi_space) return phi.bump->bump(t);
  return phi.bump->eval_real(t);
}

double sine_kernel(double y) {
  if (std::abs(y) < 1e-8) return 1.0 - (kPi * y) * (kPi * y) / 6.0;
  return std::sin(kPi * y) / (kPi * y);
}

DensityValue rmt_density_eval(Group g, double x) {
  switch (g) {
    case Group::so_even: return {1.0 + sine_kernel(2.0 * x), 0.0};
    case Group::so_odd: return {1.0 - sine_kernel(2.0 * x), 1.0};
    case Group::o: return {1.0, 0.5};
    case Group::u: return {1.0, 0.0};
    case Group::sp: return {1.0 - sine_kernel(2.0 * x), 0.0};
  }
  return {};
}

namespace {

// int_{-a}^{a} phi-hat, by adaptive quadrature on phi-hat itself.
double hat_mass(const TestFunction& phi, double a) {
  a = std::min(a, phi.eta);
  AdaptiveOptions opts{1e-15, 1e-14, 4000, 8};
  return 2.0 * integrate_adaptive([&](double t) { return phi.bump->bump(t); }, 0.0, a, opts).value;
}

// Past this x, |phi| and the tail integral of |phi| are below 1e-15.
double x_cutoff(const TestFunction& phi) {
  double x = 8.0;
  for (;;) {
    double worst = 0.0;
    for (double d = 0.0; d < 1.0; d += 0.125) worst = std::max(worst, std::abs(phi.bump->eval_real(x + d)));
    if (worst * x < 1e-15) return x;
    x *= 1.25;
    if (x > 1e6) throw ConvergenceError("rmt: test function does not decay");
  }
}

}  // namespace

ExpectedValueRoutes rmt_expected_value_routes(const TestFunction& phi, Group g) {
  const double phi0 = phi.bump->eval_real(0.0);
  const double hat0 = phi.bump->bump(0.0);
  ExpectedValueRoutes out;

  // xi space: W-hat = delta_0 + (terms supported on (-1, 1) or constant).
  const double inner = hat_mass(phi, 1.0);
  const double total = hat_mass(phi, phi.eta);
  switch (g) {
    case Group::u: out.xi_space = hat0; break;
    case Group::so_even: out.xi_space = hat0 + 0.5 * inner; break;
    case Group::so_odd: out.xi_space = hat0 - 0.5 * inner + total; break;
    case Group::o: out.xi_space = hat0 + 0.5 * total; break;
    case Group::sp: out.xi_space = hat0 - 0.5 * inner; break;
  }

  // x space: the smooth part integrated against phi, then the point mass.
  const double X = x_cutoff(phi);
  AdaptiveOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 0.0;
  opts.max_subdivisions = 200000;
  opts.initial_panels = static_cast<int>(4.0 * X * std::max(1.0, phi.eta)) + 16;
  const auto smooth = integrate_adaptive(
      [&](double x) { return phi.bump->eval_real(x) * rmt_density_eval(g, x).smooth; }, 0.0, X, opts);
  out.x_space = 2.0 * smooth.value + rmt_density_eval(g, 0.0).delta * phi0;
  return out;
}

double rmt_expected_value(const TestFunction& phi, Group g) {
  const auto r = rmt_expected_value_routes(phi, g);
  if (!(std::abs(r.x_space - r.xi_space) <= 1e-7)) {
    throw VerificationError("rmt_expected_value: x-space " + std::to_string(r.x_space) + " and xi-space " +
                            std::to_string(r.xi_space) + " routes disagree");
  }
  return r.x_space;
}

}  // namespace lowlying::rmt
