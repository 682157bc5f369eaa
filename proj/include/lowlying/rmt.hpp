#pragma once

// One-level densities W_G of the classical symmetry types, admissible test
// functions phi with compactly supported Fourier transform, and the predicted
// value int phi(x) W_G(x) dx.

#include <memory>
#include <string>

#include "lowlying/bump.hpp"

namespace lowlying::rmt {

enum class Group { so_even, so_odd, o, u, sp };

/// Accepts so-even, so-odd, o, u, sp. Throws DomainError otherwise.
Group parse_group(const std::string& name);
std::string group_name(Group g);

struct TestFunction {
  double eta = 1.0;  // Fourier support is (-eta, eta)
  int quadrature_nodes = 0;
  std::shared_ptr<const BumpTransform> bump;  // phi-hat = bump, normalized to phi-hat(0) = 1
};

/// phi-hat(xi) = exp(1/eta^2 - 1/(eta^2 - xi^2)) on (-eta, eta); 0 < eta <= 4.
TestFunction make_test_function(double eta);

enum class Space { x_space, xi_space };

/// phi(t) (x_space) or phi-hat(t) (xi_space).
double test_function_eval(const TestFunction& phi, Space which, double t);

struct DensityValue {
  double smooth = 0.0;
  double delta = 0.0;  // mass of the point mass at x = 0
};

/// Sine kernel K(y) = sin(pi y)/(pi y).
double sine_kernel(double y);

DensityValue rmt_density_eval(Group g, double x);

struct ExpectedValueRoutes {
  double x_space = 0.0;   // quadrature of phi against the smooth part plus delta * phi(0)
  double xi_space = 0.0;  // phi-hat against the closed-form transform of W
};

ExpectedValueRoutes rmt_expected_value_routes(const TestFunction& phi, Group g);

/// The x-space value, after checking the two routes agree to 1e-7
/// (VerificationError otherwise).
double rmt_expected_value(const TestFunction& phi, Group g);

}  // namespace lowlying::rmt
