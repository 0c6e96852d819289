#pragma once

// Benchmark problem definitions: globally linear patch data and the L-shaped
// domain with its corner-singular harmonic solution.

#include <cmath>
#include <stdexcept>

#include "polyref/vem.hpp"

namespace polyref {

struct CornerSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// u = a x + b y + c with f = 0; reproduced exactly by the k=1 discretization.
inline PoissonProblem linear_patch_problem(double a, double b, double c) {
  PoissonProblem p;
  p.diffusion = 1.0;
  p.dirichlet = [=](Point2 q) { return a * q.x + b * q.y + c; };
  p.exact_gradient = [=](Point2) { return Point2{a, b}; };
  return p;
}

// Polar angle measured so the two re-entrant faces of (-1,1)^2 \ (-1,0)^2
// sit at theta = -pi/2 (negative y-axis) and theta = pi (negative x-axis).
inline double lshape_angle(Point2 p) {
  double theta = std::atan2(p.y, p.x);
  if (theta < -M_PI_2 - 1e-12) theta += 2.0 * M_PI;
  return theta;
}

inline double lshape_exact_solution(Point2 p) {
  const double r = norm(p);
  if (r == 0.0) return 0.0;
  const double theta = lshape_angle(p);
  return std::pow(r, 2.0 / 3.0) * std::sin((2.0 / 3.0) * (theta + M_PI_2));
}

inline Point2 lshape_exact_gradient(Point2 p) {
  const double r = norm(p);
  if (r < 1e-14) throw CornerSingularity("gradient requested at the re-entrant corner");
  const double theta = lshape_angle(p);
  const double arg = (2.0 / 3.0) * (theta + M_PI_2);
  const double s = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0);
  const double ur = s * std::sin(arg);   // du/dr
  const double ut = s * std::cos(arg);   // (1/r) du/dtheta
  const double ct = std::cos(theta), st = std::sin(theta);
  return {ur * ct - ut * st, ur * st + ut * ct};
}

// Laplace problem on the L-shaped domain: f = 0, Dirichlet data from the
// exact solution (homogeneous on the two re-entrant faces).
inline PoissonProblem lshape_problem() {
  PoissonProblem p;
  p.diffusion = 1.0;
  p.dirichlet = lshape_exact_solution;
  p.exact_gradient = lshape_exact_gradient;
  p.singular_point = Point2{0.0, 0.0};
  return p;
}

}  // namespace polyref
