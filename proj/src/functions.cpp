#include "functions.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace fraclap {
namespace {

constexpr double pi = std::numbers::pi;

// Compactly supported C-infinity bump of radius 1/4 around the centre of the unit cell.
AnalyticFunction bump(int dim) {
  const double radius = 0.25;
  auto offset = [dim](const Point& p) { return Point{p[0] - 0.5, dim == 2 ? p[1] - 0.5 : 0.0}; };
  auto value = [=](const Point& p) {
    const Point d = offset(p);
    const double q = (d[0] * d[0] + d[1] * d[1]) / (radius * radius);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
  };
  auto gradient = [=](const Point& p) {
    const Point d = offset(p);
    const double q = (d[0] * d[0] + d[1] * d[1]) / (radius * radius);
    if (q >= 1.0) return Point{0.0, 0.0};
    const double w = 1.0 - q;
    const double scale = -std::exp(-1.0 / w) / (w * w) * 2.0 / (radius * radius);
    return Point{scale * d[0], scale * d[1]};
  };
  return {"bump", value, gradient};
}

}  // namespace

std::vector<std::string> analytic_function_names() {
  return {"zero", "one", "linear", "quadratic", "cospix", "sinpix", "legendre2", "bump"};
}

AnalyticFunction analytic_function(const std::string& name, int dim) {
  require(dim == 1 || dim == 2, "analytic functions are defined for dimension 1 or 2");
  if (name == "zero") return {name, [](const Point&) { return 0.0; }, [](const Point&) { return Point{0.0, 0.0}; }};
  if (name == "one") return {name, [](const Point&) { return 1.0; }, [](const Point&) { return Point{0.0, 0.0}; }};
  if (name == "linear") return {name, [](const Point& p) { return p[0]; }, [](const Point&) { return Point{1.0, 0.0}; }};
  if (name == "quadratic") {
    if (dim == 1)
      return {name, [](const Point& p) { return p[0] * (1.0 - p[0]); }, [](const Point& p) { return Point{1.0 - 2.0 * p[0], 0.0}; }};
    return {name, [](const Point& p) { return p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]); },
            [](const Point& p) {
              return Point{(1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]), p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1])};
            }};
  }
  if (name == "cospix")
    return {name, [](const Point& p) { return std::cos(pi * p[0]); }, [](const Point& p) { return Point{-pi * std::sin(pi * p[0]), 0.0}; }};
  if (name == "sinpix")
    return {name, [](const Point& p) { return std::sin(pi * p[0]); }, [](const Point& p) { return Point{pi * std::cos(pi * p[0]), 0.0}; }};
  if (name == "legendre2") {
    // P2(2x-1), plus P2(2y-1) in 2D: zero mean on the unit interval and square
    auto p2 = [](double t) { const double u = 2.0 * t - 1.0; return 0.5 * (3.0 * u * u - 1.0); };
    auto dp2 = [](double t) { return 6.0 * (2.0 * t - 1.0); };
    if (dim == 1) return {name, [=](const Point& p) { return p2(p[0]); }, [=](const Point& p) { return Point{dp2(p[0]), 0.0}; }};
    return {name, [=](const Point& p) { return p2(p[0]) + p2(p[1]); }, [=](const Point& p) { return Point{dp2(p[0]), dp2(p[1])}; }};
  }
  if (name == "bump") return bump(dim);
  std::string known;
  for (const auto& n : analytic_function_names()) known += (known.empty() ? "" : ", ") + n;
  fail(ErrorKind::Validation, "unknown function '" + name + "' (known: " + known + ")");
}

Eigen::VectorXd interpolate(const Mesh& mesh, const AnalyticFunction& f) {
  Eigen::VectorXd out(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) out[v] = f.value(mesh.point(v));
  return out;
}

}  // namespace fraclap
