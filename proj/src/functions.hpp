#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace fraclap {

/// Smooth test function with its gradient, evaluated in physical coordinates.
struct AnalyticFunction {
  std::string name;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
};

/// Registry lookup; throws Validation for an unknown name.
AnalyticFunction analytic_function(const std::string& name, int dim);
std::vector<std::string> analytic_function_names();

Eigen::VectorXd interpolate(const Mesh& mesh, const AnalyticFunction& f);

}  // namespace fraclap
