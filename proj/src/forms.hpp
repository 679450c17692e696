#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>

#include "functions.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace fraclap {

/// Raw double integral
///   sum over element pairs of int int (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) k(x,y)
/// with no normalisation constant. E_s(u,v) = (C_{N,s}/2) u^T A_s v.
struct NonlocalMatrix {
  KernelSpec kernel;
  Eigen::MatrixXd mat;
  double quad_tol = 0.0;
  std::uint64_t mesh_id = 0;
};

struct MassMatrix {
  Eigen::MatrixXd mat;
  bool lumped = false;
};

struct AssemblyOptions {
  QuadratureOptions quad;
  int threads = 0;  // 0: resolve from the environment
};

AssemblyOptions default_assembly(int dim);

NonlocalMatrix assemble(const Mesh& mesh, const KernelSpec& kernel, const AssemblyOptions& opts);

/// Plain and log matrices at the same order from one pass over the element pairs.
struct FormPair {
  NonlocalMatrix plain;
  NonlocalMatrix log;
};
FormPair assemble_both(const Mesh& mesh, FractionalOrder s, const AssemblyOptions& opts);

MassMatrix mass(const Mesh& mesh, bool lumped = false);

/// (C_{N,s}/2) u^T A v; A must be a plain-weight matrix on the functions' mesh.
double energy(const DiscreteFunction& u, const DiscreteFunction& v, const NonlocalMatrix& a);

/// Gagliardo seminorm sqrt(u^T A_t u). Matrices are cached per (mesh, t).
double seminorm(const DiscreteFunction& u, FractionalOrder t, const AssemblyOptions& opts);
void clear_seminorm_cache();

/// Pointwise principal-value operator C_{N,s} P.V. int_Omega (phi(x)-phi(y)) |x-y|^{-N-2s} dy,
/// with the gradient-corrected integrand on the ball of the given radius.
/// Default radius: half the distance to the boundary, capped at the largest element diameter.
double pv_apply(const AnalyticFunction& phi, const Point& x, FractionalOrder s, const Mesh& mesh,
                std::optional<double> ball_radius = std::nullopt);

/// Matrix Market coordinate/real/symmetric, lower triangle, with a provenance comment.
std::string matrix_market(const NonlocalMatrix& m);

}  // namespace fraclap
