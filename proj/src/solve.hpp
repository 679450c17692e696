#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "forms.hpp"
#include "mesh.hpp"

namespace fraclap {

/// Stiffness K = (C_{N,s}/2) A_s restricted to zero-mean functions by one Lagrange
/// multiplier on 1^T M u = 0. Factorised once; solve() may be called concurrently.
class ZeroMeanSystem {
 public:
  ZeroMeanSystem(const NonlocalMatrix& a, const MassMatrix& m);

  /// Solves K u + mu M1 = rhs, 1^T M u = 0.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Largest entry of the residual rhs - K u after removing its M1 component,
  /// i.e. the residual seen by zero-mean test vectors.
  double residual(const Eigen::VectorXd& u, const Eigen::VectorXd& rhs) const;

  const Eigen::MatrixXd& stiffness() const { return k_; }
  const Eigen::MatrixXd& mass() const { return m_; }
  const Eigen::VectorXd& mass_of_one() const { return m1_; }
  FractionalOrder order() const { return s_; }
  Dimension dimension() const { return n_; }
  double c() const { return c_; }
  /// (d/ds C_{N,s}) / C_{N,s}
  double log_dc() const { return log_dc_; }
  std::uint64_t mesh_id() const { return mesh_id_; }

 private:
  Dimension n_;
  FractionalOrder s_;
  double c_, log_dc_;
  std::uint64_t mesh_id_;
  Eigen::MatrixXd k_, m_;
  Eigen::VectorXd m1_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct PoissonOptions {
  /// Relative mean (|int f| / ||f||_{L2}) above which the projection is reported.
  double mean_tol = 1e-10;
  /// Reject instead of projecting when the mean exceeds mean_tol.
  bool strict = false;
};

struct PoissonResult {
  DiscreteFunction u;
  double projected_mass = 0.0;  // int f removed before solving
  double residual = 0.0;
  std::string warning;
};

PoissonResult poisson_solve(const ZeroMeanSystem& sys, const DiscreteFunction& f, const PoissonOptions& opts = {});

struct Spectrum {
  std::vector<double> eigenvalues;   // ascending, first k
  Eigen::MatrixXd eigenvectors;      // columns, M-orthonormal, zero mean
  std::vector<std::vector<int>> clusters;  // index groups among the first k
  std::vector<double> residuals;     // relative, on the zero-mean subspace
  double gap_tol = 0.0;
  std::vector<double> all_eigenvalues;  // full nontrivial spectrum
  Eigen::MatrixXd all_eigenvectors;
};

/// gap_tol <= 0 selects 1e-6 * lambda_1. Eigenvector signs follow the first coordinate.
Spectrum eig(const ZeroMeanSystem& sys, const Mesh& mesh, int k, double gap_tol = 0.0);

/// Index set of the cluster containing the first eigenvalue, taken from the full spectrum.
std::vector<int> first_cluster(const Spectrum& sp);

struct PoissonDerivative {
  DiscreteFunction w;
  double residual = 0.0;
};

/// Solves (C/2) A w = -(C'/C) M f + C L u for the zero-mean w.
PoissonDerivative s_derivative_solve(const ZeroMeanSystem& sys, const DiscreteFunction& f, const DiscreteFunction& u,
                                     const NonlocalMatrix& log_form);

/// J_s(u) = (C'/C) lambda - C u^T L u for M-normalised zero-mean u.
double j_s(const ZeroMeanSystem& sys, const Eigen::VectorXd& u, double lambda, const NonlocalMatrix& log_form);

struct EigenDerivative {
  double dplus = 0.0;
  double lambda1 = 0.0;
  int multiplicity = 1;
  double gap_tol = 0.0;
  Eigen::VectorXd minimizer;  // M-normalised eigenfunction attaining the infimum of J_s
  std::vector<double> cluster;  // eigenvalues in the first cluster
};

/// Right derivative of the first nontrivial eigenvalue:
/// (C'/C) lambda_1 - C lambda_max(V^T L V) over an M-orthonormal cluster basis V.
EigenDerivative dlambda_plus(const ZeroMeanSystem& sys, const Spectrum& sp, const NonlocalMatrix& log_form);

/// Everything needed at one order s on one mesh.
struct Discretization {
  MeshPtr mesh;
  FractionalOrder s;
  FormPair forms;
  MassMatrix m;
  std::unique_ptr<ZeroMeanSystem> system;

  static std::shared_ptr<const Discretization> build(MeshPtr mesh, FractionalOrder s, const AssemblyOptions& opts);
};

}  // namespace fraclap
