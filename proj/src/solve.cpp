#include "solve.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "util.hpp"

namespace fraclap {

ZeroMeanSystem::ZeroMeanSystem(const NonlocalMatrix& a, const MassMatrix& m)
    : n_(a.kernel.n), s_(a.kernel.s), c_(c_ns(a.kernel.n, a.kernel.s)), mesh_id_(a.mesh_id) {
  require(a.kernel.weight == Weight::Plain, "zero-mean system needs the plain-weight matrix");
  require(a.mat.rows() == m.mat.rows(), "stiffness and mass sizes differ");
  log_dc_ = dc_ns(n_, s_) / c_;
  k_ = 0.5 * c_ * a.mat;
  m_ = m.mat;
  m1_ = m_.rowwise().sum();
  const Eigen::Index n = k_.rows();
  Eigen::MatrixXd saddle = Eigen::MatrixXd::Zero(n + 1, n + 1);
  saddle.topLeftCorner(n, n) = k_;
  saddle.topRightCorner(n, 1) = m1_;
  saddle.bottomLeftCorner(1, n) = m1_.transpose();
  lu_.compute(saddle);
  const double pivot = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > 1e-14 * lu_.matrixLU().diagonal().cwiseAbs().maxCoeff()))
    fail(ErrorKind::Internal, "zero-mean system is singular; is the mesh connected?");
}

Eigen::VectorXd ZeroMeanSystem::solve(const Eigen::VectorXd& rhs) const {
  require(rhs.size() == k_.rows(), "right-hand side length differs from the system size");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(rhs.size() + 1);
  full.head(rhs.size()) = rhs;
  Eigen::VectorXd sol = lu_.solve(full);
  Eigen::VectorXd u = sol.head(rhs.size());
  // one step of refinement keeps the residual at the level of the matrix entries
  Eigen::VectorXd r = Eigen::VectorXd::Zero(rhs.size() + 1);
  r.head(rhs.size()) = rhs - k_ * u - sol[rhs.size()] * m1_;
  r[rhs.size()] = -m1_.dot(u);
  sol += lu_.solve(r);
  return sol.head(rhs.size());
}

double ZeroMeanSystem::residual(const Eigen::VectorXd& u, const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd r = rhs - k_ * u;
  r -= (r.dot(m1_) / m1_.squaredNorm()) * m1_;
  return r.cwiseAbs().maxCoeff();
}

PoissonResult poisson_solve(const ZeroMeanSystem& sys, const DiscreteFunction& f, const PoissonOptions& opts) {
  if (f.mesh()->fingerprint() != sys.mesh_id()) fail(ErrorKind::Validation, "data lives on a different mesh than the system");
  const Eigen::VectorXd& fc = f.coeffs();
  const double total = sys.mass_of_one().dot(fc);
  const double norm = std::sqrt(std::max(0.0, fc.dot(sys.mass() * fc)));
  const double measure = sys.mass_of_one().sum();
  PoissonResult out{f, total, 0.0, {}};
  Eigen::VectorXd g = fc;
  if (std::abs(total) > opts.mean_tol * std::max(norm, 1e-300) && norm > 0.0) {
    std::ostringstream os;
    os << "data has nonzero mean: integral " << format_double(total) << " (relative " << format_double(total / norm) << ")";
    if (opts.strict) fail(ErrorKind::Validation, os.str());
    out.warning = os.str() + "; projected onto zero mean";
  }
  g.array() -= total / measure;
  const Eigen::VectorXd rhs = sys.mass() * g;
  Eigen::VectorXd u = sys.solve(rhs);
  out.residual = sys.residual(u, rhs);
  out.u = DiscreteFunction(f.mesh(), std::move(u));
  out.u.certify_zero_mean();
  return out;
}

namespace {

// Orthonormal basis (columns) of the Euclidean complement of m.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& m) {
  const Eigen::Index n = m.size();
  Eigen::VectorXd w = m / m.norm();
  w[0] += w[0] >= 0 ? 1.0 : -1.0;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - (2.0 / w.squaredNorm()) * w * w.transpose();
  return h.rightCols(n - 1);
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v, const Eigen::VectorXd& mref) {
  const double proj = v.dot(mref);
  const double scale = v.cwiseAbs().maxCoeff();
  if (std::abs(proj) > 1e-10 * scale * mref.cwiseAbs().sum()) {
    if (proj < 0) v = -v;
    return;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0) v = -v;
      return;
    }
}

}  // namespace

Spectrum eig(const ZeroMeanSystem& sys, const Mesh& mesh, int k, double gap_tol) {
  const Eigen::Index n = sys.stiffness().rows();
  require(k >= 1 && k <= n - 1, "eigenvalue count k must satisfy 1 <= k <= vertices - 1");
  const Eigen::MatrixXd q = complement_basis(sys.mass_of_one());
  const Eigen::MatrixXd kr = q.transpose() * sys.stiffness() * q;
  const Eigen::MatrixXd mr = q.transpose() * sys.mass() * q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(kr, mr);
  if (solver.info() != Eigen::Success) fail(ErrorKind::Solver, "generalized eigensolver did not converge");

  Spectrum sp;
  const Eigen::VectorXd& lam = solver.eigenvalues();
  sp.all_eigenvalues.assign(lam.data(), lam.data() + lam.size());
  sp.all_eigenvectors = q * solver.eigenvectors();

  // reference direction: first coordinate with its mean removed
  require(static_cast<Eigen::Index>(mesh.num_vertices()) == n, "mesh differs from the system");
  Eigen::VectorXd ref(n);
  for (Eigen::Index v = 0; v < n; ++v) ref[v] = mesh.point(v)[0];
  ref.array() -= sys.mass_of_one().dot(ref) / sys.mass_of_one().sum();
  const Eigen::VectorXd mref = sys.mass() * ref;
  for (Eigen::Index j = 0; j < sp.all_eigenvectors.cols(); ++j) fix_sign(sp.all_eigenvectors.col(j), mref);
  sp.gap_tol = gap_tol > 0.0 ? gap_tol : 1e-6 * std::abs(lam[0]);
  sp.eigenvalues.assign(lam.data(), lam.data() + k);
  sp.eigenvectors = sp.all_eigenvectors.leftCols(k);

  for (int i = 0; i < k; ++i) {
    if (!(lam[i] > 0.0)) fail(ErrorKind::Solver, "nonpositive eigenvalue " + format_double(lam[i]) + " on the zero-mean subspace");
    const Eigen::VectorXd v = sp.eigenvectors.col(i);
    const Eigen::VectorXd kv = sys.stiffness() * v;
    Eigen::VectorXd r = kv - lam[i] * (sys.mass() * v);
    r -= (r.dot(sys.mass_of_one()) / sys.mass_of_one().squaredNorm()) * sys.mass_of_one();
    sp.residuals.push_back(r.norm() / kv.norm());
  }
  for (int i = 0; i < k; ++i) {
    if (i == 0 || lam[i] - lam[i - 1] > sp.gap_tol)
      sp.clusters.push_back({i});
    else
      sp.clusters.back().push_back(i);
  }
  return sp;
}

std::vector<int> first_cluster(const Spectrum& sp) {
  std::vector<int> idx = {0};
  for (std::size_t i = 1; i < sp.all_eigenvalues.size(); ++i) {
    if (sp.all_eigenvalues[i] - sp.all_eigenvalues[i - 1] > sp.gap_tol) break;
    idx.push_back(static_cast<int>(i));
  }
  return idx;
}

PoissonDerivative s_derivative_solve(const ZeroMeanSystem& sys, const DiscreteFunction& f, const DiscreteFunction& u,
                                     const NonlocalMatrix& log_form) {
  require(log_form.kernel.weight == Weight::Log, "derivative solve needs the log-weight matrix");
  require(log_form.kernel.s.value() == sys.order().value(), "log-weight matrix is at a different order");
  require(log_form.mesh_id == sys.mesh_id() && u.mesh()->fingerprint() == sys.mesh_id(),
          "mesh fingerprints differ");
  Eigen::VectorXd g = f.coeffs();
  g.array() -= sys.mass_of_one().dot(g) / sys.mass_of_one().sum();
  const Eigen::VectorXd rhs = -sys.log_dc() * (sys.mass() * g) + sys.c() * (log_form.mat * u.coeffs());
  Eigen::VectorXd w = sys.solve(rhs);
  const double res = sys.residual(w, rhs);
  DiscreteFunction wf(u.mesh(), std::move(w));
  wf.certify_zero_mean();
  return {std::move(wf), res};
}

double j_s(const ZeroMeanSystem& sys, const Eigen::VectorXd& u, double lambda, const NonlocalMatrix& log_form) {
  require(log_form.kernel.weight == Weight::Log, "J_s needs the log-weight matrix");
  const double norm = u.dot(sys.mass() * u);
  if (std::abs(norm - 1.0) > 1e-8) fail(ErrorKind::Validation, "J_s needs an L2-normalised function (u^T M u = " + format_double(norm) + ")");
  return sys.log_dc() * lambda - sys.c() * u.dot(log_form.mat * u);
}

EigenDerivative dlambda_plus(const ZeroMeanSystem& sys, const Spectrum& sp, const NonlocalMatrix& log_form) {
  require(log_form.kernel.weight == Weight::Log, "derivative needs the log-weight matrix");
  const auto idx = first_cluster(sp);
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd v(sp.all_eigenvectors.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) v.col(j) = sp.all_eigenvectors.col(idx[j]);
  const Eigen::MatrixXd b = v.transpose() * log_form.mat * v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (b + b.transpose()));
  EigenDerivative out;
  out.lambda1 = sp.all_eigenvalues[0];
  out.multiplicity = static_cast<int>(m);
  out.gap_tol = sp.gap_tol;
  for (int i : idx) out.cluster.push_back(sp.all_eigenvalues[i]);
  const double top = small.eigenvalues()[m - 1];
  out.minimizer = v * small.eigenvectors().col(m - 1);
  out.dplus = sys.log_dc() * out.lambda1 - sys.c() * top;
  return out;
}

std::shared_ptr<const Discretization> Discretization::build(MeshPtr mesh, FractionalOrder s, const AssemblyOptions& opts) {
  require(mesh != nullptr, "discretization needs a mesh");
  auto d = std::make_shared<Discretization>(Discretization{mesh, s, assemble_both(*mesh, s, opts), mass(*mesh), nullptr});
  d->system = std::make_unique<ZeroMeanSystem>(d->forms.plain, d->m);
  return d;
}

}  // namespace fraclap
