#include <fraclap/fraclap.h>

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "checks.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "functions.hpp"
#include "parallel.hpp"
#include "solve.hpp"
#include "sweep.hpp"
#include "util.hpp"

struct fraclap_mesh {
  fraclap::MeshPtr mesh;
};

struct fraclap_problem {
  std::shared_ptr<const fraclap::Discretization> d;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_warning;

fraclap_status code(fraclap::ErrorKind k) {
  using fraclap::ErrorKind;
  switch (k) {
    case ErrorKind::Validation: return FRACLAP_E_VALIDATION;
    case ErrorKind::Parse: return FRACLAP_E_PARSE;
    case ErrorKind::Degenerate: return FRACLAP_E_DEGENERATE;
    case ErrorKind::Quadrature: return FRACLAP_E_QUADRATURE;
    case ErrorKind::Solver: return FRACLAP_E_SOLVER;
    case ErrorKind::Io: return FRACLAP_E_IO;
    case ErrorKind::Internal: return FRACLAP_E_INTERNAL;
  }
  return FRACLAP_E_INTERNAL;
}

template <class F>
fraclap_status guarded(F&& body) {
  g_error.clear();
  g_warning.clear();
  try {
    body();
    return FRACLAP_OK;
  } catch (const fraclap::Error& e) {
    g_error = e.what();
    return code(e.kind());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
  } catch (const std::exception& e) {
    g_error = e.what();
  } catch (...) {
    g_error = "unknown failure";
  }
  return FRACLAP_E_INTERNAL;
}

#define NEED(p)                                    \
  do {                                             \
    if (!(p)) {                                    \
      g_error = "argument '" #p "' must not be NULL"; \
      return FRACLAP_E_NULL;                       \
    }                                              \
  } while (0)

Eigen::VectorXd nodal(const fraclap_problem* p, const double* f) {
  return Eigen::Map<const Eigen::VectorXd>(f, static_cast<Eigen::Index>(p->d->mesh->num_vertices()));
}

void solve_into(const fraclap_problem* p, Eigen::VectorXd f, double* u, double* residual) {
  const auto r = fraclap::poisson_solve(*p->d->system, fraclap::DiscreteFunction(p->d->mesh, std::move(f)));
  g_warning = r.warning;
  std::copy(r.u.coeffs().data(), r.u.coeffs().data() + r.u.coeffs().size(), u);
  if (residual) *residual = r.residual;
}

}  // namespace

extern "C" {

const char* fraclap_version(void) { return "0.3.0"; }
const char* fraclap_last_error(void) { return g_error.c_str(); }
const char* fraclap_last_warning(void) { return g_warning.c_str(); }
void fraclap_set_threads(int threads) { fraclap::set_default_threads(threads); }

fraclap_status fraclap_c_ns(int n, double s, double* out) {
  NEED(out);
  return guarded([&] { *out = fraclap::c_ns(fraclap::Dimension(n), fraclap::FractionalOrder(s)); });
}

fraclap_status fraclap_dc_ns(int n, double s, double* out) {
  NEED(out);
  return guarded([&] { *out = fraclap::dc_ns(fraclap::Dimension(n), fraclap::FractionalOrder(s)); });
}

fraclap_status fraclap_psi_sigma(double r, double sigma, double* out) {
  NEED(out);
  return guarded([&] { *out = fraclap::psi_sigma(r, sigma); });
}

fraclap_status fraclap_mesh_create(const char* spec, fraclap_mesh** out) {
  NEED(spec);
  NEED(out);
  *out = nullptr;
  return guarded([&] { *out = new fraclap_mesh{fraclap::mesh_from_spec(spec)}; });
}

void fraclap_mesh_free(fraclap_mesh* mesh) { delete mesh; }

fraclap_status fraclap_mesh_save(const fraclap_mesh* mesh, const char* path) {
  NEED(mesh);
  NEED(path);
  return guarded([&] { fraclap::save_mesh(*mesh->mesh, path); });
}

fraclap_status fraclap_mesh_info(const fraclap_mesh* mesh, int* dim, size_t* vertices, size_t* elements, double* diameter,
                                 double* measure) {
  NEED(mesh);
  return guarded([&] {
    const auto& m = *mesh->mesh;
    if (dim) *dim = m.dim();
    if (vertices) *vertices = m.num_vertices();
    if (elements) *elements = m.num_elements();
    if (diameter) *diameter = m.diameter();
    if (measure) *measure = m.measure();
  });
}

fraclap_status fraclap_mesh_vertex(const fraclap_mesh* mesh, size_t v, double xy[2]) {
  NEED(mesh);
  NEED(xy);
  return guarded([&] {
    fraclap::require(v < mesh->mesh->num_vertices(), "vertex index out of range");
    const auto p = mesh->mesh->point(v);
    xy[0] = p[0];
    xy[1] = p[1];
  });
}

fraclap_status fraclap_mesh_fingerprint(const fraclap_mesh* mesh, char out[17]) {
  NEED(mesh);
  NEED(out);
  return guarded([&] { std::memcpy(out, mesh->mesh->fingerprint_hex().c_str(), 17); });
}

fraclap_status fraclap_poincare_constant(const fraclap_mesh* mesh, double s, double* out) {
  NEED(mesh);
  NEED(out);
  return guarded([&] { *out = fraclap::poincare_constant(*mesh->mesh, fraclap::FractionalOrder(s)); });
}

fraclap_status fraclap_interpolate(const fraclap_mesh* mesh, const char* function, double* out) {
  NEED(mesh);
  NEED(function);
  NEED(out);
  return guarded([&] {
    const auto v = fraclap::interpolate(*mesh->mesh, fraclap::analytic_function(function, mesh->mesh->dim()));
    std::copy(v.data(), v.data() + v.size(), out);
  });
}

fraclap_status fraclap_problem_create(const fraclap_mesh* mesh, double s, double quad_tol, fraclap_problem** out) {
  NEED(mesh);
  NEED(out);
  *out = nullptr;
  return guarded([&] {
    auto opts = fraclap::default_assembly(mesh->mesh->dim());
    if (quad_tol > 0.0) opts.quad.tol = quad_tol;
    *out = new fraclap_problem{fraclap::Discretization::build(mesh->mesh, fraclap::FractionalOrder(s), opts)};
  });
}

void fraclap_problem_free(fraclap_problem* problem) { delete problem; }

fraclap_status fraclap_problem_entry(const fraclap_problem* problem, fraclap_weight w, size_t i, size_t j, double* out) {
  NEED(problem);
  NEED(out);
  return guarded([&] {
    const auto& m = (w == FRACLAP_LOG ? problem->d->forms.log : problem->d->forms.plain).mat;
    fraclap::require(i < static_cast<size_t>(m.rows()) && j < static_cast<size_t>(m.cols()), "matrix index out of range");
    *out = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  });
}

fraclap_status fraclap_problem_write_matrix(const fraclap_problem* problem, fraclap_weight w, const char* path) {
  NEED(problem);
  NEED(path);
  return guarded([&] {
    fraclap::write_file_atomic(path, fraclap::matrix_market(w == FRACLAP_LOG ? problem->d->forms.log : problem->d->forms.plain));
  });
}

fraclap_status fraclap_solve(const fraclap_problem* problem, const double* f, double* u, double* residual) {
  NEED(problem);
  NEED(f);
  NEED(u);
  return guarded([&] { solve_into(problem, nodal(problem, f), u, residual); });
}

fraclap_status fraclap_solve_named(const fraclap_problem* problem, const char* function, double* u, double* residual) {
  NEED(problem);
  NEED(function);
  NEED(u);
  return guarded([&] {
    const auto& mesh = *problem->d->mesh;
    solve_into(problem, fraclap::interpolate(mesh, fraclap::analytic_function(function, mesh.dim())), u, residual);
  });
}

fraclap_status fraclap_solve_derivative(const fraclap_problem* problem, const double* f, double* w) {
  NEED(problem);
  NEED(f);
  NEED(w);
  return guarded([&] {
    const auto& d = *problem->d;
    const fraclap::DiscreteFunction data(d.mesh, nodal(problem, f));
    const auto u = fraclap::poisson_solve(*d.system, data);
    g_warning = u.warning;
    const auto r = fraclap::s_derivative_solve(*d.system, data, u.u, d.forms.log);
    std::copy(r.w.coeffs().data(), r.w.coeffs().data() + r.w.coeffs().size(), w);
  });
}

fraclap_status fraclap_eig(const fraclap_problem* problem, int k, double gap_tol, double* values, double* vectors,
                           int* cluster) {
  NEED(problem);
  NEED(values);
  return guarded([&] {
    const auto sp = fraclap::eig(*problem->d->system, *problem->d->mesh, k, gap_tol);
    for (int i = 0; i < k; ++i) values[i] = sp.eigenvalues[i];
    if (vectors) Eigen::Map<Eigen::MatrixXd>(vectors, sp.eigenvectors.rows(), k) = sp.eigenvectors;
    if (cluster)
      for (std::size_t c = 0; c < sp.clusters.size(); ++c)
        for (int i : sp.clusters[c]) cluster[i] = static_cast<int>(c) + 1;
  });
}

fraclap_status fraclap_dlambda(const fraclap_problem* problem, double gap_tol, double* dplus, double* lambda1,
                               int* multiplicity, double* minimizer) {
  NEED(problem);
  NEED(dplus);
  return guarded([&] {
    const auto& d = *problem->d;
    const auto sp = fraclap::eig(*d.system, *d.mesh, 1, gap_tol);
    const auto r = fraclap::dlambda_plus(*d.system, sp, d.forms.log);
    *dplus = r.dplus;
    if (lambda1) *lambda1 = r.lambda1;
    if (multiplicity) *multiplicity = r.multiplicity;
    if (minimizer) std::copy(r.minimizer.data(), r.minimizer.data() + r.minimizer.size(), minimizer);
  });
}

fraclap_status fraclap_pv(const fraclap_mesh* mesh, const char* function, double s, const double* xy, double ball_radius,
                          double* out) {
  NEED(mesh);
  NEED(function);
  NEED(xy);
  NEED(out);
  return guarded([&] {
    const auto& m = *mesh->mesh;
    const fraclap::Point x{xy[0], m.dim() == 2 ? xy[1] : 0.0};
    std::optional<double> r;
    if (ball_radius > 0.0) r = ball_radius;
    *out = fraclap::pv_apply(fraclap::analytic_function(function, m.dim()), x, fraclap::FractionalOrder(s), m, r);
  });
}

fraclap_status fraclap_sweep_run(const char* config_json, const char* output_dir, int* all_passed) {
  NEED(config_json);
  return guarded([&] {
    auto cfg = fraclap::parse_sweep_config(config_json);
    if (output_dir) cfg.output_dir = output_dir;
    const auto r = fraclap::run_sweep(cfg);
    if (all_passed) *all_passed = r.all_passed();
  });
}

fraclap_status fraclap_check_run(const char* output_dir, unsigned long long seed, char** report, int* all_passed) {
  NEED(output_dir);
  return guarded([&] {
    const auto r = fraclap::run_check_suite(output_dir, seed);
    if (all_passed) *all_passed = r.all_passed();
    if (report) {
      const std::string text = r.table();
      *report = static_cast<char*>(std::malloc(text.size() + 1));
      if (!*report) throw std::bad_alloc();
      std::memcpy(*report, text.c_str(), text.size() + 1);
    }
  });
}

void fraclap_string_free(char* s) { std::free(s); }

}  // extern "C"
