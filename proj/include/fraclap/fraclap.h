/* fraclap C interface. Every function returns a status code; on failure
 * fraclap_last_error() holds a one-line message for the calling thread. */
#ifndef FRACLAP_FRACLAP_H
#define FRACLAP_FRACLAP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FRACLAP_API __declspec(dllexport)
#else
#define FRACLAP_API __attribute__((visibility("default")))
#endif

typedef enum fraclap_status {
  FRACLAP_OK = 0,
  FRACLAP_E_VALIDATION = 1, /* argument outside its admissible set */
  FRACLAP_E_PARSE = 2,
  FRACLAP_E_DEGENERATE = 3, /* invalid mesh geometry */
  FRACLAP_E_QUADRATURE = 4,
  FRACLAP_E_SOLVER = 5,
  FRACLAP_E_IO = 6,
  FRACLAP_E_INTERNAL = 7,
  FRACLAP_E_NULL = 8 /* required pointer argument was NULL */
} fraclap_status;

typedef enum fraclap_weight { FRACLAP_PLAIN = 0, FRACLAP_LOG = 1 } fraclap_weight;

typedef struct fraclap_mesh fraclap_mesh;
/* A mesh, an order s, and the assembled plain, log and mass matrices. */
typedef struct fraclap_problem fraclap_problem;

FRACLAP_API const char* fraclap_version(void);
FRACLAP_API const char* fraclap_last_error(void);
/* Non-fatal note from the last call on this thread (empty if none). */
FRACLAP_API const char* fraclap_last_warning(void);
/* 0 restores the default (FRACLAP_THREADS, then hardware concurrency). */
FRACLAP_API void fraclap_set_threads(int threads);

FRACLAP_API fraclap_status fraclap_c_ns(int n, double s, double* out);
FRACLAP_API fraclap_status fraclap_dc_ns(int n, double s, double* out);
FRACLAP_API fraclap_status fraclap_psi_sigma(double r, double sigma, double* out);

/* spec: "interval:N[:a:b]", "square:N[:uniform]", "disc:N" or a mesh file path */
FRACLAP_API fraclap_status fraclap_mesh_create(const char* spec, fraclap_mesh** out);
FRACLAP_API void fraclap_mesh_free(fraclap_mesh* mesh);
FRACLAP_API fraclap_status fraclap_mesh_save(const fraclap_mesh* mesh, const char* path);
FRACLAP_API fraclap_status fraclap_mesh_info(const fraclap_mesh* mesh, int* dim, size_t* vertices, size_t* elements,
                                             double* diameter, double* measure);
FRACLAP_API fraclap_status fraclap_mesh_vertex(const fraclap_mesh* mesh, size_t v, double xy[2]);
/* 16 hex digits plus terminator */
FRACLAP_API fraclap_status fraclap_mesh_fingerprint(const fraclap_mesh* mesh, char out[17]);
FRACLAP_API fraclap_status fraclap_poincare_constant(const fraclap_mesh* mesh, double s, double* out);

/* Nodal interpolant of a named analytic function; out has one value per vertex. */
FRACLAP_API fraclap_status fraclap_interpolate(const fraclap_mesh* mesh, const char* function, double* out);

/* quad_tol <= 0 selects the dimension default. */
FRACLAP_API fraclap_status fraclap_problem_create(const fraclap_mesh* mesh, double s, double quad_tol,
                                                  fraclap_problem** out);
FRACLAP_API void fraclap_problem_free(fraclap_problem* problem);
FRACLAP_API fraclap_status fraclap_problem_entry(const fraclap_problem* problem, fraclap_weight w, size_t i, size_t j,
                                                 double* out);
/* Matrix Market, symmetric coordinate format. */
FRACLAP_API fraclap_status fraclap_problem_write_matrix(const fraclap_problem* problem, fraclap_weight w,
                                                        const char* path);

/* Zero-mean Poisson solve with nodal data f (length = vertices); u receives the solution.
 * Data with nonzero mean is projected and a warning is recorded. residual may be NULL. */
FRACLAP_API fraclap_status fraclap_solve(const fraclap_problem* problem, const double* f, double* u, double* residual);
/* Same with a named analytic function ("cospix", "bump", ...). */
FRACLAP_API fraclap_status fraclap_solve_named(const fraclap_problem* problem, const char* function, double* u,
                                               double* residual);
/* Derivative w of the solution in s for nodal data f. */
FRACLAP_API fraclap_status fraclap_solve_derivative(const fraclap_problem* problem, const double* f, double* w);

/* First k nontrivial eigenpairs. vectors: vertices x k, column-major, may be NULL.
 * cluster: k cluster ids starting at 1, may be NULL. gap_tol <= 0 selects 1e-6 lambda_1. */
FRACLAP_API fraclap_status fraclap_eig(const fraclap_problem* problem, int k, double gap_tol, double* values,
                                       double* vectors, int* cluster);
/* Right derivative of the first nontrivial eigenvalue; minimizer (length = vertices) may be NULL. */
FRACLAP_API fraclap_status fraclap_dlambda(const fraclap_problem* problem, double gap_tol, double* dplus,
                                           double* lambda1, int* multiplicity, double* minimizer);

/* Principal-value operator of a named function at xy (xy[1] ignored in 1D).
 * ball_radius <= 0 selects the default. */
FRACLAP_API fraclap_status fraclap_pv(const fraclap_mesh* mesh, const char* function, double s, const double* xy,
                                      double ball_radius, double* out);

/* Runs a JSON sweep config. output_dir overrides the config when not NULL. */
FRACLAP_API fraclap_status fraclap_sweep_run(const char* config_json, const char* output_dir, int* all_passed);
/* Runs the built-in property suite; *report receives the table (free with fraclap_string_free). */
FRACLAP_API fraclap_status fraclap_check_run(const char* output_dir, unsigned long long seed, char** report,
                                             int* all_passed);
FRACLAP_API void fraclap_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
