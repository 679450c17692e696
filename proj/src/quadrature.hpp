#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "specfun.hpp"

namespace fraclap {

enum class Weight { Plain, Log };

/// Which singular kernel a matrix discretises:
/// Plain: |x-y|^{-(N+2s)},  Log: |x-y|^{-(N+2s)} ln|x-y|.
struct KernelSpec {
  Dimension n;
  FractionalOrder s;
  Weight weight;

  std::string describe() const;
};

enum class PairClass { Identical, Adjacent, Disjoint };

const char* to_string(PairClass c);
const char* to_string(Weight w);

/// Identical iff same element; Adjacent iff at least one shared vertex.
PairClass classify_pair(const Mesh& mesh, std::size_t a, std::size_t b);

struct QuadratureOptions {
  double tol = 1e-9;
  /// Gauss points per parameter direction on the regularised singular (2D) pairs.
  int singular_order = 8;
  int max_depth = 24;
  /// Testing hook: integrate with this strategy instead of the classified one.
  std::optional<PairClass> force;
};

double default_tolerance(int dim);
QuadratureOptions default_options(int dim);

/// Contribution of the ordered element pair (A,B) to
///   int_A int_B (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) k(x,y) dy dx
/// for every vertex i,j of A and B, for the plain and the log weight.
struct PairMatrices {
  int count = 0;                   // number of distinct vertices of A and B
  std::array<int, 6> vertices{};   // global indices
  std::array<double, 36> plain{};  // count x count, row-major
  std::array<double, 36> log{};
  double error_estimate = 0.0;

  double at(Weight w, int i, int j) const { return (w == Weight::Plain ? plain : log)[i * count + j]; }
};

PairMatrices pair_matrices(const Mesh& mesh, std::size_t a, std::size_t b, FractionalOrder s,
                           const QuadratureOptions& opts);

/// Single entry (global basis indices i,j) of the pair contribution; zero when
/// neither element carries the basis function.
double pair_integral(const Mesh& mesh, std::size_t a, std::size_t b, int i, int j, const KernelSpec& kernel,
                     const QuadratureOptions& opts);

namespace quad {

struct Rule {
  std::vector<double> x;  // nodes on [0,1]
  std::vector<double> w;
};

/// Gauss-Legendre rule with q points mapped to [0,1].
const Rule& gauss_legendre(int q);

/// int_A^B r^beta dr and int_A^B r^beta ln r dr for 0 <= A < B (A = 0 needs beta > -1).
double power_integral(double a, double b, double beta);
double power_log_integral(double a, double b, double beta);

}  // namespace quad

}  // namespace fraclap
