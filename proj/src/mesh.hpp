#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specfun.hpp"

namespace fraclap {

using Point = std::array<double, 2>;  // 1D meshes leave the second coordinate at zero

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Simplicial partition of a bounded interval (dim 1) or polygon (dim 2).
/// Immutable once built; every constructor path runs the same validation.
class Mesh {
 public:
  /// coords: dim values per vertex. elements: dim+1 vertex indices per element.
  /// Triangles are reoriented counter-clockwise.
  static MeshPtr create(int dim, std::vector<double> coords, std::vector<int> elements);

  int dim() const noexcept { return dim_; }
  std::size_t num_vertices() const noexcept { return coords_.size() / dim_; }
  std::size_t num_elements() const noexcept { return elements_.size() / (dim_ + 1); }
  int vertices_per_element() const noexcept { return dim_ + 1; }

  Point point(std::size_t v) const noexcept {
    return dim_ == 1 ? Point{coords_[v], 0.0} : Point{coords_[2 * v], coords_[2 * v + 1]};
  }
  std::span<const int> element(std::size_t e) const noexcept {
    return {elements_.data() + e * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
  }
  double element_measure(std::size_t e) const noexcept { return element_measure_[e]; }
  double element_diameter(std::size_t e) const noexcept { return element_diameter_[e]; }
  double max_element_diameter() const noexcept { return max_element_diameter_; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<int>& elements() const noexcept { return elements_; }

  /// d_Omega: largest distance between two vertices.
  double diameter() const noexcept { return diameter_; }
  /// |Omega|: sum of element measures.
  double measure() const noexcept { return measure_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  std::string fingerprint_hex() const;

  /// Boundary facets: vertex pairs in 2D, single vertices in 1D.
  const std::vector<std::array<int, 2>>& boundary_facets() const noexcept { return boundary_; }
  /// Distance from p to the boundary of the domain.
  double distance_to_boundary(const Point& p) const;
  bool contains(const Point& p) const;

 private:
  Mesh() = default;
  void validate_and_measure();

  int dim_ = 1;
  std::vector<double> coords_;
  std::vector<int> elements_;
  std::vector<double> element_measure_;
  std::vector<double> element_diameter_;
  std::vector<std::array<int, 2>> boundary_;
  double max_element_diameter_ = 0.0;
  double diameter_ = 0.0;
  double measure_ = 0.0;
  std::uint64_t fingerprint_ = 0;
};

enum class SquarePattern {
  Alternating,  // checkerboard diagonals; invariant under the square's symmetry group for even n
  Uniform,      // every cell split along the same diagonal
};

MeshPtr generate_interval(int n, double a, double b);
MeshPtr generate_square(int n, SquarePattern pattern = SquarePattern::Alternating);
MeshPtr generate_disc(int n);

/// Builds a mesh from "interval:N[:a:b]", "square:N[:uniform]", "disc:N" or a file path.
MeshPtr mesh_from_spec(const std::string& spec);

MeshPtr load_mesh(const std::string& path);
MeshPtr parse_mesh(const std::string& text);
std::string format_mesh(const Mesh& mesh);
void save_mesh(const Mesh& mesh, const std::string& path);

/// gamma_{N,s,Omega} = |Omega|^{-1} d_Omega^{N+2s}.
double poincare_constant(const Mesh& mesh, FractionalOrder s);

/// Exact integral of the P1 interpolant with the given nodal values.
double integrate_nodal(const Mesh& mesh, const Eigen::VectorXd& coeffs);

/// Nodal P1 function. The zero-mean flag certifies that its integral vanishes.
class DiscreteFunction {
 public:
  DiscreteFunction(MeshPtr mesh, Eigen::VectorXd coeffs);

  const MeshPtr& mesh() const noexcept { return mesh_; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  bool zero_mean() const noexcept { return zero_mean_; }

  double integral() const { return integrate_nodal(*mesh_, coeffs_); }
  /// Copy with the mean removed and the certificate set.
  DiscreteFunction projected_zero_mean() const;
  /// Sets the certificate if the invariant holds; throws otherwise.
  DiscreteFunction& certify_zero_mean();

 private:
  MeshPtr mesh_;
  Eigen::VectorXd coeffs_;
  bool zero_mean_ = false;
};

}  // namespace fraclap
