#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "mesh.hpp"

using namespace fraclap;

namespace {
ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}
}  // namespace

TEST_CASE("generators") {
  auto iv = generate_interval(4, 0.0, 2.0);
  CHECK(iv->num_vertices() == 5);
  CHECK(iv->num_elements() == 4);
  CHECK(iv->measure() == doctest::Approx(2.0));
  CHECK(iv->diameter() == doctest::Approx(2.0));
  CHECK(iv->max_element_diameter() == doctest::Approx(0.5));
  CHECK(iv->boundary_facets().size() == 2);

  auto sq = generate_square(4);
  CHECK(sq->num_vertices() == 25);
  CHECK(sq->num_elements() == 32);
  CHECK(sq->measure() == doctest::Approx(1.0));
  CHECK(sq->diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(sq->boundary_facets().size() == 16);
  CHECK(sq->fingerprint() != generate_square(4, SquarePattern::Uniform)->fingerprint());

  auto disc = generate_disc(8);
  CHECK(disc->measure() < M_PI);
  CHECK(disc->measure() > 0.9 * M_PI);
  CHECK(disc->contains({0.0, 0.0}));
  CHECK_FALSE(disc->contains({1.1, 0.0}));
}

TEST_CASE("spec strings") {
  CHECK(mesh_from_spec("interval:8")->num_elements() == 8);
  CHECK(mesh_from_spec("interval:4:-1:1")->point(0)[0] == -1.0);
  CHECK(mesh_from_spec("square:2:uniform")->num_elements() == 8);
  CHECK(kind_of([] { mesh_from_spec("interval:0"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { mesh_from_spec("square:x"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { mesh_from_spec("/nonexistent/mesh.txt"); }) == ErrorKind::Io);
}

TEST_CASE("text round trip keeps the fingerprint") {
  for (auto m : {generate_interval(5, 0, 1), generate_square(3), generate_disc(6)}) {
    auto back = parse_mesh(format_mesh(*m));
    CHECK(back->fingerprint() == m->fingerprint());
    CHECK(back->coords() == m->coords());
  }
}

TEST_CASE("malformed and degenerate input") {
  CHECK(kind_of([] { parse_mesh("garbage"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_mesh("fraclap-mesh v1 dim=1\nvertices 2\n0\n1\nelements 1\n0 x\n"); }) == ErrorKind::Parse);
  // zero-area triangle
  CHECK(kind_of([] { Mesh::create(2, {0, 0, 1, 0, 2, 0}, {0, 1, 2}); }) == ErrorKind::Degenerate);
  // zero-length segment
  CHECK(kind_of([] { Mesh::create(1, {0, 0, 1}, {0, 1, 1, 2}); }) == ErrorKind::Degenerate);
  // overlapping segments
  CHECK(kind_of([] { Mesh::create(1, {0, 1, 0.5, 2}, {0, 1, 2, 3}); }) == ErrorKind::Degenerate);
  // disconnected
  CHECK(kind_of([] { Mesh::create(1, {0, 1, 2, 3}, {0, 1, 2, 3}); }) == ErrorKind::Degenerate);
  CHECK(kind_of([] { Mesh::create(1, {0, 1}, {0, 5}); }) == ErrorKind::Validation);
}

TEST_CASE("clockwise triangles are reoriented") {
  auto m = Mesh::create(2, {0, 0, 1, 0, 0, 1}, {0, 2, 1});
  CHECK(m->element_measure(0) == doctest::Approx(0.5));
}

TEST_CASE("poincare constant") {
  CHECK(poincare_constant(*generate_interval(4, 0, 1), FractionalOrder(0.3)) == doctest::Approx(1.0));
  CHECK(poincare_constant(*generate_interval(4, 0, 2), FractionalOrder(0.5)) == doctest::Approx(2.0));
  CHECK(poincare_constant(*generate_square(2), FractionalOrder(0.5)) == doctest::Approx(std::pow(2.0, 1.5)));
}

TEST_CASE("nodal integrals and the zero-mean certificate") {
  auto m = generate_square(3);
  Eigen::VectorXd x(m->num_vertices());
  for (std::size_t v = 0; v < m->num_vertices(); ++v) x[v] = m->point(v)[0];
  CHECK(integrate_nodal(*m, x) == doctest::Approx(0.5));
  DiscreteFunction f(m, x);
  CHECK_FALSE(f.zero_mean());
  CHECK_THROWS_AS(f.certify_zero_mean(), Error);
  auto g = f.projected_zero_mean();
  CHECK(g.zero_mean());
  CHECK(std::abs(g.integral()) < 1e-15);
}
