// Independent reference computations used only by the tests.
#pragma once

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "mesh.hpp"

namespace oracle {

// Hat restriction to a 1D element: value of the basis function of global vertex v at x.
inline double hat_on(const fraclap::Mesh& mesh, std::size_t e, int v, double x) {
  const auto t = mesh.element(e);
  const double x0 = mesh.point(t[0])[0], x1 = mesh.point(t[1])[0];
  if (v == t[0]) return (x1 - x) / (x1 - x0);
  if (v == t[1]) return (x - x0) / (x1 - x0);
  return 0.0;
}

// Pair block for the 1D pair (A,B): entries
//   int_A int_B (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) |x-y|^{-1-2s} (ln|x-y|)^w dy dx
// for every vertex i,j of A and B. Written as an integral over r = x - y of
// F(r) = int_{x in A, x-r in B} (...) dx; F is a cubic on each r-piece, recovered from samples,
// and the r-integrals of t^{m-1-2s} (ln t)^w are adaptive.
struct PairBlock {
  std::vector<int> vertices;
  std::vector<double> entries;  // row-major over vertices
  double at(int vi, int vj) const {
    const auto n = vertices.size();
    std::size_t p = n, q = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (vertices[k] == vi) p = k;
      if (vertices[k] == vj) q = k;
    }
    return p == n || q == n ? 0.0 : entries[p * n + q];
  }
};

inline PairBlock pair_block_1d(const fraclap::Mesh& mesh, std::size_t a, std::size_t b, double s, bool log) {
  const auto ta = mesh.element(a), tb = mesh.element(b);
  const double a0 = std::min(mesh.point(ta[0])[0], mesh.point(ta[1])[0]);
  const double a1 = std::max(mesh.point(ta[0])[0], mesh.point(ta[1])[0]);
  const double b0 = std::min(mesh.point(tb[0])[0], mesh.point(tb[1])[0]);
  const double b1 = std::max(mesh.point(tb[0])[0], mesh.point(tb[1])[0]);
  PairBlock out;
  out.vertices = {ta[0], ta[1], tb[0], tb[1]};
  std::sort(out.vertices.begin(), out.vertices.end());
  out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
  const std::size_t nv = out.vertices.size();
  out.entries.assign(nv * nv, 0.0);

  auto F = [&](double r, int i, int j) {
    const double lo = std::max(a0, b0 + r), hi = std::min(a1, b1 + r);
    if (!(hi > lo)) return 0.0;
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    double sum = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[q];
      const double di = hat_on(mesh, a, i, x) - hat_on(mesh, b, i, x - r);
      const double dj = hat_on(mesh, a, j, x) - hat_on(mesh, b, j, x - r);
      sum += gw[q] * di * dj;
    }
    return 0.5 * (hi - lo) * sum;
  };
  std::vector<double> cuts = {a0 - b1, a0 - b0, a1 - b1, a1 - b0, 0.0};
  std::sort(cuts.begin(), cuts.end());
  const double rlo = a0 - b1, rhi = a1 - b0;
  boost::math::quadrature::tanh_sinh<double> ts;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double u = std::max(cuts[k], rlo), v = std::min(cuts[k + 1], rhi);
    if (!(v > u)) continue;
    const bool at_origin = u == 0.0 || v == 0.0;
    const double tu = std::min(std::abs(u), std::abs(v)), tv = std::max(std::abs(u), std::abs(v));
    // moments int t^{m-1-2s} (ln t)^w over the piece; m = 0,1 diverge at the origin and are not needed there
    std::array<double, 4> mom{};
    for (int m = at_origin ? 2 : 0; m < 4; ++m) {
      auto integrand = [&](double tt) {
        if (tt <= 0.0) return 0.0;
        const double k = std::pow(tt, m - 1.0 - 2.0 * s);
        return log ? k * std::log(tt) : k;
      };
      mom[m] = at_origin ? ts.integrate(integrand, tu, tv, 1e-13)
                         : boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, tu, tv, 8, 1e-13);
    }
    std::array<double, 4> t{};
    std::array<double, 4> rs{};
    for (int q = 0; q < 4; ++q) {
      rs[q] = 0.5 * (u + v) + 0.5 * (v - u) * std::cos((2 * q + 1) * std::numbers::pi / 8);
      t[q] = std::abs(rs[q]);
    }
    for (std::size_t p = 0; p < nv; ++p)
      for (std::size_t q = p; q < nv; ++q) {
        // F is a cubic in t = |r| on the piece: Newton divided differences from Chebyshev samples, then monomials
        std::array<double, 4> d{};
        for (int k2 = 0; k2 < 4; ++k2) d[k2] = F(rs[k2], out.vertices[p], out.vertices[q]);
        for (int lvl = 1; lvl < 4; ++lvl)
          for (int k2 = 3; k2 >= lvl; --k2) d[k2] = (d[k2] - d[k2 - 1]) / (t[k2] - t[k2 - lvl]);
        std::array<double, 4> c{d[3], 0, 0, 0};
        for (int k2 = 2; k2 >= 0; --k2) {
          std::array<double, 4> next{};
          for (int m = 0; m < 3; ++m) {
            next[m + 1] += c[m];
            next[m] -= t[k2] * c[m];
          }
          next[0] += d[k2];
          c = next;
        }
        double v2 = 0.0;
        for (int m = at_origin ? 2 : 0; m < 4; ++m) v2 += c[m] * mom[m];  // differences vanish to second order on the diagonal
        out.entries[p * nv + q] += v2;
        if (q != p) out.entries[q * nv + p] += v2;
      }
  }
  return out;
}

inline double pair_entry_1d(const fraclap::Mesh& mesh, std::size_t a, std::size_t b, int i, int j, double s, bool log) {
  return pair_block_1d(mesh, a, b, s, log).at(i, j);
}

// Full 1D matrix by scattering oracle pair blocks.
inline std::vector<double> matrix_1d(const fraclap::Mesh& mesh, double s, bool log) {
  const std::size_t n = mesh.num_vertices();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t a = 0; a < mesh.num_elements(); ++a)
    for (std::size_t b = 0; b < mesh.num_elements(); ++b) {
      const auto blk = pair_block_1d(mesh, a, b, s, log);
      const std::size_t nv = blk.vertices.size();
      for (std::size_t p = 0; p < nv; ++p)
        for (std::size_t q = 0; q < nv; ++q) out[blk.vertices[p] * n + blk.vertices[q]] += blk.entries[p * nv + q];
    }
  return out;
}

// Global 1D entry: sum over all ordered element pairs.
inline double global_entry_1d(const fraclap::Mesh& mesh, int i, int j, double s, bool log) {
  double total = 0.0;
  for (std::size_t a = 0; a < mesh.num_elements(); ++a)
    for (std::size_t b = 0; b < mesh.num_elements(); ++b) total += pair_entry_1d(mesh, a, b, i, j, s, log);
  return total;
}

// int int_{(0,1)^2 x (0,1)^2} (x1-y1)^2 |x-y|^{-2-2s} (ln|x-y|)^w: the form of u(x) = x1 on the unit square.
// Difference variable z, weight (1-|z1|)(1-|z2|), then polar with the radial part in closed form.
inline double square_linear_form(double s, bool log) {
  auto radial = [&](double a, double R) {  // int_0^R rho^a (ln rho)^w d rho
    const double e = a + 1.0;
    const double p = std::pow(R, e) / e;
    return log ? p * (std::log(R) - 1.0 / e) : p;
  };
  auto angular = [&](double th) {
    const double c = std::cos(th), sn = std::sin(th);
    const double R = 1.0 / std::max(c, sn);
    const double p = 1.0 - 2.0 * s;
    return c * c * (radial(p, R) - (c + sn) * radial(p + 1, R) + c * sn * radial(p + 2, R));
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double q = std::numbers::pi / 4;
  return 4.0 * (GK::integrate(angular, 0.0, q, 10, 1e-14) + GK::integrate(angular, q, 2 * q, 10, 1e-14));
}

}  // namespace oracle
