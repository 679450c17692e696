#include "forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "util.hpp"

namespace fraclap {

AssemblyOptions default_assembly(int dim) {
  AssemblyOptions opts;
  opts.quad = default_options(dim);
  return opts;
}

namespace {

constexpr std::size_t kBatch = 16384;

// Pairs (a,b) with a <= b, in lexicographic order. Both matrices are filled;
// the caller keeps the ones it needs.
void assemble_into(const Mesh& mesh, FractionalOrder s, const AssemblyOptions& opts, Eigen::MatrixXd* plain,
                   Eigen::MatrixXd* log) {
  const std::size_t ne = mesh.num_elements(), nv = mesh.num_vertices();
  if (plain) plain->setZero(nv, nv);
  if (log) log->setZero(nv, nv);
  const int threads = resolve_threads(opts.threads);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<PairMatrices> results;
  pairs.reserve(kBatch);
  std::size_t a = 0, b = 0;
  while (a < ne) {
    pairs.clear();
    while (a < ne && pairs.size() < kBatch) {
      pairs.emplace_back(a, b);
      if (++b == ne) b = ++a;
    }
    results.resize(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
      results[k] = pair_matrices(mesh, pairs[k].first, pairs[k].second, s, opts.quad);
    });
    // serial scatter in pair order keeps the floating-point sums independent of the worker count
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const PairMatrices& pm = results[k];
      const double factor = pairs[k].first == pairs[k].second ? 1.0 : 2.0;
      for (int i = 0; i < pm.count; ++i)
        for (int j = 0; j < pm.count; ++j) {
          const int gi = pm.vertices[i], gj = pm.vertices[j];
          if (plain) (*plain)(gi, gj) += factor * pm.plain[i * pm.count + j];
          if (log) (*log)(gi, gj) += factor * pm.log[i * pm.count + j];
        }
    }
  }
  if (plain) *plain = 0.5 * (*plain + plain->transpose()).eval();
  if (log) *log = 0.5 * (*log + log->transpose()).eval();
}

}  // namespace

NonlocalMatrix assemble(const Mesh& mesh, const KernelSpec& kernel, const AssemblyOptions& opts) {
  require(kernel.n.value() == mesh.dim(), "kernel dimension N=" + std::to_string(kernel.n.value()) +
                                              " differs from mesh dimension " + std::to_string(mesh.dim()));
  NonlocalMatrix out{kernel, {}, opts.quad.tol, mesh.fingerprint()};
  if (kernel.weight == Weight::Plain)
    assemble_into(mesh, kernel.s, opts, &out.mat, nullptr);
  else
    assemble_into(mesh, kernel.s, opts, nullptr, &out.mat);
  return out;
}

FormPair assemble_both(const Mesh& mesh, FractionalOrder s, const AssemblyOptions& opts) {
  const Dimension n(mesh.dim());
  FormPair out{{{n, s, Weight::Plain}, {}, opts.quad.tol, mesh.fingerprint()},
               {{n, s, Weight::Log}, {}, opts.quad.tol, mesh.fingerprint()}};
  assemble_into(mesh, s, opts, &out.plain.mat, &out.log.mat);
  return out;
}

MassMatrix mass(const Mesh& mesh, bool lumped) {
  const std::size_t nv = mesh.num_vertices();
  MassMatrix m{Eigen::MatrixXd::Zero(nv, nv), lumped};
  const int k = mesh.vertices_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto t = mesh.element(e);
    const double meas = mesh.element_measure(e);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        if (lumped) {
          m.mat(t[i], t[i]) += meas / (k * k);
        } else {
          // exact P1: |e| (1 + delta_ij) / ((k)(k+1))
          m.mat(t[i], t[j]) += meas * (i == j ? 2.0 : 1.0) / (k * (k + 1));
        }
      }
  }
  return m;
}

double energy(const DiscreteFunction& u, const DiscreteFunction& v, const NonlocalMatrix& a) {
  require(a.kernel.weight == Weight::Plain, "energy needs the plain-weight matrix");
  if (u.mesh()->fingerprint() != a.mesh_id || v.mesh()->fingerprint() != a.mesh_id)
    fail(ErrorKind::Validation, "mesh fingerprint of the functions differs from the matrix");
  return 0.5 * c_ns(a.kernel.n, a.kernel.s) * u.coeffs().dot(a.mat * v.coeffs());
}

namespace {
std::mutex g_cache_mu;
std::map<std::pair<std::uint64_t, long long>, std::shared_ptr<const NonlocalMatrix>> g_cache;
}  // namespace

double seminorm(const DiscreteFunction& u, FractionalOrder t, const AssemblyOptions& opts) {
  const Mesh& mesh = *u.mesh();
  const auto key = std::make_pair(mesh.fingerprint(), std::llround(t.value() * 1e12));
  std::shared_ptr<const NonlocalMatrix> a;
  {
    std::lock_guard lock(g_cache_mu);
    if (auto it = g_cache.find(key); it != g_cache.end()) a = it->second;
  }
  if (!a) {
    auto built = std::make_shared<const NonlocalMatrix>(assemble(mesh, {Dimension(mesh.dim()), t, Weight::Plain}, opts));
    std::lock_guard lock(g_cache_mu);
    a = g_cache.emplace(key, built).first->second;
  }
  return std::sqrt(std::max(0.0, u.coeffs().dot(a->mat * u.coeffs())));
}

void clear_seminorm_cache() {
  std::lock_guard lock(g_cache_mu);
  g_cache.clear();
}

// ---------------------------------------------------------------------------
// principal value

namespace {

// int_lo^hi g(d) d^{-1-2s} dd on geometric pieces
template <class F>
double radial(F g, double lo, double hi, double s) {
  if (!(hi > lo)) return 0.0;
  const auto& rule = quad::gauss_legendre(16);
  double total = 0.0;
  for (double a = lo; a < hi;) {
    const double b = std::min(hi, 2.0 * a);
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double d = a + (b - a) * rule.x[q];
      total += rule.w[q] * (b - a) * g(d) * std::pow(d, -1.0 - 2.0 * s);
    }
    a = b;
  }
  return total;
}

// int_0^r G(h) h^{1-2s} dh for the even second difference G. Below h_min the quotient
// loses digits to cancellation, so G = a + b h^2 is fitted there and integrated exactly.
template <class F>
double ball(F G, double r, double s) {
  const double e = 2.0 - 2.0 * s;
  const double hm = 0.01 * r;
  const double g1 = G(hm), g2 = G(2.0 * hm);
  const double b = (g2 - g1) / (3.0 * hm * hm), a = g1 - b * hm * hm;
  double total = a * std::pow(hm, e) / e + b * std::pow(hm, e + 2.0) / (e + 2.0);
  const auto& rule = quad::gauss_legendre(10);
  for (double lo = hm; lo < r;) {
    const double hi = std::min(r, 2.0 * lo);
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double h = lo + (hi - lo) * rule.x[q];
      total += rule.w[q] * (hi - lo) * G(h) * std::pow(h, 1.0 - 2.0 * s);
    }
    lo = hi;
  }
  return total;
}

double pv_1d(const AnalyticFunction& phi, double x, double s, double lo, double hi, double r) {
  const double fx = phi.value({x, 0.0});
  const double central = ball(
      [&](double h) { return (2.0 * fx - phi.value({x + h, 0.0}) - phi.value({x - h, 0.0})) / (h * h); }, r, s);
  const double left = radial([&](double d) { return fx - phi.value({x - d, 0.0}); }, r, x - lo, s);
  const double right = radial([&](double d) { return fx - phi.value({x + d, 0.0}); }, r, hi - x, s);
  return central + left + right;
}

double pv_2d(const AnalyticFunction& phi, const Point& x, double s, const Mesh& mesh, double r) {
  const double fx = phi.value(x);
  const double pi = std::numbers::pi;
  auto at = [&](double rho, double c, double sn) { return phi.value({x[0] + rho * c, x[1] + rho * sn}); };

  double central = 0.0;
  {
    const auto& rule = quad::gauss_legendre(24);
    for (int half = 0; half < 4; ++half) {
      const double a = half * pi / 4, b = (half + 1) * pi / 4;
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double th = a + (b - a) * rule.x[q];
        const double c = std::cos(th), sn = std::sin(th);
        central += rule.w[q] * (b - a) *
                   ball([&](double h) { return (2.0 * fx - at(h, c, sn) - at(-h, c, sn)) / (h * h); }, r, s);
      }
    }
  }

  const auto& facets = mesh.boundary_facets();
  std::vector<double> cuts;
  for (const auto& f : facets) {
    const Point p = mesh.point(f[0]);
    double th = std::atan2(p[1] - x[1], p[0] - x[0]);
    if (th < 0) th += 2 * pi;
    cuts.push_back(th);
  }
  cuts.push_back(0.0);
  cuts.push_back(2 * pi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> arcs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-14) continue;
    const int pieces = static_cast<int>(std::ceil((b - a) / (pi / 8)));
    for (int k = 0; k < pieces; ++k) {
      arcs.push_back(a + (b - a) * k / pieces);
      arcs.push_back(a + (b - a) * (k + 1) / pieces);
    }
  }
  const auto& rule = quad::gauss_legendre(16);
  double outer = 0.0;
  std::vector<double> hits;
  for (std::size_t k = 0; k < arcs.size(); k += 2) {
    const double a = arcs[k], b = arcs[k + 1];
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double th = a + (b - a) * rule.x[q];
      const double c = std::cos(th), sn = std::sin(th);
      hits.clear();
      for (const auto& f : facets) {
        const Point p = mesh.point(f[0]), e = mesh.point(f[1]);
        const double ex = e[0] - p[0], ey = e[1] - p[1];
        const double det = c * (-ey) + ex * sn;  // solve t*(c,s) - u*(ex,ey) = p - x
        if (std::abs(det) < 1e-300) continue;
        const double rx = p[0] - x[0], ry = p[1] - x[1];
        const double t = (rx * (-ey) + ex * ry) / det;
        const double u = (c * ry - sn * rx) / det;
        if (t > 0 && u >= 0 && u <= 1) hits.push_back(t);
      }
      std::sort(hits.begin(), hits.end());
      double along = 0.0;
      for (std::size_t h = 0; h < hits.size(); h += 2) {
        const double seg_lo = std::max(r, h == 0 ? 0.0 : hits[h - 1]);
        const double seg_hi = hits[h];
        along += radial([&](double rho) { return fx - at(rho, c, sn); }, seg_lo, seg_hi, s);
      }
      outer += rule.w[q] * (b - a) * along;
    }
  }
  return central + outer;
}

}  // namespace

double pv_apply(const AnalyticFunction& phi, const Point& x, FractionalOrder s, const Mesh& mesh,
                std::optional<double> ball_radius) {
  const double to_boundary = mesh.distance_to_boundary(x);
  if (!mesh.contains(x) || !(to_boundary > 0.0)) fail(ErrorKind::Validation, "point is not in the interior of the domain");
  const double r = ball_radius.value_or(std::min(0.5 * to_boundary, mesh.max_element_diameter()));
  require(r > 0.0, "ball radius must be positive");
  if (r >= to_boundary) fail(ErrorKind::Validation, "point is too close to the boundary for the ball radius");
  const double c = c_ns(Dimension(mesh.dim()), s);
  if (mesh.dim() == 1) {
    const auto [lo, hi] = std::minmax_element(mesh.coords().begin(), mesh.coords().end());
    return c * pv_1d(phi, x[0], s.value(), *lo, *hi, r);
  }
  return c * pv_2d(phi, x, s.value(), mesh, r);
}

std::string matrix_market(const NonlocalMatrix& m) {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << "% kernel " << m.kernel.describe() << " quad_tol=" << format_double(m.quad_tol) << " mesh=" << std::hex
     << m.mesh_id << std::dec << "\n";
  const Eigen::Index n = m.mat.rows();
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) nnz += m.mat(i, j) != 0.0;
  os << n << ' ' << n << ' ' << nnz << "\n";
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i)
      if (m.mat(i, j) != 0.0) os << i + 1 << ' ' << j + 1 << ' ' << format_double(m.mat(i, j)) << "\n";
  return os.str();
}

}  // namespace fraclap
