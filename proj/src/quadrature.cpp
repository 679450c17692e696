#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "errors.hpp"

namespace fraclap {

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os << "N=" << n.value() << ";s=" << s.value() << ";weight=" << to_string(weight);
  return os.str();
}

const char* to_string(PairClass c) {
  switch (c) {
    case PairClass::Identical: return "identical";
    case PairClass::Adjacent: return "adjacent";
    case PairClass::Disjoint: return "disjoint";
  }
  return "?";
}

const char* to_string(Weight w) { return w == Weight::Plain ? "plain" : "log"; }

double default_tolerance(int dim) { return dim == 1 ? 1e-9 : 1e-7; }

QuadratureOptions default_options(int dim) {
  QuadratureOptions opts;
  opts.tol = default_tolerance(dim);
  return opts;
}

namespace {

int shared_vertices(const Mesh& mesh, std::size_t a, std::size_t b) {
  int shared = 0;
  for (int u : mesh.element(a))
    for (int v : mesh.element(b)) shared += u == v;
  return shared;
}

}  // namespace

PairClass classify_pair(const Mesh& mesh, std::size_t a, std::size_t b) {
  require(a < mesh.num_elements() && b < mesh.num_elements(), "element index out of range");
  if (a == b) return PairClass::Identical;
  return shared_vertices(mesh, a, b) > 0 ? PairClass::Adjacent : PairClass::Disjoint;
}

namespace quad {

const Rule& gauss_legendre(int q) {
  static const std::vector<Rule> rules = [] {
    std::vector<Rule> all(65);
    for (int n = 1; n <= 64; ++n) {
      Rule& r = all[n];
      r.x.assign(n, 0.0);
      r.w.assign(n, 0.0);
      for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 1.0;
        for (int it = 0; it < 100; ++it) {
          double p1 = 1.0, p2 = 0.0;
          for (int j = 1; j <= n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
          }
          pp = n * (z * p1 - p2) / (z * z - 1.0);
          const double dz = p1 / pp;
          z -= dz;
          if (std::abs(dz) < 1e-16) break;
        }
        const double w = 1.0 / ((1.0 - z * z) * pp * pp);  // = (2/((1-z^2)pp^2)) / 2
        r.x[i] = 0.5 * (1.0 - z);
        r.x[n - 1 - i] = 0.5 * (1.0 + z);
        r.w[i] = r.w[n - 1 - i] = w;
      }
    }
    return all;
  }();
  require(q >= 1 && q <= 64, "Gauss-Legendre order must be in [1,64]");
  return rules[q];
}

namespace {

// (e^z - 1)/z
double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// int_0^1 t e^{zt} dt
double phi2(double z) {
  if (std::abs(z) < 0.25) {
    double term = 1.0, sum = 0.5;  // k = 0: 1/(0! * 2)
    for (int k = 1; k < 30; ++k) {
      term *= z / k;
      sum += term / (k + 2);
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace

double power_integral(double a, double b, double beta) {
  const double eps = beta + 1.0;
  if (a == 0.0) {
    if (!(eps > 0.0)) fail(ErrorKind::Internal, "divergent power integral at the origin");
    return std::pow(b, eps) / eps;
  }
  const double la = std::log(a), len = std::log(b) - la;
  return std::exp(eps * la) * len * phi1(eps * len);
}

double power_log_integral(double a, double b, double beta) {
  const double eps = beta + 1.0;
  if (a == 0.0) {
    if (!(eps > 0.0)) fail(ErrorKind::Internal, "divergent power integral at the origin");
    return std::pow(b, eps) * (std::log(b) / eps - 1.0 / (eps * eps));
  }
  const double la = std::log(a), len = std::log(b) - la;
  return std::exp(eps * la) * len * (la * phi1(eps * len) + len * phi2(eps * len));
}

}  // namespace quad

namespace {

// ---------------------------------------------------------------------------
// 1D: element pairs reduce to integrals over r = x - y of polynomial weights.

struct Segment {
  int left, right;
  double xl, xr;
};

Segment segment_of(const Mesh& mesh, std::size_t e) {
  const auto t = mesh.element(e);
  double x0 = mesh.point(t[0])[0], x1 = mesh.point(t[1])[0];
  if (x0 <= x1) return {t[0], t[1], x0, x1};
  return {t[1], t[0], x1, x0};
}

using Cubic = std::array<double, 4>;  // coefficients of r^0..r^3

// (c0 + c1 r)^m, m <= 3
Cubic affine_power(double c0, double c1, int m) {
  Cubic out{};
  static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  for (int k = 0; k <= m; ++k) out[k] = binom[m][k] * std::pow(c0, m - k) * std::pow(c1, k);
  return out;
}

// Region for E = [0,hE] (x, right element) and F = [f0,f1] (y, left element), f1 <= 0:
// x in [max(0, f0 + r), min(hE, f1 + r)].
struct Piece {
  double a, b;
  double l0, l1, h0, h1;  // lower limit l0 + l1 r, upper limit h0 + h1 r
};

std::vector<Piece> r_pieces(double hE, double f0, double f1, bool identical) {
  double rmin = -f1, rmax = hE - f0;
  if (identical) rmin = 0.0;
  std::vector<double> cuts = {rmin, rmax};
  for (double c : {-f0, hE - f1})
    if (c > rmin && c < rmax) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    Piece p{a, b, 0.0, 0.0, hE, 0.0};
    if (f0 + mid > 0.0) p.l0 = f0, p.l1 = 1.0;
    if (f1 + mid < hE) p.h0 = f1, p.h1 = 1.0;
    out.push_back(p);
  }
  return out;
}

// W_i(r) = int_lo^hi x^i dx for i = 0..2
std::array<Cubic, 3> moment_weights(const Piece& p) {
  std::array<Cubic, 3> w{};
  for (int i = 0; i < 3; ++i) {
    const Cubic hi = affine_power(p.h0, p.h1, i + 1);
    const Cubic lo = affine_power(p.l0, p.l1, i + 1);
    for (int k = 0; k < 4; ++k) w[i][k] = (hi[k] - lo[k]) / (i + 1);
  }
  return w;
}

double eval_cubic(const Cubic& c, double r) { return ((c[3] * r + c[2]) * r + c[1]) * r + c[0]; }

// D_a = p0 + p1 x + p2 r;  D_a D_b = sum_{i+j<=2} c_ij x^i r^j
struct Products1D {
  int n = 0;
  std::array<std::array<double, 6>, 16> c{};  // [a*n+b][moment]
  std::array<bool, 6> needed{};
};

// moment index: (i,j) -> 0:(0,0) 1:(1,0) 2:(0,1) 3:(2,0) 4:(1,1) 5:(0,2)
constexpr int moment_i[6] = {0, 1, 0, 2, 1, 0};
constexpr int moment_j[6] = {0, 0, 1, 0, 1, 2};

class Pair1D {
 public:
  Pair1D(const Mesh& mesh, std::size_t ea, std::size_t eb, double s, const QuadratureOptions& opts)
      : s_(s), alpha_(-1.0 - 2.0 * s), opts_(opts) {
    Segment e = segment_of(mesh, ea), f = segment_of(mesh, eb);
    identical_ = ea == eb;
    if (!identical_ && e.xl < f.xl) std::swap(e, f);  // F lies left of E
    touching_ = identical_ || f.right == e.left;
    const double origin = e.xl;
    hE_ = e.xr - e.xl;
    f0_ = f.xl - origin;
    f1_ = f.xr - origin;
    const double hF = f.xr - f.xl;

    std::array<int, 4> cand = {f.left, f.right, e.left, e.right};
    for (int v : cand)
      if (std::find(out_.vertices.begin(), out_.vertices.begin() + out_.count, v) == out_.vertices.begin() + out_.count)
        out_.vertices[out_.count++] = v;

    std::array<std::array<double, 3>, 4> p{};
    for (int k = 0; k < out_.count; ++k) {
      const int v = out_.vertices[k];
      double aE = 0, bE = 0, aF = 0, bF = 0;
      if (v == e.left) aE = 1.0, bE = -1.0 / hE_;
      if (v == e.right) aE = 0.0, bE = 1.0 / hE_;
      if (v == f.left) aF = f1_ / hF, bF = -1.0 / hF;
      if (v == f.right) aF = -f0_ / hF, bF = 1.0 / hF;
      p[k] = {aE - aF, bE - bF, bF};
      if (touching_ && p[k][0] != 0.0) fail(ErrorKind::Internal, "touching pair with non-vanishing difference at the shared vertex");
    }
    prod_.n = out_.count;
    for (int a = 0; a < out_.count; ++a)
      for (int b = 0; b < out_.count; ++b) {
        auto& c = prod_.c[a * out_.count + b];
        const auto &u = p[a], &v = p[b];
        c = {u[0] * v[0], u[0] * v[1] + u[1] * v[0], u[0] * v[2] + u[2] * v[0], u[1] * v[1], u[1] * v[2] + u[2] * v[1], u[2] * v[2]};
        for (int m = 0; m < 6; ++m) prod_.needed[m] = prod_.needed[m] || c[m] != 0.0;
      }
    pieces_ = r_pieces(hE_, f0_, f1_, identical_);
  }

  PairMatrices run() {
    PairClass strategy = identical_ ? PairClass::Identical : (touching_ ? PairClass::Adjacent : PairClass::Disjoint);
    if (opts_.force) strategy = *opts_.force;
    if (strategy == PairClass::Disjoint)
      integrate_gauss();
    else
      integrate_closed_form();
    const double factor = identical_ ? 2.0 : 1.0;  // r < 0 half of E x E
    const int nn = out_.count * out_.count;
    for (int k = 0; k < nn; ++k) {
      out_.plain[k] *= factor;
      out_.log[k] *= factor;
    }
    out_.error_estimate *= factor;
    return out_;
  }

 private:
  void integrate_closed_form() {
    std::array<double, 6> mu_plain{}, mu_log{};
    for (const Piece& piece : pieces_) {
      const auto w = moment_weights(piece);
      for (int m = 0; m < 6; ++m) {
        if (!prod_.needed[m]) continue;
        // r^j W_i(r)
        std::array<double, 6> poly{};
        for (int k = 0; k < 4; ++k) poly[k + moment_j[m]] += w[moment_i[m]][k];
        for (int k = 0; k < 6; ++k) {
          if (poly[k] == 0.0) continue;
          mu_plain[m] += poly[k] * quad::power_integral(piece.a, piece.b, alpha_ + k);
          mu_log[m] += poly[k] * quad::power_log_integral(piece.a, piece.b, alpha_ + k);
        }
      }
    }
    const int nn = out_.count * out_.count;
    for (int ab = 0; ab < nn; ++ab)
      for (int m = 0; m < 6; ++m) {
        if (prod_.c[ab][m] == 0.0) continue;
        out_.plain[ab] += prod_.c[ab][m] * mu_plain[m];
        out_.log[ab] += prod_.c[ab][m] * mu_log[m];
      }
  }

  using Block = std::array<double, 32>;  // plain entries then log entries, 16 each

  Block gauss_block(const Piece& piece, double a, double b) const {
    const auto& rule = quad::gauss_legendre(8);
    const auto w = moment_weights(piece);
    const int nn = out_.count * out_.count;
    Block acc{};
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double r = a + (b - a) * rule.x[q];
      const double lr = std::log(r);
      const double g = std::exp(alpha_ * lr) * rule.w[q] * (b - a);
      std::array<double, 6> mom{};
      const double wi[3] = {eval_cubic(w[0], r), eval_cubic(w[1], r), eval_cubic(w[2], r)};
      for (int m = 0; m < 6; ++m) mom[m] = wi[moment_i[m]] * (moment_j[m] == 0 ? 1.0 : moment_j[m] == 1 ? r : r * r);
      for (int ab = 0; ab < nn; ++ab) {
        double v = 0.0;
        for (int m = 0; m < 6; ++m) v += prod_.c[ab][m] * mom[m];
        acc[ab] += g * v;
        acc[16 + ab] += g * lr * v;
      }
    }
    return acc;
  }

  static double block_max(const Block& b) {
    double m = 0.0;
    for (double v : b) m = std::max(m, std::abs(v));
    return m;
  }

  void integrate_gauss() {
    Block total{};
    double err_total = 0.0;
    for (const Piece& piece : pieces_) {
      const Block whole = gauss_block(piece, piece.a, piece.b);
      const double scale = std::max(block_max(whole), 1e-300);
      refine(piece, piece.a, piece.b, whole, scale, 0, total, err_total);
    }
    const int nn = out_.count * out_.count;
    for (int ab = 0; ab < nn; ++ab) {
      out_.plain[ab] = total[ab];
      out_.log[ab] = total[16 + ab];
    }
    out_.error_estimate = err_total;
  }

  void refine(const Piece& piece, double a, double b, const Block& coarse, double scale, int depth, Block& total,
              double& err_total) const {
    const double mid = 0.5 * (a + b);
    const Block left = gauss_block(piece, a, mid), right = gauss_block(piece, mid, b);
    double err = 0.0;
    for (int k = 0; k < 32; ++k) err = std::max(err, std::abs(coarse[k] - left[k] - right[k]));
    if (err <= opts_.tol * scale || (a == 0.0 && err <= opts_.tol * scale * 1e-3 * (b - a))) {
      for (int k = 0; k < 32; ++k) total[k] += left[k] + right[k];
      err_total += err;
      return;
    }
    if (depth >= opts_.max_depth) {
      std::ostringstream os;
      os << "1D pair quadrature did not converge on r in [" << a << "," << b << "]: error estimate " << err
         << " exceeds " << opts_.tol * scale;
      fail(ErrorKind::Quadrature, os.str());
    }
    refine(piece, a, mid, left, scale, depth + 1, total, err_total);
    refine(piece, mid, b, right, scale, depth + 1, total, err_total);
  }

  double s_;
  double alpha_;
  const QuadratureOptions& opts_;
  bool identical_ = false, touching_ = false;
  double hE_ = 0, f0_ = 0, f1_ = 0;
  std::vector<Piece> pieces_;
  Products1D prod_;
  PairMatrices out_;
};

// ---------------------------------------------------------------------------
// 2D

struct Affine {
  double c0 = 0, cx = 0, cy = 0;
  double operator()(const Point& p) const { return c0 + cx * p[0] + cy * p[1]; }
};

struct Triangle {
  std::array<int, 3> v;
  std::array<Point, 3> p;
  std::array<Affine, 3> bary;
  double area;
  double diam;
};

Triangle triangle_of(const Mesh& mesh, std::size_t e) {
  Triangle t;
  const auto el = mesh.element(e);
  for (int i = 0; i < 3; ++i) {
    t.v[i] = el[i];
    t.p[i] = mesh.point(el[i]);
  }
  const auto& [p0, p1, p2] = t.p;
  const double area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  for (int i = 0; i < 3; ++i) {
    const Point& a = t.p[(i + 1) % 3];
    const Point& b = t.p[(i + 2) % 3];
    t.bary[i] = {(a[0] * b[1] - b[0] * a[1]) / area2, (a[1] - b[1]) / area2, (b[0] - a[0]) / area2};
  }
  t.area = 0.5 * std::abs(area2);
  t.diam = mesh.element_diameter(e);
  return t;
}

Point lerp3(const Point& o, const Point& u, double a, const Point& v, double b) {
  return {o[0] + a * (u[0] - o[0]) + b * (v[0] - o[0]), o[1] + a * (u[1] - o[1]) + b * (v[1] - o[1])};
}

double dist(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

double point_segment(const Point& p, const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  const double t = std::clamp(((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

double triangle_distance(const std::array<Point, 3>& t1, const std::array<Point, 3>& t2) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      d = std::min(d, point_segment(t1[i], t2[j], t2[(j + 1) % 3]));
      d = std::min(d, point_segment(t2[i], t1[j], t1[(j + 1) % 3]));
    }
  return d;
}

double triangle_diameter(const std::array<Point, 3>& t) {
  return std::max({dist(t[0], t[1]), dist(t[1], t[2]), dist(t[0], t[2])});
}

struct Simplex2Rule {
  std::vector<std::array<double, 2>> x;  // (a, b) with a, b >= 0, a + b <= 1
  std::vector<double> w;                 // sums to 1/2
};

const Simplex2Rule& simplex_rule(int q) {
  static const std::vector<Simplex2Rule> rules = [] {
    std::vector<Simplex2Rule> all(33);
    for (int n = 1; n <= 32; ++n) {
      const auto& g = quad::gauss_legendre(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double u = g.x[i], v = g.x[j];
          all[n].x.push_back({u, v * (1.0 - u)});
          all[n].w.push_back(g.w[i] * g.w[j] * (1.0 - u));
        }
    }
    return all;
  }();
  require(q >= 1 && q <= 32, "simplex rule order must be in [1,32]");
  return rules[q];
}

class Pair2D {
 public:
  Pair2D(const Mesh& mesh, std::size_t ea, std::size_t eb, double s, const QuadratureOptions& opts)
      : s_(s), opts_(opts) {
    if (ea > eb) std::swap(ea, eb);
    t1_ = triangle_of(mesh, ea);
    t2_ = triangle_of(mesh, eb);
    identical_ = ea == eb;
    for (int v : t1_.v) add_vertex(v);
    for (int v : t2_.v) add_vertex(v);
    for (int k = 0; k < out_.count; ++k) {
      for (int i = 0; i < 3; ++i) {
        if (t1_.v[i] == out_.vertices[k]) f1_[k] = t1_.bary[i];
        if (t2_.v[i] == out_.vertices[k]) f2_[k] = t2_.bary[i];
      }
    }
    for (int v : t1_.v)
      for (int u : t2_.v)
        if (u == v) shared_.push_back(v);
    std::sort(shared_.begin(), shared_.end());
  }

  PairMatrices run() {
    PairClass strategy = identical_ ? PairClass::Identical : (shared_.empty() ? PairClass::Disjoint : PairClass::Adjacent);
    if (opts_.force) strategy = *opts_.force;
    if (strategy == PairClass::Disjoint) {
      if (shared_.empty() && !opts_.force)
        far_field(t1_.p, t2_.p, 0);
      else
        adaptive_field();
    } else if (identical_) {
      polar_identical();
    } else if (shared_.size() == 1) {
      duffy_vertex();
    } else {
      duffy_edge();
    }
    symmetrize();
    return out_;
  }

 private:
  struct Acc {
    std::array<double, 36> plain{}, log{};
  };

  void add_vertex(int v) {
    for (int k = 0; k < out_.count; ++k)
      if (out_.vertices[k] == v) return;
    out_.vertices[out_.count++] = v;
  }

  void accumulate(Acc& acc, const Point& x, const Point& y, double w) const {
    const double r = dist(x, y);
    const double lr = std::log(r);
    const double k = w * std::exp(-(2.0 + 2.0 * s_) * lr);
    const double kl = k * lr;
    const int n = out_.count;
    double d[6];
    for (int a = 0; a < n; ++a) d[a] = f1_[a](x) - f2_[a](y);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const double dd = d[a] * d[b];
        acc.plain[a * n + b] += k * dd;
        acc.log[a * n + b] += kl * dd;
      }
  }

  void finish(const Acc& acc, double scale_plain, double scale_log_plain, double scale_log) {
    // log = scale_log * acc.log + scale_log_plain * acc.plain
    const int n = out_.count;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const double p = acc.plain[a * n + b], l = acc.log[a * n + b];
        out_.plain[a * n + b] += scale_plain * p;
        out_.log[a * n + b] += scale_log * l + scale_log_plain * p;
      }
  }

  void symmetrize() {
    const int n = out_.count;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < a; ++b) {
        out_.plain[a * n + b] = out_.plain[b * n + a];
        out_.log[a * n + b] = out_.log[b * n + a];
      }
  }

  // T x T: the integrand depends on z = x - y only, and |T cap (T+z)| = |T| (1 - rho kappa(theta))^2.
  void polar_identical() {
    const int n = 3;
    std::array<std::array<double, 2>, 3> g;
    for (int a = 0; a < 3; ++a) g[a] = {f1_[a].cx, f1_[a].cy};
    std::array<double, 3> cuts;
    for (int a = 0; a < 3; ++a) {
      double th = std::atan2(g[a][1], g[a][0]) + 0.5 * std::numbers::pi;
      th = std::fmod(th, std::numbers::pi);
      if (th < 0) th += std::numbers::pi;
      cuts[a] = th;
    }
    std::sort(cuts.begin(), cuts.end());
    const double p = 1.0 - 2.0 * s_;
    const double beta = 1.0 / (p + 1) - 2.0 / (p + 2) + 1.0 / (p + 3);
    const double dbeta = -1.0 / ((p + 1) * (p + 1)) + 2.0 / ((p + 2) * (p + 2)) - 1.0 / ((p + 3) * (p + 3));
    const auto& rule = quad::gauss_legendre(2 * opts_.singular_order + 4);
    for (int arc = 0; arc < 3; ++arc) {
      const double a = cuts[arc];
      const double b = arc == 2 ? cuts[0] + std::numbers::pi : cuts[arc + 1];
      if (!(b > a)) continue;
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double th = a + (b - a) * rule.x[q];
        const double c = std::cos(th), sn = std::sin(th);
        double kappa = 0.0, ge[3];
        for (int i = 0; i < 3; ++i) {
          ge[i] = g[i][0] * c + g[i][1] * sn;
          kappa += std::max(0.0, ge[i]);
        }
        const double radius = 1.0 / kappa;
        const double lrad = std::log(radius);
        const double rp = std::exp((2.0 - 2.0 * s_) * lrad);
        // factor 2 accounts for theta + pi
        const double w = 2.0 * t1_.area * rule.w[q] * (b - a);
        const double wp = w * rp * beta;
        const double wl = w * rp * (beta * lrad + dbeta);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            out_.plain[i * n + j] += wp * ge[i] * ge[j];
            out_.log[i * n + j] += wl * ge[i] * ge[j];
          }
      }
    }
    symmetrize();
  }

  int other_vertex(const Triangle& t, int skip1, int skip2) const {
    for (int i = 0; i < 3; ++i)
      if (t.v[i] != skip1 && t.v[i] != skip2) return i;
    return -1;
  }

  int local_index(const Triangle& t, int v) const {
    for (int i = 0; i < 3; ++i)
      if (t.v[i] == v) return i;
    return -1;
  }

  // Shared vertex P: the integrand is homogeneous of degree -2s about (P,P).
  void duffy_vertex() {
    const int P = shared_[0];
    const int i1 = local_index(t1_, P), i2 = local_index(t2_, P);
    const Point& p = t1_.p[i1];
    const Point& q1 = t1_.p[(i1 + 1) % 3];
    const Point& r1 = t1_.p[(i1 + 2) % 3];
    const Point& q2 = t2_.p[(i2 + 1) % 3];
    const Point& r2 = t2_.p[(i2 + 2) % 3];
    const int q = opts_.singular_order;
    const auto& seg = quad::gauss_legendre(q);
    const auto& tri = simplex_rule(q);
    Acc acc;
    for (std::size_t i = 0; i < seg.x.size(); ++i) {
      const double a = seg.x[i];
      const Point xa = lerp3(p, q1, a, r1, 1.0 - a);
      const Point ya = lerp3(p, q2, a, r2, 1.0 - a);
      for (std::size_t j = 0; j < tri.x.size(); ++j) {
        const double w = seg.w[i] * tri.w[j];
        accumulate(acc, xa, lerp3(p, q2, tri.x[j][0], r2, tri.x[j][1]), w);
        accumulate(acc, lerp3(p, q1, tri.x[j][0], r1, tri.x[j][1]), ya, w);
      }
    }
    const double jac = 4.0 * t1_.area * t2_.area;
    const double e = 4.0 - 2.0 * s_;
    finish(acc, jac / e, -jac / (e * e), jac / e);
    symmetrize();
  }

  // Shared edge PQ: Duffy about P, then on each facet about Q.
  void duffy_edge() {
    const int P = shared_[0], Q = shared_[1];
    const Point& p = t1_.p[local_index(t1_, P)];
    const Point& qq = t1_.p[local_index(t1_, Q)];
    const Point& r1 = t1_.p[other_vertex(t1_, P, Q)];
    const Point& r2 = t2_.p[other_vertex(t2_, P, Q)];
    const int q = opts_.singular_order;
    const auto& seg = quad::gauss_legendre(q);
    const auto& tri = simplex_rule(q);
    Acc acc;
    // x-side facet (x on [R1,Q], y in T2) and y-side facet (y on [R2,Q], x in T1)
    for (std::size_t j = 0; j < tri.x.size(); ++j) {
      const double g = tri.x[j][0], d = tri.x[j][1], w = tri.w[j];
      accumulate(acc, r1, lerp3(qq, p, g, r2, d), w);
      accumulate(acc, lerp3(qq, p, g, r1, d), r2, w);
    }
    for (std::size_t i = 0; i < seg.x.size(); ++i)
      for (std::size_t j = 0; j < seg.x.size(); ++j) {
        const double al = seg.x[i], ga = seg.x[j], w = seg.w[i] * seg.w[j];
        const Point on_r1 = {qq[0] + al * (r1[0] - qq[0]), qq[1] + al * (r1[1] - qq[1])};
        const Point on_r2 = {qq[0] + al * (r2[0] - qq[0]), qq[1] + al * (r2[1] - qq[1])};
        const Point pr2 = {r2[0] + ga * (p[0] - r2[0]), r2[1] + ga * (p[1] - r2[1])};
        const Point pr1 = {r1[0] + ga * (p[0] - r1[0]), r1[1] + ga * (p[1] - r1[1])};
        accumulate(acc, on_r1, pr2, w);
        accumulate(acc, pr1, on_r2, w);
      }
    const double jac = 4.0 * t1_.area * t2_.area;
    const double e4 = 4.0 - 2.0 * s_, e3 = 3.0 - 2.0 * s_;
    // plain: jac/(e4 e3) S;  log: jac [ (1/e4)(S_L/e3 - S/e3^2) - S/(e4^2 e3) ]
    finish(acc, jac / (e4 * e3), -jac / (e4 * e3 * e3) - jac / (e4 * e4 * e3), jac / (e4 * e3));
    symmetrize();
  }

  // Number of Gauss points per direction for a well-separated pair at relative distance rho.
  int far_order(double rho) const {
    const double rate = std::acosh(1.0 + 2.0 * rho);
    const int q = static_cast<int>(std::ceil(std::log(1.0 / opts_.tol) / (2.0 * rate))) + 1;
    return std::clamp(q, 2, 16);
  }

  static std::array<std::array<Point, 3>, 4> split4(const std::array<Point, 3>& t) {
    auto mid = [](const Point& a, const Point& b) { return Point{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])}; };
    const Point m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m02 = mid(t[0], t[2]);
    return {{{t[0], m01, m02}, {m01, t[1], m12}, {m02, m12, t[2]}, {m12, m02, m01}}};
  }

  void tensor(Acc& acc, const std::array<Point, 3>& a, const std::array<Point, 3>& b, int q) const {
    const auto& rule = simplex_rule(q);
    const double ja = 2.0 * 0.5 * std::abs((a[1][0] - a[0][0]) * (a[2][1] - a[0][1]) - (a[2][0] - a[0][0]) * (a[1][1] - a[0][1]));
    const double jb = 2.0 * 0.5 * std::abs((b[1][0] - b[0][0]) * (b[2][1] - b[0][1]) - (b[2][0] - b[0][0]) * (b[1][1] - b[0][1]));
    std::vector<Point> yb(rule.x.size());
    for (std::size_t j = 0; j < rule.x.size(); ++j) yb[j] = lerp3(b[0], b[1], rule.x[j][0], b[2], rule.x[j][1]);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const Point x = lerp3(a[0], a[1], rule.x[i][0], a[2], rule.x[i][1]);
      for (std::size_t j = 0; j < rule.x.size(); ++j) accumulate(acc, x, yb[j], ja * jb * rule.w[i] * rule.w[j]);
    }
  }

  // Geometric subdivision driven by the separation ratio only, so the rule does not depend on s.
  void far_field(const std::array<Point, 3>& a, const std::array<Point, 3>& b, int depth) {
    const double da = triangle_diameter(a), db = triangle_diameter(b);
    const double rho = triangle_distance(a, b) / std::max(da, db);
    if (rho < 0.75 && depth < 6) {
      if (da >= db)
        for (const auto& c : split4(a)) far_field(c, b, depth + 1);
      else
        for (const auto& c : split4(b)) far_field(a, c, depth + 1);
      return;
    }
    Acc acc;
    tensor(acc, a, b, far_order(rho));
    finish(acc, 1.0, 0.0, 1.0);
  }

  void adaptive_field() {
    Acc coarse;
    tensor(coarse, t1_.p, t2_.p, 6);
    std::array<double, 2> scale{1e-300, 1e-300};
    for (int k = 0; k < 36; ++k) {
      scale[0] = std::max(scale[0], std::abs(coarse.plain[k]));
      scale[1] = std::max(scale[1], std::abs(coarse.log[k]));
    }
    double err = 0.0;
    adaptive(t1_.p, t2_.p, coarse, scale, 0, err);
    out_.error_estimate = err;
    symmetrize();
  }

  void adaptive(const std::array<Point, 3>& a, const std::array<Point, 3>& b, const Acc& coarse,
                const std::array<double, 2>& scale, int depth, double& err_total) {
    Acc fine;
    std::array<Acc, 4> kids;
    const bool split_a = triangle_diameter(a) >= triangle_diameter(b);
    const auto parts = split4(split_a ? a : b);
    for (int c = 0; c < 4; ++c) {
      if (split_a)
        tensor(kids[c], parts[c], b, 6);
      else
        tensor(kids[c], a, parts[c], 6);
      for (int k = 0; k < 36; ++k) {
        fine.plain[k] += kids[c].plain[k];
        fine.log[k] += kids[c].log[k];
      }
    }
    // relative to the largest plain and log entries separately
    double err = 0.0;
    for (int k = 0; k < 36; ++k)
      err = std::max({err, std::abs(fine.plain[k] - coarse.plain[k]) / scale[0], std::abs(fine.log[k] - coarse.log[k]) / scale[1]});
    const double local_tol = opts_.tol * std::pow(0.25, depth);  // four children share the parent budget
    // the split difference overstates convergence when the pair is close, hence the margin
    if (err <= 0.1 * local_tol) {
      finish(fine, 1.0, 0.0, 1.0);
      err_total += err * scale[0];
      return;
    }
    if (depth >= std::min(opts_.max_depth, 8)) {
      std::ostringstream os;
      os << "2D pair quadrature did not converge: relative error estimate " << err << " exceeds " << local_tol;
      fail(ErrorKind::Quadrature, os.str());
    }
    for (int c = 0; c < 4; ++c) {
      if (split_a)
        adaptive(parts[c], b, kids[c], scale, depth + 1, err_total);
      else
        adaptive(a, parts[c], kids[c], scale, depth + 1, err_total);
    }
  }

  double s_;
  const QuadratureOptions& opts_;
  Triangle t1_, t2_;
  bool identical_ = false;
  std::vector<int> shared_;
  std::array<Affine, 6> f1_{}, f2_{};
  PairMatrices out_;
};

}  // namespace

PairMatrices pair_matrices(const Mesh& mesh, std::size_t a, std::size_t b, FractionalOrder s,
                           const QuadratureOptions& opts) {
  require(a < mesh.num_elements() && b < mesh.num_elements(), "element index out of range");
  require(opts.tol > 0.0, "quadrature tolerance must be positive");
  if (mesh.dim() == 1) return Pair1D(mesh, a, b, s.value(), opts).run();
  return Pair2D(mesh, a, b, s.value(), opts).run();
}

double pair_integral(const Mesh& mesh, std::size_t a, std::size_t b, int i, int j, const KernelSpec& kernel,
                     const QuadratureOptions& opts) {
  require(kernel.n.value() == mesh.dim(), "kernel dimension differs from mesh dimension");
  const PairMatrices pm = pair_matrices(mesh, a, b, kernel.s, opts);
  int li = -1, lj = -1;
  for (int k = 0; k < pm.count; ++k) {
    if (pm.vertices[k] == i) li = k;
    if (pm.vertices[k] == j) lj = k;
  }
  if (li < 0 || lj < 0) return 0.0;
  return pm.at(kernel.weight, li, lj);
}

}  // namespace fraclap
