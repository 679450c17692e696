#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "util.hpp"

namespace fraclap {
namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

[[noreturn]] void degenerate(const std::string& what) { fail(ErrorKind::Degenerate, what); }

}  // namespace

MeshPtr Mesh::create(int dim, std::vector<double> coords, std::vector<int> elements) {
  require(dim == 1 || dim == 2, "mesh dimension must be 1 or 2");
  require(!coords.empty() && coords.size() % dim == 0, "vertex coordinate array has wrong length");
  require(!elements.empty() && elements.size() % (dim + 1) == 0, "element index array has wrong length");
  std::shared_ptr<Mesh> mesh(new Mesh());
  mesh->dim_ = dim;
  mesh->coords_ = std::move(coords);
  mesh->elements_ = std::move(elements);
  mesh->validate_and_measure();
  return mesh;
}

void Mesh::validate_and_measure() {
  const std::size_t nv = num_vertices();
  const std::size_t ne = num_elements();
  const int k = dim_ + 1;
  for (std::size_t e = 0; e < ne; ++e)
    for (int i = 0; i < k; ++i) {
      const int v = elements_[e * k + i];
      if (v < 0 || static_cast<std::size_t>(v) >= nv)
        fail(ErrorKind::Validation, "element " + std::to_string(e) + " references vertex " + std::to_string(v) +
                                        " outside [0," + std::to_string(nv) + ")");
    }
  for (double c : coords_)
    if (!std::isfinite(c)) fail(ErrorKind::Validation, "vertex coordinates must be finite");

  double lo_x = coords_[0], hi_x = coords_[0], lo_y = 0.0, hi_y = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    const Point p = point(v);
    lo_x = std::min(lo_x, p[0]);
    hi_x = std::max(hi_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
    hi_y = std::max(hi_y, p[1]);
  }
  const double extent = std::max(hi_x - lo_x, hi_y - lo_y);
  if (!(extent > 0.0)) degenerate("mesh vertices all coincide");

  element_measure_.assign(ne, 0.0);
  element_diameter_.assign(ne, 0.0);
  DisjointSet components(nv);
  std::vector<int> valence(nv, 0);

  if (dim_ == 1) {
    for (std::size_t e = 0; e < ne; ++e) {
      const int a = elements_[2 * e], b = elements_[2 * e + 1];
      const double len = std::abs(coords_[b] - coords_[a]);
      if (a == b || len <= 1e-14 * extent) degenerate("element " + std::to_string(e) + " has zero length");
      element_measure_[e] = element_diameter_[e] = len;
      components.unite(a, b);
      ++valence[a];
      ++valence[b];
    }
    std::vector<std::size_t> order(ne);
    std::iota(order.begin(), order.end(), 0);
    auto left = [&](std::size_t e) { return std::min(coords_[elements_[2 * e]], coords_[elements_[2 * e + 1]]); };
    auto right = [&](std::size_t e) { return std::max(coords_[elements_[2 * e]], coords_[elements_[2 * e + 1]]); };
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return left(x) < left(y); });
    for (std::size_t i = 1; i < ne; ++i)
      if (left(order[i]) < right(order[i - 1]) - 1e-12 * extent)
        degenerate("elements " + std::to_string(order[i - 1]) + " and " + std::to_string(order[i]) + " overlap");
    for (std::size_t v = 0; v < nv; ++v) {
      if (valence[v] > 2) degenerate("vertex " + std::to_string(v) + " is shared by more than two elements");
      if (valence[v] == 1) boundary_.push_back({static_cast<int>(v), static_cast<int>(v)});
    }
  } else {
    std::map<std::pair<int, int>, std::pair<int, int>> edges;  // undirected edge -> (uses, net orientation)
    for (std::size_t e = 0; e < ne; ++e) {
      int* t = elements_.data() + 3 * e;
      const Point p0 = point(t[0]), p1 = point(t[1]), p2 = point(t[2]);
      double area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
      if (std::abs(area2) <= 1e-13 * extent * extent || t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
        degenerate("element " + std::to_string(e) + " has zero area");
      if (area2 < 0.0) {
        std::swap(t[1], t[2]);
        area2 = -area2;
      }
      element_measure_[e] = 0.5 * area2;
      element_diameter_[e] = std::max({distance(p0, p1), distance(p1, p2), distance(p0, p2)});
      for (int i = 0; i < 3; ++i) {
        const int a = t[i], b = t[(i + 1) % 3];
        auto& rec = edges[{std::min(a, b), std::max(a, b)}];
        rec.first += 1;
        rec.second += a < b ? 1 : -1;
        components.unite(a, b);
        ++valence[a];
      }
    }
    double boundary_area2 = 0.0;
    for (const auto& [key, rec] : edges) {
      if (rec.first > 2 || (rec.first == 2 && rec.second != 0))
        degenerate("elements overlap along edge (" + std::to_string(key.first) + "," + std::to_string(key.second) + ")");
      if (rec.first == 1) {
        const int a = rec.second > 0 ? key.first : key.second;
        const int b = rec.second > 0 ? key.second : key.first;
        boundary_.push_back({a, b});
        const Point pa = point(a), pb = point(b);
        boundary_area2 += pa[0] * pb[1] - pb[0] * pa[1];
      }
    }
    const double total = std::accumulate(element_measure_.begin(), element_measure_.end(), 0.0);
    if (std::abs(0.5 * boundary_area2 - total) > 1e-9 * total) degenerate("elements overlap: covered area exceeds enclosed area");
  }

  for (std::size_t v = 0; v < nv; ++v)
    if (valence[v] == 0) degenerate("vertex " + std::to_string(v) + " is not used by any element");
  const int root = components.find(elements_[0]);
  for (std::size_t v = 0; v < nv; ++v)
    if (components.find(static_cast<int>(v)) != root) degenerate("mesh is not connected");

  measure_ = 0.0;
  for (double m : element_measure_) measure_ += m;
  max_element_diameter_ = *std::max_element(element_diameter_.begin(), element_diameter_.end());

  if (dim_ == 1) {
    diameter_ = hi_x - lo_x;
  } else {
    std::vector<int> hull;
    for (const auto& f : boundary_) hull.push_back(f[0]);
    diameter_ = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i)
      for (std::size_t j = i + 1; j < hull.size(); ++j) diameter_ = std::max(diameter_, distance(point(hull[i]), point(hull[j])));
  }

  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(&dim_, sizeof dim_, h);
  h = fnv1a(coords_.data(), coords_.size() * sizeof(double), h);
  h = fnv1a(elements_.data(), elements_.size() * sizeof(int), h);
  fingerprint_ = h;
}

std::string Mesh::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint_));
  return buf;
}

double Mesh::distance_to_boundary(const Point& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : boundary_) {
    const double d = dim_ == 1 ? std::abs(p[0] - coords_[f[0]]) : segment_distance(p, point(f[0]), point(f[1]));
    best = std::min(best, d);
  }
  return best;
}

bool Mesh::contains(const Point& p) const {
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto t = element(e);
    if (dim_ == 1) {
      const double a = coords_[t[0]], b = coords_[t[1]];
      if (p[0] >= std::min(a, b) && p[0] <= std::max(a, b)) return true;
      continue;
    }
    const Point a = point(t[0]), b = point(t[1]), c = point(t[2]);
    auto cross = [](const Point& o, const Point& u, const Point& v) {
      return (u[0] - o[0]) * (v[1] - o[1]) - (v[0] - o[0]) * (u[1] - o[1]);
    };
    if (cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0) return true;
  }
  return false;
}

MeshPtr generate_interval(int n, double a, double b) {
  require(n >= 1, "interval mesh needs at least one element");
  require(a < b, "interval mesh needs a < b");
  std::vector<double> coords(n + 1);
  for (int i = 0; i <= n; ++i) coords[i] = a + (b - a) * (static_cast<double>(i) / n);
  coords[n] = b;
  std::vector<int> elements;
  elements.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    elements.push_back(i);
    elements.push_back(i + 1);
  }
  return Mesh::create(1, std::move(coords), std::move(elements));
}

MeshPtr generate_square(int n, SquarePattern pattern) {
  require(n >= 1, "square mesh needs n >= 1");
  std::vector<double> coords;
  coords.reserve(2 * (n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      coords.push_back(static_cast<double>(i) / n);
      coords.push_back(static_cast<double>(j) / n);
    }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<int> elements;
  elements.reserve(6 * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      const bool main_diagonal = pattern == SquarePattern::Uniform || (i + j) % 2 == 0;
      if (main_diagonal)
        elements.insert(elements.end(), {v00, v10, v11, v00, v11, v01});
      else
        elements.insert(elements.end(), {v00, v10, v01, v10, v11, v01});
    }
  return Mesh::create(2, std::move(coords), std::move(elements));
}

MeshPtr generate_disc(int n) {
  const int segments = std::max(n, 3);
  const int rings = std::max(1, static_cast<int>(std::lround(segments / (2.0 * std::numbers::pi))));
  std::vector<double> coords = {0.0, 0.0};
  std::vector<int> elements;
  std::vector<int> inner = {0};  // ring 0 is the centre
  for (int r = 1; r <= rings; ++r) {
    const int count = r == rings ? segments : std::max(3, static_cast<int>(std::lround(static_cast<double>(segments) * r / rings)));
    const double radius = static_cast<double>(r) / rings;
    std::vector<int> outer(count);
    for (int q = 0; q < count; ++q) {
      const double th = 2.0 * std::numbers::pi * q / count;
      outer[q] = static_cast<int>(coords.size() / 2);
      coords.push_back(radius * std::cos(th));
      coords.push_back(radius * std::sin(th));
    }
    if (inner.size() == 1) {
      for (int q = 0; q < count; ++q) elements.insert(elements.end(), {inner[0], outer[q], outer[(q + 1) % count]});
    } else {
      const int n_in = static_cast<int>(inner.size());
      int p = 0, q = 0;
      while (p < n_in || q < count) {
        const double next_out = static_cast<double>(q + 1) / count;
        const double next_in = static_cast<double>(p + 1) / n_in;
        if (q < count && (p == n_in || next_out <= next_in)) {
          elements.insert(elements.end(), {inner[p % n_in], outer[q], outer[(q + 1) % count]});
          ++q;
        } else {
          elements.insert(elements.end(), {inner[p % n_in], outer[q % count], inner[(p + 1) % n_in]});
          ++p;
        }
      }
    }
    inner = std::move(outer);
  }
  return Mesh::create(2, std::move(coords), std::move(elements));
}

MeshPtr mesh_from_spec(const std::string& spec) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  auto count = [&](std::size_t i) {
    if (parts.size() <= i) fail(ErrorKind::Validation, "mesh spec '" + spec + "' is missing the element count");
    try {
      return static_cast<int>(parse_long(parts[i], "mesh spec"));
    } catch (const Error&) {
      fail(ErrorKind::Validation, "mesh spec '" + spec + "' has a malformed element count");
    }
  };
  if (kind == "interval") {
    double a = 0.0, b = 1.0;
    if (parts.size() == 4) {
      a = parse_double(parts[2], "mesh spec");
      b = parse_double(parts[3], "mesh spec");
    } else if (parts.size() != 2) {
      fail(ErrorKind::Validation, "interval spec is interval:N or interval:N:a:b");
    }
    return generate_interval(count(1), a, b);
  }
  if (kind == "square") {
    SquarePattern pattern = SquarePattern::Alternating;
    if (parts.size() == 3 && parts[2] == "uniform")
      pattern = SquarePattern::Uniform;
    else if (parts.size() != 2)
      fail(ErrorKind::Validation, "square spec is square:N or square:N:uniform");
    return generate_square(count(1), pattern);
  }
  if (kind == "disc") {
    if (parts.size() != 2) fail(ErrorKind::Validation, "disc spec is disc:N");
    return generate_disc(count(1));
  }
  const std::string path = kind == "file" && parts.size() >= 2 ? spec.substr(5) : spec;
  return load_mesh(path);
}

MeshPtr parse_mesh(const std::string& text) {
  std::vector<std::pair<int, std::string>> lines;  // (line number, content without comments)
  {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto body = trim(line);
      if (!body.empty()) lines.emplace_back(number, std::string(body));
    }
  }
  auto parse_error = [](int line, const std::string& what) -> Error {
    return Error(ErrorKind::Parse, "mesh line " + std::to_string(line) + ": " + what);
  };
  std::size_t cursor = 0;
  auto next = [&](const char* expecting) -> const std::pair<int, std::string>& {
    if (cursor >= lines.size()) {
      const int last = lines.empty() ? 0 : lines.back().first;
      throw parse_error(last, std::string("unexpected end of file, expected ") + expecting);
    }
    return lines[cursor++];
  };
  auto fields = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  };

  const auto& header = next("header");
  int dim = 0;
  if (header.second == "fraclap-mesh v1 dim=1")
    dim = 1;
  else if (header.second == "fraclap-mesh v1 dim=2")
    dim = 2;
  else
    throw parse_error(header.first, "expected header 'fraclap-mesh v1 dim=<1|2>'");

  auto section = [&](const char* name) {
    const auto& line = next(name);
    const auto tok = fields(line.second);
    if (tok.size() != 2 || tok[0] != name) throw parse_error(line.first, std::string("expected '") + name + " <count>'");
    long n = 0;
    try {
      n = parse_long(tok[1], name);
    } catch (const Error&) {
      throw parse_error(line.first, "bad count");
    }
    if (n <= 0) throw parse_error(line.first, "count must be positive");
    return n;
  };

  const long nv = section("vertices");
  std::vector<double> coords;
  coords.reserve(nv * dim);
  for (long i = 0; i < nv; ++i) {
    const auto& line = next("vertex coordinates");
    const auto tok = fields(line.second);
    if (static_cast<int>(tok.size()) != dim) throw parse_error(line.first, "expected " + std::to_string(dim) + " coordinates");
    for (const auto& t : tok) {
      try {
        coords.push_back(parse_double(t, "coordinate"));
      } catch (const Error& e) {
        throw parse_error(line.first, e.what());
      }
    }
  }
  const long ne = section("elements");
  std::vector<int> elements;
  elements.reserve(ne * (dim + 1));
  for (long i = 0; i < ne; ++i) {
    const auto& line = next("element indices");
    const auto tok = fields(line.second);
    if (static_cast<int>(tok.size()) != dim + 1) throw parse_error(line.first, "expected " + std::to_string(dim + 1) + " vertex indices");
    for (const auto& t : tok) {
      long v = 0;
      try {
        v = parse_long(t, "vertex index");
      } catch (const Error& e) {
        throw parse_error(line.first, e.what());
      }
      if (v < 0 || v >= nv) throw parse_error(line.first, "vertex index " + t + " out of range");
      elements.push_back(static_cast<int>(v));
    }
  }
  if (cursor != lines.size()) throw parse_error(lines[cursor].first, "trailing content after elements");
  return Mesh::create(dim, std::move(coords), std::move(elements));
}

MeshPtr load_mesh(const std::string& path) { return parse_mesh(read_file(path)); }

std::string format_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out << "fraclap-mesh v1 dim=" << mesh.dim() << "\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point p = mesh.point(v);
    out << format_double(p[0]);
    if (mesh.dim() == 2) out << ' ' << format_double(p[1]);
    out << "\n";
  }
  out << "elements " << mesh.num_elements() << "\n";
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto t = mesh.element(e);
    for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << t[i];
    out << "\n";
  }
  return out.str();
}

void save_mesh(const Mesh& mesh, const std::string& path) { write_file_atomic(path, format_mesh(mesh)); }

double poincare_constant(const Mesh& mesh, FractionalOrder s) {
  return std::pow(mesh.diameter(), mesh.dim() + 2.0 * s.value()) / mesh.measure();
}

double integrate_nodal(const Mesh& mesh, const Eigen::VectorXd& coeffs) {
  require(static_cast<std::size_t>(coeffs.size()) == mesh.num_vertices(), "coefficient vector length differs from vertex count");
  double total = 0.0;
  const int k = mesh.vertices_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    double sum = 0.0;
    for (int v : mesh.element(e)) sum += coeffs[v];
    total += mesh.element_measure(e) * sum / k;
  }
  return total;
}

DiscreteFunction::DiscreteFunction(MeshPtr mesh, Eigen::VectorXd coeffs) : mesh_(std::move(mesh)), coeffs_(std::move(coeffs)) {
  require(mesh_ != nullptr, "discrete function needs a mesh");
  require(static_cast<std::size_t>(coeffs_.size()) == mesh_->num_vertices(), "coefficient vector length differs from vertex count");
}

DiscreteFunction DiscreteFunction::projected_zero_mean() const {
  DiscreteFunction out(mesh_, coeffs_.array() - integral() / mesh_->measure());
  out.zero_mean_ = true;
  return out;
}

DiscreteFunction& DiscreteFunction::certify_zero_mean() {
  const double scale = coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : 0.0;
  if (std::abs(integral()) > 1e-12 * mesh_->measure() * std::max(scale, 1e-300) && scale > 0.0)
    fail(ErrorKind::Validation, "function does not have zero mean");
  zero_mean_ = true;
  return *this;
}

}  // namespace fraclap
