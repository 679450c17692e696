// fraclap command-line front end. Talks to the library only through the C interface.
#include <fraclap/fraclap.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0, kDomain = 1, kUsage = 2;

struct Failure {
  int code;
  std::string what;
};

void check(fraclap_status st) {
  if (st != FRACLAP_OK) throw Failure{kDomain, fraclap_last_error()};
}

void warn_if_any() {
  if (const char* w = fraclap_last_warning(); w && *w) std::cerr << "warning: " << w << "\n";
}

std::string num(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Failure{kDomain, "cannot open '" + tmp + "' for writing"};
    out << text;
    if (!out) throw Failure{kDomain, "write to '" + tmp + "' failed"};
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Failure{kDomain, "cannot rename onto '" + path + "': " + ec.message()};
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw Failure{kUsage, "not a number list: '" + text + "'"};
    out.push_back(v);
  }
  return out;
}

struct MeshHandle {
  fraclap_mesh* p = nullptr;
  explicit MeshHandle(const std::string& spec) { check(fraclap_mesh_create(spec.c_str(), &p)); }
  ~MeshHandle() { fraclap_mesh_free(p); }
  std::size_t vertices() const {
    size_t n = 0;
    check(fraclap_mesh_info(p, nullptr, &n, nullptr, nullptr, nullptr));
    return n;
  }
  int dim() const {
    int d = 0;
    check(fraclap_mesh_info(p, &d, nullptr, nullptr, nullptr, nullptr));
    return d;
  }
};

struct ProblemHandle {
  fraclap_problem* p = nullptr;
  ProblemHandle(const MeshHandle& m, double s, double tol) { check(fraclap_problem_create(m.p, s, tol, &p)); }
  ~ProblemHandle() { fraclap_problem_free(p); }
};

// Flags shared by the commands that discretise at one order.
struct Common {
  std::string mesh;
  double s = 0.5;
  double tol = 0.0;
};

CLI::Validator open_unit() {
  return CLI::Validator(
      [](std::string& in) -> std::string {
        double v = 0;
        auto [p, ec] = std::from_chars(in.data(), in.data() + in.size(), v);
        if (ec != std::errc() || p != in.data() + in.size()) return "s must be a number";
        if (!(v > 0.0 && v < 1.0)) return "s must lie in the open interval (0,1), got " + in;
        return {};
      },
      "in (0,1)");
}

void add_common(CLI::App* cmd, Common& c, bool need_s = true) {
  cmd->add_option("--mesh", c.mesh, "interval:N[:a:b], square:N[:uniform], disc:N or a mesh file")->required();
  auto* s = cmd->add_option("--s", c.s, "fractional order")->check(open_unit());
  if (need_s) s->required();
  cmd->add_option("--tol", c.tol, "per-pair quadrature tolerance (0: 1e-9 in 1D, 1e-7 in 2D)")->capture_default_str();
}

std::vector<double> nodal_data(const MeshHandle& mesh, const std::string& spec) {
  const std::size_t n = mesh.vertices();
  std::vector<double> out(n);
  if (spec.rfind("file:", 0) != 0) {
    check(fraclap_interpolate(mesh.p, spec.c_str(), out.data()));
    return out;
  }
  std::ifstream in(spec.substr(5));
  if (!in) throw Failure{kDomain, "cannot read '" + spec.substr(5) + "'"};
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::stringstream ls(line);
    double v;
    if (!(ls >> v)) continue;
    if (k == n) throw Failure{kDomain, "nodal file has more values than the mesh has vertices"};
    out[k++] = v;
  }
  if (k != n) throw Failure{kDomain, "nodal file has fewer values than the mesh has vertices"};
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraclap: regional fractional Laplacian toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: FRACLAP_THREADS or all cores)")->capture_default_str();

  Common common;

  auto* assemble = app.add_subcommand("assemble", "assemble a nonlocal matrix and write it in Matrix Market format");
  std::string weight = "plain", out;
  add_common(assemble, common);
  assemble->add_option("--weight", weight, "plain or log")->check(CLI::IsMember({"plain", "log"}))->capture_default_str();
  assemble->add_option("--out", out, "output .mtx path")->required();

  auto* solve = app.add_subcommand("solve", "zero-mean Poisson solve; writes nodal values as CSV");
  std::string f = "cospix";
  bool with_derivative = false;
  add_common(solve, common);
  solve->add_option("--f", f, "named function (cospix, legendre2, bump, ...) or file:<nodal values>")->capture_default_str();
  solve->add_option("--out", out, "output CSV path")->required();
  solve->add_flag("--derivative", with_derivative, "also write the s-derivative of the solution");

  auto* eig = app.add_subcommand("eig", "first nontrivial eigenvalues");
  int k = 3;
  double gap_tol = 0.0;
  std::string vec_out;
  add_common(eig, common);
  eig->add_option("--k", k, "number of eigenvalues")->check(CLI::PositiveNumber)->capture_default_str();
  eig->add_option("--gap-tol", gap_tol, "cluster gap (0: 1e-6 lambda_1)")->capture_default_str();
  eig->add_option("--out", vec_out, "optional CSV for the eigenvectors");

  auto* dlambda = app.add_subcommand("dlambda", "right derivative of the first nontrivial eigenvalue in s");
  std::string ladder;
  add_common(dlambda, common);
  dlambda->add_option("--gap-tol", gap_tol, "cluster gap (0: 1e-6 lambda_1)")->capture_default_str();
  dlambda->add_option("--sigma-ladder", ladder, "comma-separated steps for forward quotients, e.g. 1e-1,1e-2");

  auto* pv = app.add_subcommand("pv", "principal-value operator of a named function at points");
  std::string phi = "quadratic";
  std::vector<std::string> points;
  double radius = 0.0;
  add_common(pv, common);
  pv->add_option("--phi", phi, "named function")->capture_default_str();
  pv->add_option("--at", points, "evaluation point x or x,y (repeatable)")->required();
  pv->add_option("--radius", radius, "ball radius (0: default)")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "run a JSON sweep config");
  std::string config, out_dir;
  sweep->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory (overrides the config)");

  auto* checkcmd = app.add_subcommand("check", "run the built-in property suite");
  std::string check_dir = "fraclap-check";
  unsigned long long seed = 1;
  checkcmd->add_option("--out", check_dir, "output directory")->capture_default_str();
  checkcmd->add_option("--seed", seed, "seed for random probes")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  fraclap_set_threads(threads);
  try {
    if (assemble->parsed()) {
      MeshHandle mesh(common.mesh);
      ProblemHandle prob(mesh, common.s, common.tol);
      check(fraclap_problem_write_matrix(prob.p, weight == "log" ? FRACLAP_LOG : FRACLAP_PLAIN, out.c_str()));
      std::cout << "wrote " << out << "\n";
    } else if (solve->parsed()) {
      MeshHandle mesh(common.mesh);
      ProblemHandle prob(mesh, common.s, common.tol);
      const std::size_t n = mesh.vertices();
      std::vector<double> u(n), w;
      double residual = 0.0;
      std::vector<double> data = nodal_data(mesh, f);
      check(fraclap_solve(prob.p, data.data(), u.data(), &residual));
      warn_if_any();
      if (with_derivative) {
        w.resize(n);
        check(fraclap_solve_derivative(prob.p, data.data(), w.data()));
      }
      std::string csv = mesh.dim() == 1 ? "vertex,x,u" : "vertex,x,y,u";
      csv += with_derivative ? ",w\r\n" : "\r\n";
      for (std::size_t v = 0; v < n; ++v) {
        double xy[2];
        check(fraclap_mesh_vertex(mesh.p, v, xy));
        csv += std::to_string(v) + "," + num(xy[0]) + (mesh.dim() == 2 ? "," + num(xy[1]) : "") + "," + num(u[v]);
        if (with_derivative) csv += "," + num(w[v]);
        csv += "\r\n";
      }
      write_atomic(out, csv);
      std::cout << "residual " << num(residual) << "\nwrote " << out << "\n";
    } else if (eig->parsed()) {
      MeshHandle mesh(common.mesh);
      ProblemHandle prob(mesh, common.s, common.tol);
      const std::size_t n = mesh.vertices();
      std::vector<double> values(k), vectors(n * k);
      std::vector<int> cluster(k);
      check(fraclap_eig(prob.p, k, gap_tol, values.data(), vectors.data(), cluster.data()));
      std::cout << "index,lambda,cluster\n";
      for (int i = 0; i < k; ++i) std::cout << i + 1 << "," << num(values[i]) << "," << cluster[i] << "\n";
      if (!vec_out.empty()) {
        std::string csv = "vertex";
        for (int i = 0; i < k; ++i) csv += ",v" + std::to_string(i + 1);
        csv += "\r\n";
        for (std::size_t v = 0; v < n; ++v) {
          csv += std::to_string(v);
          for (int i = 0; i < k; ++i) csv += "," + num(vectors[i * n + v]);
          csv += "\r\n";
        }
        write_atomic(vec_out, csv);
      }
    } else if (dlambda->parsed()) {
      const std::vector<double> sigmas = ladder.empty() ? std::vector<double>{} : parse_list(ladder);
      for (double sg : sigmas)
        if (!(sg > 0.0 && common.s + sg < 1.0)) throw Failure{kUsage, "each sigma must be positive with s + sigma < 1"};
      MeshHandle mesh(common.mesh);
      ProblemHandle prob(mesh, common.s, common.tol);
      double dplus = 0, lambda1 = 0;
      int mult = 0;
      check(fraclap_dlambda(prob.p, gap_tol, &dplus, &lambda1, &mult, nullptr));
      std::cout << "dlambda_plus " << num(dplus) << "\nlambda1 " << num(lambda1) << "\nmultiplicity " << mult << "\n";
      if (!sigmas.empty()) std::cout << "sigma,quotient,gap\n";
      for (double sg : sigmas) {
        ProblemHandle shifted(mesh, common.s + sg, common.tol);
        double lam = 0;
        check(fraclap_eig(shifted.p, 1, gap_tol, &lam, nullptr, nullptr));
        const double q = (lam - lambda1) / sg;
        std::cout << num(sg) << "," << num(q) << "," << num(q - dplus) << "\n";
      }
    } else if (pv->parsed()) {
      std::vector<std::vector<double>> at;
      for (const auto& p : points) {
        at.push_back(parse_list(p));
        if (at.back().empty() || at.back().size() > 2) throw Failure{kUsage, "--at takes x or x,y"};
      }
      MeshHandle mesh(common.mesh);
      std::cout << "x,y,value\n";
      for (auto& p : at) {
        p.resize(2, 0.0);
        double v = 0;
        check(fraclap_pv(mesh.p, phi.c_str(), common.s, p.data(), radius, &v));
        std::cout << num(p[0]) << "," << num(p[1]) << "," << num(v) << "\n";
      }
    } else if (sweep->parsed()) {
      std::ifstream in(config);
      std::stringstream text;
      text << in.rdbuf();
      int ok = 0;
      const fraclap_status st = fraclap_sweep_run(text.str().c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &ok);
      if (st == FRACLAP_E_PARSE || st == FRACLAP_E_VALIDATION) throw Failure{kUsage, fraclap_last_error()};
      check(st);
      std::cout << (ok ? "sweep passed\n" : "sweep finished with failing rows\n");
      return ok ? kOk : kDomain;
    } else if (checkcmd->parsed()) {
      char* report = nullptr;
      int ok = 0;
      check(fraclap_check_run(check_dir.c_str(), seed, &report, &ok));
      std::cout << report;
      fraclap_string_free(report);
      return ok ? kOk : kDomain;
    }
  } catch (const Failure& e) {
    std::cerr << (e.code == kUsage ? "usage error: " : "error: ") << e.what << "\n";
    return e.code;
  }
  return kOk;
}
