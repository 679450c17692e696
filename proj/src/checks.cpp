#include "checks.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "forms.hpp"
#include "specfun.hpp"
#include "sweep.hpp"
#include "util.hpp"

namespace fraclap {

bool CheckReport::all_passed() const {
  for (const auto& i : items)
    if (i.failed) return false;
  return true;
}

std::string CheckReport::table() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %-20s %6s %6s  %s\n", "suite", "check", "rows", "failed", "status");
  os << buf;
  for (const auto& i : items) {
    std::snprintf(buf, sizeof buf, "%-10s %-20s %6zu %6zu  %s\n", i.suite.c_str(), i.check.c_str(), i.rows, i.failed,
                  i.failed ? "FAIL" : "pass");
    os << buf;
  }
  os << (all_passed() ? "all checks passed\n" : "some checks FAILED\n");
  return os.str();
}

namespace {

SweepTable closed_form_table(std::uint64_t seed) {
  SweepTable t{"closed_form", {"property", "case", "value", "reference", "pass"}, {}};
  auto row = [&](const std::string& prop, const std::string& c, double v, double ref, bool ok) {
    t.rows.push_back({prop, c, format_double(v), format_double(ref), ok ? "true" : "false"});
    (ok ? t.passed : t.failed) += 1;
  };
  for (int n = 1; n <= 3; ++n) {
    const double bound = 4.0 * std::tgamma(n / 2.0 + 1.0);
    double worst_fd = 0.0, top = 0.0;
    bool in_range = true;
    for (int i = 1; i <= 99; ++i) {
      const double s = i / 100.0;
      const double c = c_ns(Dimension(n), FractionalOrder(s));
      in_range = in_range && c > 0.0 && c <= bound;
      top = std::max(top, c);
      const double h = 1e-6;
      const double fd = (c_ns(Dimension(n), FractionalOrder(s + h)) - c_ns(Dimension(n), FractionalOrder(s - h))) / (2 * h);
      const double d = dc_ns(Dimension(n), FractionalOrder(s));
      worst_fd = std::max(worst_fd, std::abs(fd - d) / std::max(std::abs(d), 1e-3));
    }
    row("constant_range", "N=" + std::to_string(n), top, bound, in_range);
    row("derivative_vs_difference", "N=" + std::to_string(n), worst_fd, 1e-6, worst_fd < 1e-6);
  }
  Xorshift64Star rng(seed);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    // r in [1e-3, 10]: an absolute 1e-12 is only meaningful while r^{-2 sigma} stays moderate
    const double r = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
    const double sigma = 0.49 * rng.uniform();
    worst = std::max(worst, std::abs(std::pow(r, -2 * sigma) - 1 + 2 * sigma * psi_sigma(r, sigma) * std::log(r)));
  }
  row("psi_identity", "10000 samples", worst, 1e-12, worst <= 1e-12);
  std::size_t bad = 0, total = 0;
  for (int e = -60; e <= 60; ++e)
    for (double eps0 : {0.1, 0.5, 1.0}) {
      ++total;
      bad += !log_decay_bound(std::pow(10.0, e / 10.0), eps0, 1.0).holds();
    }
  row("log_decay", std::to_string(total) + " samples", static_cast<double>(bad), 0.0, bad == 0);
  return t;
}

SweepTable assembly_table(const std::string& spec, int threads) {
  SweepTable t{"assembly", {"mesh", "s", "symmetry", "row_sum", "second_eigenvalue", "pass"}, {}};
  const auto mesh = mesh_from_spec(spec);
  auto opts = default_assembly(mesh->dim());
  opts.threads = threads;
  for (double s : {0.25, 0.5, 0.75}) {
    const auto a = assemble(*mesh, {Dimension(mesh->dim()), FractionalOrder(s), Weight::Plain}, opts);
    const double scale = a.mat.cwiseAbs().maxCoeff();
    const double sym = (a.mat - a.mat.transpose()).cwiseAbs().maxCoeff() / scale;
    const double rows = a.mat.rowwise().sum().cwiseAbs().maxCoeff() / a.mat.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const bool ok = sym <= 1e-12 && rows < 1e-8 && ev[0] > -1e-10 * ev[ev.size() - 1] && ev[1] > 1e-8 * ev[ev.size() - 1];
    t.rows.push_back({spec, format_double(s), format_double(sym), format_double(rows), format_double(ev[1]), ok ? "true" : "false"});
    (ok ? t.passed : t.failed) += 1;
  }
  return t;
}

}  // namespace

CheckReport run_check_suite(const std::string& out_dir, std::uint64_t seed, int threads) {
  CheckReport report;
  namespace fs = std::filesystem;
  auto keep = [&](const std::string& suite, const SweepTable& t, const fs::path& dir) {
    fs::create_directories(dir);
    write_file_atomic((dir / (t.check + ".csv")).string(), t.csv());
    report.items.push_back({suite, t.check, t.rows.size(), t.failed});
  };

  keep("scalar", closed_form_table(seed), fs::path(out_dir) / "scalar");
  keep("interval", assembly_table("interval:32", threads), fs::path(out_dir) / "interval");
  keep("square", assembly_table("square:4", threads), fs::path(out_dir) / "square");

  SweepConfig line;
  line.mesh = "interval:64";
  line.s_grid = {0.3, 0.4, 0.5, 0.6, 0.7};
  line.sigma_ladder = {1e-1, 1e-2, 1e-3, 1e-4};
  line.f = "cospix";
  line.phi = "bump";
  line.psi = "legendre2";
  line.checks = check_names();
  line.seed = seed;
  line.output_dir = (fs::path(out_dir) / "interval").string();

  SweepConfig square;
  square.mesh = "square:8";
  square.s_grid = {0.4, 0.5};
  square.sigma_ladder = {1e-1, 1e-2, 1e-3, 1e-4};
  square.phi = "bump";
  square.psi = "legendre2";
  square.checks = {"eigen_continuity", "dlambda", "form_continuity", "poincare"};
  square.seed = seed;
  square.output_dir = (fs::path(out_dir) / "square").string();

  for (const auto& [suite, cfg] : {std::pair{"interval", line}, std::pair{"square", square}}) {
    const SweepResult r = run_sweep(cfg, threads);
    for (const auto& t : r.tables) report.items.push_back({suite, t.check, t.rows.size(), t.failed});
  }
  return report;
}

}  // namespace fraclap
