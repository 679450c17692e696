#include "sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <json.hpp>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "functions.hpp"
#include "parallel.hpp"
#include "solve.hpp"
#include "util.hpp"

namespace fraclap {

using json = nlohmann::json;

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"solution_continuity", "diff_quotient", "eigen_continuity",
                                                 "dlambda", "form_continuity", "poincare"};
  return names;
}

namespace {

std::vector<double> read_reals(const json& j, const char* key) {
  if (!j.is_array()) fail(ErrorKind::Parse, std::string("config key '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorKind::Parse, std::string("config key '") + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void validate(const SweepConfig& c) {
  if (c.checks.empty()) fail(ErrorKind::Validation, "config lists no checks");
  if (c.s_grid.empty()) fail(ErrorKind::Validation, "s_grid is empty");
  for (std::size_t i = 1; i < c.s_grid.size(); ++i)
    if (!(c.s_grid[i] > c.s_grid[i - 1])) fail(ErrorKind::Validation, "s_grid must be strictly ascending");
  double top_sigma = 0.0;
  for (double sg : c.sigma_ladder) {
    if (!(sg > 0.0)) fail(ErrorKind::Validation, "sigma_ladder values must be positive");
    top_sigma = std::max(top_sigma, sg);
  }
  for (double s : c.s_grid)
    if (!(s > 0.02 && s + top_sigma < 0.98))
      fail(ErrorKind::Validation, "s = " + format_double(s) + " (plus the largest sigma) leaves the band (0.02, 0.98)");
  const bool needs_ladder = std::count(c.checks.begin(), c.checks.end(), "diff_quotient") ||
                            std::count(c.checks.begin(), c.checks.end(), "dlambda");
  if (needs_ladder && c.sigma_ladder.empty()) fail(ErrorKind::Validation, "sigma_ladder is required by diff_quotient and dlambda");
  if (c.k < 1) fail(ErrorKind::Validation, "k must be at least 1");
  if (c.probes < 1) fail(ErrorKind::Validation, "probes must be at least 1");
  if (!(c.tol.refine_lo > 0.0 && c.tol.refine_hi > c.tol.refine_lo)) fail(ErrorKind::Validation, "refinement band is empty");
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Parse, "config must be a JSON object");
  SweepConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "mesh") c.mesh = v.get<std::string>();
      else if (key == "s_grid") c.s_grid = read_reals(v, "s_grid");
      else if (key == "sigma_ladder") c.sigma_ladder = read_reals(v, "sigma_ladder");
      else if (key == "f") c.f = v.get<std::string>();
      else if (key == "phi") c.phi = v.get<std::string>();
      else if (key == "psi") c.psi = v.get<std::string>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "k") c.k = v.get<int>();
      else if (key == "probes") c.probes = v.get<int>();
      else if (key == "checks") {
        for (const auto& name : v) {
          const auto n = name.get<std::string>();
          if (std::find(check_names().begin(), check_names().end(), n) == check_names().end())
            fail(ErrorKind::Parse, "unknown check '" + n + "'");
          if (std::find(c.checks.begin(), c.checks.end(), n) == c.checks.end()) c.checks.push_back(n);
        }
      } else if (key == "tolerances") {
        for (const auto& [tk, tv] : v.items()) {
          const double x = tv.get<double>();
          if (tk == "quad_tol") c.tol.quad_tol = x;
          else if (tk == "gap_tol") c.tol.gap_tol = x;
          else if (tk == "refine_lo") c.tol.refine_lo = x;
          else if (tk == "refine_hi") c.tol.refine_hi = x;
          else if (tk == "order_min") c.tol.order_min = x;
          else if (tk == "quotient_slack") c.tol.quotient_slack = x;
          else if (tk == "poincare_slack") c.tol.poincare_slack = x;
          else fail(ErrorKind::Parse, "unknown tolerance '" + tk + "'");
        }
      } else {
        fail(ErrorKind::Parse, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("config has a value of the wrong type: ") + e.what());
  }
  validate(c);
  return c;
}

std::string sweep_config_json(const SweepConfig& c) {
  json j;
  j["mesh"] = c.mesh;
  j["s_grid"] = c.s_grid;
  j["sigma_ladder"] = c.sigma_ladder;
  j["f"] = c.f;
  j["phi"] = c.phi;
  j["psi"] = c.psi;
  j["checks"] = c.checks;
  j["tolerances"] = {{"quad_tol", c.tol.quad_tol},       {"gap_tol", c.tol.gap_tol},
                     {"refine_lo", c.tol.refine_lo},     {"refine_hi", c.tol.refine_hi},
                     {"order_min", c.tol.order_min},     {"quotient_slack", c.tol.quotient_slack},
                     {"poincare_slack", c.tol.poincare_slack}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["k"] = c.k;
  j["probes"] = c.probes;
  return j.dump(2);
}

std::string SweepTable::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

SweepContext::SweepContext(SweepConfig cfg, int threads) : cfg_(std::move(cfg)) {
  validate(cfg_);
  mesh_ = mesh_from_spec(cfg_.mesh);
  opts_ = default_assembly(mesh_->dim());
  if (cfg_.tol.quad_tol > 0.0) opts_.quad.tol = cfg_.tol.quad_tol;
  opts_.threads = threads;
}

std::shared_ptr<const Discretization> SweepContext::at(double s) {
  const long long key = std::llround(s * 1e12);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto d = Discretization::build(mesh_, FractionalOrder(s), opts_);
  cache_.emplace(key, d);
  return d;
}

DiscreteFunction SweepContext::data(const std::string& spec) const {
  if (spec.rfind("file:", 0) == 0) {
    Eigen::VectorXd v(mesh_->num_vertices());
    std::istringstream in(read_file(spec.substr(5)));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const auto body = trim(line);
      if (body.empty()) continue;
      if (n >= mesh_->num_vertices()) fail(ErrorKind::Parse, "nodal file has more values than the mesh has vertices");
      v[n++] = parse_double(body, "nodal value");
    }
    if (n != mesh_->num_vertices()) fail(ErrorKind::Parse, "nodal file has fewer values than the mesh has vertices");
    return DiscreteFunction(mesh_, v);
  }
  return DiscreteFunction(mesh_, interpolate(*mesh_, analytic_function(spec, mesh_->dim())));
}

namespace {

std::string fmt(double x) { return format_double(x); }

double l2(const Discretization& d, const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(d.m.mat * v))); }

// Common trailing provenance columns.
struct Provenance {
  std::string mesh_id, quad_tol;
  int dim;
  std::vector<std::string> fields(double s, const std::string& tolerance) const {
    return {KernelSpec{Dimension(dim), FractionalOrder(s), Weight::Plain}.describe(), mesh_id, quad_tol, tolerance};
  }
  static std::vector<std::string> header() { return {"kernel", "mesh_fingerprint", "quad_tol", "tolerance"}; }
};

Provenance provenance(SweepContext& ctx) {
  return {ctx.mesh()->fingerprint_hex(), fmt(ctx.assembly().quad.tol), ctx.mesh()->dim()};
}

std::vector<std::string> make_header(std::vector<std::string> middle) {
  std::vector<std::string> h = {"check", "s", "sigma"};
  h.insert(h.end(), middle.begin(), middle.end());
  h.push_back("pass");
  for (auto& p : Provenance::header()) h.push_back(p);
  return h;
}

void add_row(SweepTable& t, const Provenance& p, double s, const std::string& sigma, std::vector<std::string> middle,
             bool pass, const std::string& tolerance) {
  std::vector<std::string> row = {t.check, fmt(s), sigma};
  row.insert(row.end(), middle.begin(), middle.end());
  row.push_back(pass ? "true" : "false");
  for (auto& f : p.fields(s, tolerance)) row.push_back(f);
  t.rows.push_back(std::move(row));
  (pass ? t.passed : t.failed) += 1;
}

std::string band(const SweepTolerances& tol) { return "ratio in [" + fmt(tol.refine_lo) + "," + fmt(tol.refine_hi) + "]"; }

// increment over [s, s+h] against the one over [s, s+h/2]
struct Refinement {
  double full, half;
  std::string ratio;
  bool pass;
};

Refinement refine(double full, double half, const SweepTolerances& tol) {
  if (full == 0.0 && half == 0.0) return {0.0, 0.0, "", true};
  if (half == 0.0) return {full, half, "inf", false};
  const double r = full / half;
  return {full, half, fmt(r), r >= tol.refine_lo && r <= tol.refine_hi};
}

// least-squares slope of log(err) against log(sigma) over the last three points
double ls_order(const std::vector<double>& sigma, const std::vector<double>& err) {
  const std::size_t n = sigma.size();
  const std::size_t from = n >= 3 ? n - 3 : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = from; i < n; ++i) {
    if (!(err[i] > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(sigma[i]), y = std::log(err[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<double> descending(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

SweepTable run_solution_continuity(SweepContext& ctx) {
  const auto& cfg = ctx.config();
  SweepTable t{"solution_continuity", make_header({"u_norm", "increment", "half_increment", "ratio"}), {}};
  const auto prov = provenance(ctx);
  const DiscreteFunction f = ctx.data(cfg.f);
  auto solve_at = [&](double s) { return poisson_solve(*ctx.at(s)->system, f).u.coeffs(); };
  const auto& grid = cfg.s_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const auto d = ctx.at(s);
    const Eigen::VectorXd u = solve_at(s);
    if (i + 1 == grid.size()) {
      add_row(t, prov, s, "", {fmt(l2(*d, u)), "", "", ""}, true, band(cfg.tol));
      continue;
    }
    const double h = grid[i + 1] - s;
    const Eigen::VectorXd next = solve_at(grid[i + 1]), mid = solve_at(s + 0.5 * h);
    const auto r = refine(l2(*d, next - u), l2(*d, mid - u), cfg.tol);
    add_row(t, prov, s, fmt(h), {fmt(l2(*d, u)), fmt(r.full), fmt(r.half), r.ratio}, r.pass, band(cfg.tol));
  }
  return t;
}

SweepTable run_diff_quotient(SweepContext& ctx) {
  const auto& cfg = ctx.config();
  SweepTable t{"diff_quotient", make_header({"error", "w_norm", "pairwise_order", "ls_order"}), {}};
  const auto prov = provenance(ctx);
  const DiscreteFunction f = ctx.data(cfg.f);
  const auto ladder = descending(cfg.sigma_ladder);
  for (double s : cfg.s_grid) {
    const auto d = ctx.at(s);
    const auto u = poisson_solve(*d->system, f).u;
    const auto w = s_derivative_solve(*d->system, f, u, d->forms.log).w;
    std::vector<double> err;
    for (double sg : ladder) {
      const Eigen::VectorXd us = poisson_solve(*ctx.at(s + sg)->system, f).u.coeffs();
      err.push_back(l2(*d, (us - u.coeffs()) / sg - w.coeffs()));
    }
    const double order = ls_order(ladder, err);
    const bool all_zero = std::all_of(err.begin(), err.end(), [](double e) { return e == 0.0; });
    const std::string tol = "strictly decreasing; ls_order >= " + fmt(cfg.tol.order_min);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      bool pass = all_zero || i == 0 || err[i] < err[i - 1];
      std::string pairwise;
      if (i > 0 && err[i] > 0 && err[i - 1] > 0) pairwise = fmt(std::log(err[i - 1] / err[i]) / std::log(ladder[i - 1] / ladder[i]));
      if (i + 1 == ladder.size() && !all_zero && ladder.size() >= 3) pass = pass && order >= cfg.tol.order_min;
      add_row(t, prov, s, fmt(ladder[i]), {fmt(err[i]), fmt(l2(*d, w.coeffs())), pairwise, std::isnan(order) ? "" : fmt(order)},
              pass, tol);
    }
  }
  return t;
}

SweepTable run_eigen_continuity(SweepContext& ctx) {
  const auto& cfg = ctx.config();
  SweepTable t{"eigen_continuity", make_header({"k", "lambda", "cluster", "increment", "half_increment", "ratio"}), {}};
  const auto prov = provenance(ctx);
  const auto& grid = cfg.s_grid;
  auto spectrum = [&](double s) { return eig(*ctx.at(s)->system, *ctx.mesh(), cfg.k, cfg.tol.gap_tol); };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const Spectrum sp = spectrum(s);
    std::vector<int> cluster_of(cfg.k);
    for (std::size_t c = 0; c < sp.clusters.size(); ++c)
      for (int idx : sp.clusters[c]) cluster_of[idx] = static_cast<int>(c) + 1;
    const bool last = i + 1 == grid.size();
    Spectrum next, mid;
    double h = 0.0;
    if (!last) {
      h = grid[i + 1] - s;
      next = spectrum(grid[i + 1]);
      mid = spectrum(s + 0.5 * h);
    }
    for (int k = 0; k < cfg.k; ++k) {
      const double lam = sp.eigenvalues[k];
      const bool ordered = lam > 0.0 && (k == 0 || lam >= sp.eigenvalues[k - 1]);
      if (last) {
        add_row(t, prov, s, "", {std::to_string(k + 1), fmt(lam), std::to_string(cluster_of[k]), "", "", ""}, ordered,
                band(cfg.tol));
        continue;
      }
      const auto r = refine(std::abs(next.eigenvalues[k] - lam), std::abs(mid.eigenvalues[k] - lam), cfg.tol);
      add_row(t, prov, s, fmt(h),
              {std::to_string(k + 1), fmt(lam), std::to_string(cluster_of[k]), fmt(r.full), fmt(r.half), r.ratio},
              ordered && r.pass, band(cfg.tol));
    }
  }
  return t;
}

SweepTable run_dlambda_check(SweepContext& ctx) {
  const auto& cfg = ctx.config();
  SweepTable t{"dlambda", make_header({"lambda1", "multiplicity", "gap_tol", "dlambda_plus", "quotient", "gap"}), {}};
  const auto prov = provenance(ctx);
  const auto ladder = descending(cfg.sigma_ladder);
  for (double s : cfg.s_grid) {
    const auto d = ctx.at(s);
    const Spectrum sp = eig(*d->system, *ctx.mesh(), 1, cfg.tol.gap_tol);
    const EigenDerivative dl = dlambda_plus(*d->system, sp, d->forms.log);
    const bool simple = dl.multiplicity == 1;
    const std::string tol = simple ? "|gap| decreasing" : "quotient >= dlambda_plus - " + fmt(cfg.tol.quotient_slack);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double sg : ladder) {
      const double lam = eig(*ctx.at(s + sg)->system, *ctx.mesh(), 1, cfg.tol.gap_tol).eigenvalues[0];
      const double q = (lam - dl.lambda1) / sg;
      const double gap = q - dl.dplus;
      const bool pass = simple ? std::abs(gap) < prev_gap : q >= dl.dplus - cfg.tol.quotient_slack;
      prev_gap = std::abs(gap);
      add_row(t, prov, s, fmt(sg),
              {fmt(dl.lambda1), std::to_string(dl.multiplicity), fmt(dl.gap_tol), fmt(dl.dplus), fmt(q), fmt(gap)}, pass, tol);
    }
  }
  return t;
}

SweepTable run_form_continuity(SweepContext& ctx) {
  const auto& cfg = ctx.config();
  SweepTable t{"form_continuity", make_header({"energy", "energy_swapped", "increment", "half_increment", "ratio"}), {}};
  const auto prov = provenance(ctx);
  const DiscreteFunction phi = ctx.data(cfg.phi), psi = ctx.data(cfg.psi);
  auto e = [&](double s) { return energy(phi, psi, ctx.at(s)->forms.plain); };
  const auto& grid = cfg.s_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const double val = e(s), swapped = energy(psi, phi, ctx.at(s)->forms.plain);
    // relative to the Cauchy-Schwarz bound, since E_s(phi,psi) itself may vanish
    const auto& a = ctx.at(s)->forms.plain;
    const double cs = std::sqrt(std::abs(energy(phi, phi, a) * energy(psi, psi, a)));
    const bool symmetric = std::abs(val - swapped) <= 1e-12 * cs;
    if (i + 1 == grid.size()) {
      add_row(t, prov, s, "", {fmt(val), fmt(swapped), "", "", ""}, symmetric, band(cfg.tol));
      continue;
    }
    const double h = grid[i + 1] - s;
    const auto r = refine(std::abs(e(grid[i + 1]) - val), std::abs(e(s + 0.5 * h) - val), cfg.tol);
    add_row(t, prov, s, fmt(h), {fmt(val), fmt(swapped), fmt(r.full), fmt(r.half), r.ratio}, symmetric && r.pass,
            band(cfg.tol));
  }
  return t;
}

SweepTable run_poincare(SweepContext& ctx) {
  const auto& cfg = ctx.config();
  SweepTable t{"poincare", make_header({"probe", "l2_squared", "gamma_seminorm_squared", "ratio"}), {}};
  const auto prov = provenance(ctx);
  const std::size_t n = ctx.mesh()->num_vertices();
  for (double s : cfg.s_grid) {
    const auto d = ctx.at(s);
    const double gamma = poincare_constant(*ctx.mesh(), FractionalOrder(s));
    Xorshift64Star rng(cfg.seed);
    for (int p = 0; p < cfg.probes; ++p) {
      Eigen::VectorXd u(n);
      for (std::size_t v = 0; v < n; ++v) u[v] = 2.0 * rng.uniform() - 1.0;
      u.array() -= d->system->mass_of_one().dot(u) / ctx.mesh()->measure();
      const double lhs = u.dot(d->m.mat * u), rhs = gamma * u.dot(d->forms.plain.mat * u);
      add_row(t, prov, s, "", {std::to_string(p), fmt(lhs), fmt(rhs), fmt(lhs / rhs)},
              lhs <= rhs * (1.0 + cfg.tol.poincare_slack), "l2_squared <= gamma_seminorm_squared");
    }
  }
  return t;
}

SweepTable run_check(SweepContext& ctx, const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  SweepTable t;
  if (name == "solution_continuity") t = run_solution_continuity(ctx);
  else if (name == "diff_quotient") t = run_diff_quotient(ctx);
  else if (name == "eigen_continuity") t = run_eigen_continuity(ctx);
  else if (name == "dlambda") t = run_dlambda_check(ctx);
  else if (name == "form_continuity") t = run_form_continuity(ctx);
  else if (name == "poincare") t = run_poincare(ctx);
  else fail(ErrorKind::Validation, "unknown check '" + name + "'");
  t.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

bool SweepResult::all_passed() const {
  return std::all_of(tables.begin(), tables.end(), [](const SweepTable& t) { return t.failed == 0; });
}

SweepResult run_sweep(const SweepConfig& cfg, int threads) {
  SweepContext ctx(cfg, threads);
  SweepResult result;
  // fixed order so the output does not depend on how the config lists the checks
  for (const auto& name : check_names())
    if (std::count(cfg.checks.begin(), cfg.checks.end(), name)) result.tables.push_back(run_check(ctx, name));

  std::filesystem::create_directories(cfg.output_dir);
  json manifest;
  manifest["tool"] = "fraclap";
  manifest["version"] = "0.3.0";
  manifest["config"] = json::parse(sweep_config_json(cfg));
  manifest["seed"] = cfg.seed;
  manifest["prng"] = "xorshift64*";
  manifest["threads"] = resolve_threads(threads);
  manifest["mesh_fingerprint"] = ctx.mesh()->fingerprint_hex();
  manifest["quad_tol"] = ctx.assembly().quad.tol;
  manifest["notes"] = {"refinement bands for increment ratios are engineering choices, not constants from theory",
                       "gap_tol 0 means 1e-6 times the first eigenvalue"};
  for (const auto& t : result.tables) {
    write_file_atomic((std::filesystem::path(cfg.output_dir) / (t.check + ".csv")).string(), t.csv());
    manifest["checks"][t.check] = {{"rows", t.rows.size()}, {"passed", t.passed}, {"failed", t.failed},
                                   {"wall_seconds", t.wall_seconds}};
  }
  manifest["all_passed"] = result.all_passed();
  write_file_atomic((std::filesystem::path(cfg.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return result;
}

}  // namespace fraclap
