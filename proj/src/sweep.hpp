#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "forms.hpp"

namespace fraclap {

/// xorshift64* (Vigna). Same stream on every platform for a given seed.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}
  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 2685821657736338717ull;
  }
  /// Uniform in [0,1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct SweepTolerances {
  double quad_tol = 0.0;        // 0: dimension default
  double gap_tol = 0.0;         // 0: 1e-6 lambda_1
  double refine_lo = 1.33;      // band for increment(h) / increment(h/2)
  double refine_hi = 3.0;
  double order_min = 0.8;       // least-squares order over the last three ladder points
  double quotient_slack = 1e-6; // clustered case: quotient >= dlambda_plus - slack
  double poincare_slack = 0.0;  // relative
};

struct SweepConfig {
  std::string mesh = "interval:64";
  std::vector<double> s_grid;
  std::vector<double> sigma_ladder;
  std::string f = "cospix";
  std::string phi = "bump";
  std::string psi = "legendre2";
  std::vector<std::string> checks;
  SweepTolerances tol;
  std::string output_dir = "sweep-out";
  std::uint64_t seed = 1;
  int k = 3;
  int probes = 200;
};

/// Names accepted in "checks".
const std::vector<std::string>& check_names();

/// Parses the JSON config; unknown keys and unknown check names are rejected.
SweepConfig parse_sweep_config(const std::string& json_text);
std::string sweep_config_json(const SweepConfig& cfg);

/// One CSV table: fixed header, rows of already formatted fields.
struct SweepTable {
  std::string check;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double wall_seconds = 0.0;

  std::string csv() const;
};

/// Caches assembled discretizations per order within one run.
class SweepContext {
 public:
  SweepContext(SweepConfig cfg, int threads = 0);
  const SweepConfig& config() const { return cfg_; }
  const MeshPtr& mesh() const { return mesh_; }
  const AssemblyOptions& assembly() const { return opts_; }
  std::shared_ptr<const struct Discretization> at(double s);
  DiscreteFunction data(const std::string& spec) const;

 private:
  SweepConfig cfg_;
  MeshPtr mesh_;
  AssemblyOptions opts_;
  std::map<long long, std::shared_ptr<const struct Discretization>> cache_;
};

SweepTable run_solution_continuity(SweepContext& ctx);
SweepTable run_diff_quotient(SweepContext& ctx);
SweepTable run_eigen_continuity(SweepContext& ctx);
SweepTable run_dlambda_check(SweepContext& ctx);
SweepTable run_form_continuity(SweepContext& ctx);
SweepTable run_poincare(SweepContext& ctx);

SweepTable run_check(SweepContext& ctx, const std::string& name);

struct SweepResult {
  std::vector<SweepTable> tables;
  bool all_passed() const;
};

/// Runs every configured check, writes <check>.csv and manifest.json into output_dir.
SweepResult run_sweep(const SweepConfig& cfg, int threads = 0);

}  // namespace fraclap
