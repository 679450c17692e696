#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fraclap {

struct CheckItem {
  std::string suite;  // which configuration (mesh) it ran on
  std::string check;
  std::size_t rows = 0;
  std::size_t failed = 0;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool all_passed() const;
  /// Fixed-width pass/fail table.
  std::string table() const;
};

/// Built-in property suite: closed-form checks, assembly invariants, and sweeps on a
/// fine interval and a small symmetric square. CSVs go under out_dir/<suite>/.
CheckReport run_check_suite(const std::string& out_dir, std::uint64_t seed, int threads = 0);

}  // namespace fraclap
