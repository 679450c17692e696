#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

enum class ErrorKind {
  Validation,   // argument outside its admissible set
  Parse,        // malformed input file or config
  Degenerate,   // geometrically invalid mesh
  Quadrature,   // singular integration did not reach tolerance
  Solver,       // linear algebra failure
  Io,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::Validation, what);
}

}  // namespace fraclap
