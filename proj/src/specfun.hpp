#pragma once

#include <optional>

namespace fraclap {

/// Order s of the operator, restricted to the open interval (0,1).
class FractionalOrder {
 public:
  explicit FractionalOrder(double s);
  double value() const noexcept { return s_; }
  /// True inside the band where the singular quadrature keeps its constants.
  bool in_quality_band() const noexcept { return s_ >= 0.02 && s_ <= 0.98; }

 private:
  double s_;
};

/// Spatial dimension N >= 1. N = 1 is supported in addition to N >= 2.
class Dimension {
 public:
  explicit Dimension(int n);
  int value() const noexcept { return n_; }

 private:
  int n_;
};

double gamma_fn(double x);
double digamma_fn(double x);

/// Normalisation constant s(1-s) pi^{-N/2} 4^s Gamma((N+2s)/2) / Gamma(2-s).
double c_ns(Dimension n, FractionalOrder s);

/// d/ds of c_ns, by logarithmic differentiation.
double dc_ns(Dimension n, FractionalOrder s);

/// Mean of exp(-2 t sigma ln r) over t in [0,1]; satisfies
/// r^{-2 sigma} - 1 = -2 sigma psi ln r.
double psi_sigma(double r, double sigma);

struct LogDecayBound {
  double abs_log = 0.0;
  std::optional<double> below_pivot;  // (e eps0)^{-1} r^{-eps0}, present when r <= pivot
  std::optional<double> above_pivot;  // (e eps0)^{-1} r^{eps0},  present when r >= pivot

  bool holds() const noexcept {
    return (!below_pivot || abs_log <= *below_pivot) && (!above_pivot || abs_log <= *above_pivot);
  }
};

LogDecayBound log_decay_bound(double r, double eps0, double pivot);

}  // namespace fraclap
