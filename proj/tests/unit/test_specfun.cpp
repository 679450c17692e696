#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "specfun.hpp"

using namespace fraclap;

namespace {

struct Frozen {
  int n;
  double s, c, dc;
};

// mpmath at 30 digits
const Frozen kFrozen[] = {
    {1, 0.1, 0.090313982871455613452, 0.82102167697783019879},
    {1, 0.25, 0.19947114020071633897, 0.64121446208855238184},
    {1, 0.5, 0.31830988618379067154, 0.26915286717096538156},
    {1, 0.75, 0.29920671030107450845, -0.51920723243898912611},
    {1, 0.9, 0.1649049388183027249, -1.3172167886719195736},
    {2, 0.1, 0.032551422029941055115, 0.33227230145385547796},
    {2, 0.25, 0.083241983875425065489, 0.33904293115277895585},
    {2, 0.5, 0.15915494309189533577, 0.23225071961662176892},
    {2, 0.75, 0.17116712969055234293, -0.21573107137061134879},
    {2, 0.9, 0.10084985986148907972, -0.76345011034087160205},
    {3, 0.1, 0.01724870016517071392, 0.18555142354056070481},
    {3, 0.25, 0.047620226950680727339, 0.21657231276934672015},
    {3, 0.5, 0.10132118364233777144, 0.18699520215756869076},
    {3, 0.75, 0.11905056737670181835, -0.11134553992795801608},
    {3, 0.9, 0.07348722122895846633, -0.53450550420775285212},
};

}  // namespace

TEST_CASE("normalisation constant against high-precision values") {
  for (const auto& f : kFrozen) {
    CAPTURE(f.n);
    CAPTURE(f.s);
    CHECK(c_ns(Dimension(f.n), FractionalOrder(f.s)) == doctest::Approx(f.c).epsilon(1e-13));
    CHECK(dc_ns(Dimension(f.n), FractionalOrder(f.s)) == doctest::Approx(f.dc).epsilon(1e-12));
  }
}

TEST_CASE("closed forms at s = 1/2") {
  CHECK(c_ns(Dimension(1), FractionalOrder(0.5)) == doctest::Approx(1.0 / M_PI).epsilon(1e-15));
  CHECK(c_ns(Dimension(2), FractionalOrder(0.5)) == doctest::Approx(0.5 / M_PI).epsilon(1e-15));
}

TEST_CASE("constant bound and derivative on the grid") {
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= 99; ++k) {
      const double s = k / 100.0;
      const double c = c_ns(Dimension(n), FractionalOrder(s));
      CHECK(c > 0.0);
      CHECK(c <= 4.0 * std::tgamma(n / 2.0 + 1.0));
      const double h = 1e-5 * std::min(s, 1.0 - s);
      const double fd = (c_ns(Dimension(n), FractionalOrder(s + h)) - c_ns(Dimension(n), FractionalOrder(s - h))) / (2 * h);
      const double dc = dc_ns(Dimension(n), FractionalOrder(s));
      CHECK(std::abs(fd - dc) <= 1e-6 * std::max(std::abs(dc), 1e-3));
    }
}

TEST_CASE("order and dimension validation") {
  for (double bad : {0.0, 1.0, -0.5, 1.5, std::nan("")}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(FractionalOrder{bad}, Error);
  }
  CHECK_THROWS_AS(Dimension{0}, Error);
  CHECK(FractionalOrder(0.01).in_quality_band() == false);
  CHECK(FractionalOrder(0.5).in_quality_band());
}

TEST_CASE("gamma and digamma") {
  CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-15));
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-15));
  CHECK(digamma_fn(1.0) == doctest::Approx(-0.57721566490153286061).epsilon(1e-15));
  // recurrence psi(x+1) = psi(x) + 1/x
  for (double x : {0.3, 1.7, 4.2}) CHECK(digamma_fn(x + 1) == doctest::Approx(digamma_fn(x) + 1 / x).epsilon(1e-14));
}

TEST_CASE("psi_sigma linearises the power") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> lr(std::log(1e-3), std::log(10.0)), sg(1e-6, 0.49);
  for (int i = 0; i < 10000; ++i) {
    const double r = std::exp(lr(gen)), sigma = sg(gen);
    const double lhs = std::pow(r, -2 * sigma) - 1.0;
    const double rhs = -2 * sigma * psi_sigma(r, sigma) * std::log(r);
    REQUIRE(std::abs(lhs - rhs) <= 1e-12);
  }
  CHECK(psi_sigma(1.0, 0.3) == 1.0);
  // sigma -> 0 limit
  CHECK(psi_sigma(0.2, 1e-14) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log decay bound") {
  for (double eps : {0.05, 0.2, 0.5, 1.0})
    for (int k = -300; k <= 300; ++k) {
      const double r = std::pow(10.0, k / 100.0);
      const auto b = log_decay_bound(r, eps, 1.0);
      CHECK(b.holds());
      CHECK((b.below_pivot.has_value() || b.above_pivot.has_value()));
    }
  // tight at r = exp(-1/eps)
  const double eps = 0.25, r = std::exp(-1.0 / eps);
  const auto b = log_decay_bound(r, eps, 1.0);
  CHECK(*b.below_pivot == doctest::Approx(b.abs_log).epsilon(1e-12));
}

TEST_CASE("constant vanishes at both ends") {
  for (int n = 1; n <= 3; ++n) {
    CHECK(c_ns(Dimension(n), FractionalOrder(1e-4)) < 1e-3);
    CHECK(c_ns(Dimension(n), FractionalOrder(1 - 1e-4)) < 1e-3);
  }
}

TEST_CASE("derivative vanishes at the interior maximiser") {
  // golden section on s -> C_{2,s}
  double a = 0.05, b = 0.95;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 80; ++i) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (c_ns(Dimension(2), FractionalOrder(x1)) > c_ns(Dimension(2), FractionalOrder(x2)))
      b = x2;
    else
      a = x1;
  }
  CHECK(std::abs(dc_ns(Dimension(2), FractionalOrder(0.5 * (a + b)))) < 1e-6);
}

TEST_CASE("psi_sigma against the defining t-integral") {
  // Gauss-Legendre, 20 points: exact to rounding for this entire integrand
  const double r = 2.0, sigma = 0.25;
  const double x[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271, 0.6360536807265150,
                        0.7463319064601508, 0.8391169718222188, 0.9122344282513259, 0.9639719272779138, 0.9931285991850949};
  const double w[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766, 0.1181945319615184,
                        0.1019301198172404, 0.0832767415767048, 0.0626720483341091, 0.0406014298003869, 0.0176140071391521};
  double sum = 0.0;
  for (int k = 0; k < 10; ++k)
    for (double t : {0.5 * (1 - x[k]), 0.5 * (1 + x[k])}) sum += 0.5 * w[k] * std::exp(-2 * t * sigma * std::log(r));
  CHECK(psi_sigma(r, sigma) == doctest::Approx(sum).epsilon(1e-10));
  CHECK(psi_sigma(0.5, 0.0) == 1.0);
  CHECK_THROWS_AS(psi_sigma(0.0, 0.1), Error);
}

TEST_CASE("log decay examples") {
  const auto b = log_decay_bound(0.1, 0.5, 1.0);
  CHECK(b.abs_log == doctest::Approx(std::log(10.0)));
  CHECK(*b.below_pivot == doctest::Approx(2.0 / std::exp(1.0) / std::sqrt(0.1)));
  CHECK_FALSE(b.above_pivot.has_value());
  const auto one = log_decay_bound(1.0, 1.0, 1.0);
  CHECK(one.below_pivot.has_value());
  CHECK(one.above_pivot.has_value());
  CHECK(one.holds());
  for (double eps : {0.1, 0.5, 1.0})
    for (int k = -6; k <= 6; ++k) CHECK(log_decay_bound(std::pow(10.0, k), eps, 1.0).holds());
  CHECK_THROWS_AS(log_decay_bound(-1.0, 0.5, 1.0), Error);
}
