#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "parking/ode.hpp"

using namespace parking;
using ode::OdeState;

namespace {

OdeState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return OdeState::from_array({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng),
                               u(rng)});
}

// The displayed systems written out term by term, independent of the masked
// implementation.
OdeState displayed_rhs(ModelVariant model, double t, const OdeState& y) {
  const double e = std::exp(-t);
  OdeState d;
  if (model == ModelVariant::NoScreening) {
    d.d0 = -(y.f0 + y.f2) * (y.f0 + y.f2) * e - (2 * y.f0 * y.f1 + y.f1 * y.f1) * e;
    d.d1 = (y.f0 + y.f2) * (y.f0 + y.f2) * e - y.d010;
    d.f0 = -y.f0 * e - y.f1 * e - y.f2 * e;
    d.f1 = y.f0 * e + y.f2 * e - y.r;
  } else {
    d.d0 = -(y.f0 + y.f1) * (y.f0 + y.f1) * e;
    d.d1 = y.f0 * y.f0 * e - y.d010;
    d.f0 = -y.f0 * e - y.f1 * e;
    d.f1 = y.f0 * e - y.r;
  }
  d.d2 = (2 * y.f0 * y.f1 + y.f1 * y.f1) * e;
  d.d3 = y.d010;
  d.f2 = y.f1 * e;
  d.r = y.f0 * (e - t * std::exp(-2 * t)) - y.f1 * t * std::exp(-2 * t) - y.r;
  d.d010 = y.f0 * y.f0 * e - y.d010 - 2 * y.r * y.f0 * e - 2 * y.r * y.f1 * e;
  return d;
}

double max_abs_diff(const OdeState& a, const OdeState& b) {
  const auto x = a.as_array();
  const auto y = b.as_array();
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

const ode::Trajectory& trajectory(ModelVariant model) {
  static const ode::Trajectory ns = ode::integrate({ModelVariant::NoScreening, 30.0, 1e-3, 1});
  static const ode::Trajectory sc = ode::integrate({ModelVariant::Screening, 30.0, 1e-3, 1});
  return model == ModelVariant::NoScreening ? ns : sc;
}

}  // namespace

TEST_CASE("derivative at the vacuum") {
  const OdeState expected = OdeState::from_array({-1, 1, 0, 0, -1, 1, 0, 1, 1});
  for (ModelVariant m : kAllVariants) {
    CHECK(ode::rhs(m, 0.0, OdeState::initial()) == expected);
  }
}

TEST_CASE("rhs matches the displayed equations at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> time(0.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const OdeState y = random_state(rng);
    const double t = time(rng);
    for (ModelVariant m : kAllVariants) {
      CHECK(max_abs_diff(ode::rhs(m, t, y), displayed_rhs(m, t, y)) < 1e-14);
    }
  }
}

TEST_CASE("screening rhs is the no-screening rhs with the pass-over terms removed") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    OdeState y = random_state(rng);
    const double t = 0.01 * i;
    // with f2 = 0 every pass-over term vanishes, so the two systems coincide
    y.f2 = 0.0;
    const OdeState a = ode::rhs(ModelVariant::NoScreening, t, y);
    const OdeState b = ode::rhs(ModelVariant::Screening, t, y);
    CHECK(max_abs_diff(a, b) == 0.0);
  }
}

TEST_CASE("density derivatives sum to zero") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const OdeState y = random_state(rng);
    for (ModelVariant m : kAllVariants) {
      const OdeState d = ode::rhs(m, 0.02 * i, y);
      CHECK(std::abs(d.d0 + d.d1 + d.d2 + d.d3) < 1e-14);
    }
  }
}

TEST_CASE("jamming limits match an independent DOP853 integration") {
  // tests/reference/ode_limits.py
  const auto ns = ode::extract_limits(trajectory(ModelVariant::NoScreening));
  CHECK(std::abs(ns.line1 - 0.432332358381681) < 1e-11);
  CHECK(std::abs(ns.line2 - 0.434867486650052) < 1e-11);
  CHECK(std::abs(ns.increase_factor - 1.00586384113801) < 1e-11);

  const auto sc = ode::extract_limits(trajectory(ModelVariant::Screening));
  CHECK(std::abs(sc.line1 - 0.366474693345598) < 1e-11);
  CHECK(std::abs(sc.line2 - 0.433895771998392) < 1e-11);
  CHECK(std::abs(sc.increase_factor - 1.18397199009104) < 1e-11);

  const OdeState& y = trajectory(ModelVariant::NoScreening).at(1.0);
  const OdeState ref = OdeState::from_array({0.451123980431946, 0.263330912060605,
                                             0.190102801493324, 0.0954423060141248,
                                             0.402910316528236, 0.313432053749019,
                                             0.128553288858379, 0.155482092035775,
                                             0.0657472377604728});
  CHECK(max_abs_diff(y, ref) < 1e-11);
}

TEST_CASE("reported limit values") {
  const auto ns = ode::extract_limits(trajectory(ModelVariant::NoScreening));
  CHECK(std::abs(ns.line1 - ode::first_line_jamming_limit()) < 1e-6);
  CHECK(std::abs(ns.line2 - 0.434868) < 2e-6);
  CHECK(std::abs(ns.increase_factor - 1.006) < 1e-3);
  CHECK(ns.residual_drift < 1e-7);

  const auto sc = ode::extract_limits(trajectory(ModelVariant::Screening));
  CHECK(std::abs(sc.line1 - 0.366475) < 2e-6);
  CHECK(std::abs(sc.line2 - 0.433896) < 2e-6);
  CHECK(std::abs(sc.increase_factor - 1.184) < 1e-3);
  CHECK(sc.residual_drift < 1e-7);
}

TEST_CASE("step halving changes the endpoint by less than 1e-9") {
  for (ModelVariant m : kAllVariants) {
    const auto coarse = ode::integrate({m, 30.0, 1e-3, 1000}).back();
    const auto fine = ode::integrate({m, 30.0, 5e-4, 2000}).back();
    CHECK(max_abs_diff(coarse, fine) < 1e-9);
  }
}

TEST_CASE("closed forms") {
  CHECK(ode::closed_form_fsum(0.0) == 1.0);
  CHECK(std::abs(ode::closed_form_fsum(1e3) - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(ode::closed_form_fsum(1.0) - 0.531464) < 1e-6);
  const OdeState& y = trajectory(ModelVariant::NoScreening).at(1.0);
  CHECK(std::abs(y.f0 + y.f2 - ode::closed_form_fsum(1.0)) < 1e-8);
  CHECK(ode::isolated_single_car(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(ode::first_line_jamming_limit() == doctest::Approx(0.43233235838169365));
}

TEST_CASE("trajectory invariants") {
  for (ModelVariant m : kAllVariants) {
    const auto& traj = trajectory(m);
    CAPTURE(to_string(m));
    REQUIRE(traj.times.size() == traj.states.size());
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.states.front() == OdeState::initial());

    double worst_sum = 0.0, worst_range = 0.0, worst_fsum = 0.0, worst_f3 = 0.0,
           worst_line1 = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const OdeState& y = traj.states[i];
      worst_sum = std::max(worst_sum, std::abs(y.d0 + y.d1 + y.d2 + y.d3 - 1.0));
      for (double v : y.as_array()) {
        worst_range = std::max({worst_range, -v, v - 1.0});
      }
      CHECK(y.f0 + y.f1 + y.f2 <= 1.0 + 1e-12);
      if (m == ModelVariant::NoScreening) {
        worst_fsum = std::max(worst_fsum,
                                 std::abs(y.f0 + y.f2 - ode::closed_form_fsum(traj.times[i])));
      }
      if (i > 0) {
        const OdeState& p = traj.states[i - 1];
        CHECK(y.d0 <= p.d0 + 1e-15);
        CHECK(y.f0 <= p.f0 + 1e-15);
        CHECK(y.d3 >= p.d3 - 1e-15);
        CHECK(y.f2 >= p.f2 - 1e-15);
      }
      if (i > 0 && i + 1 < traj.states.size()) {
        const double h = traj.times[i + 1] - traj.times[i - 1];
        const double df3 = (traj.states[i + 1].f3() - traj.states[i - 1].f3()) / h;
        worst_f3 = std::max(worst_f3, std::abs(df3 - y.r));
        if (m == ModelVariant::NoScreening) {
          const double dline1 = (traj.states[i + 1].line1() - traj.states[i - 1].line1()) / h;
          const double expected = (y.f0 + y.f2) * (y.f0 + y.f2) * std::exp(-traj.times[i]);
          worst_line1 = std::max(worst_line1, std::abs(dline1 - expected));
        }
      }
    }
    CHECK(worst_sum <= 1e-10);
    CHECK(worst_range <= 1e-10);
    CHECK(worst_fsum <= 1e-8);
    CHECK(worst_f3 <= 1e-5);
    CHECK(worst_line1 <= 1e-5);
  }
}

TEST_CASE("second line exceeds first line in both models") {
  const auto ns = ode::extract_limits(trajectory(ModelVariant::NoScreening));
  const auto sc = ode::extract_limits(trajectory(ModelVariant::Screening));
  CHECK(sc.line1 < ns.line1);
  CHECK(ns.line2 > ns.line1);
  CHECK(sc.line2 > sc.line1);
}

TEST_CASE("integration bookkeeping") {
  SUBCASE("zero horizon records only the initial state") {
    const auto traj = ode::integrate({ModelVariant::NoScreening, 0.0, 1e-3, 1});
    REQUIRE(traj.times.size() == 1);
    CHECK(traj.states[0] == OdeState::initial());
  }
  SUBCASE("stride and a shortened final step") {
    const auto traj = ode::integrate({ModelVariant::Screening, 1.0005, 1e-3, 100});
    CHECK(traj.times.back() == 1.0005);
    CHECK(traj.times[1] == doctest::Approx(0.1));
    CHECK(traj.at(1.0).d0 == doctest::Approx(0.486510860517418).epsilon(1e-9));
    CHECK_THROWS_AS(traj.at(0.15), std::out_of_range);
  }
  SUBCASE("invalid specs") {
    CHECK_THROWS_AS(ode::integrate({ModelVariant::NoScreening, 1.0, 0.0, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ode::integrate({ModelVariant::NoScreening, 1.0, -1e-3, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ode::integrate({ModelVariant::NoScreening, 1.0, 1e-3, 0}),
                    std::invalid_argument);
  }
}

TEST_CASE("limit extraction guards") {
  const auto short_run = ode::integrate({ModelVariant::NoScreening, 10.0, 1e-3, 100});
  CHECK_THROWS_AS(ode::extract_limits(short_run), std::invalid_argument);

  // a constant trajectory parked at the jammed state: drift shrinks with the horizon
  const OdeState jammed = trajectory(ModelVariant::NoScreening).back();
  double previous = 1.0;
  for (double horizon : {5.0, 10.0, 20.0, 40.0}) {
    ode::Trajectory fixed;
    fixed.model = ModelVariant::NoScreening;
    fixed.times = {0.0, horizon};
    fixed.states = {jammed, jammed};
    const double drift = ode::summarize(fixed).residual_drift;
    CHECK(drift < previous);
    previous = drift;
  }
  CHECK(previous < 1e-12);
}
