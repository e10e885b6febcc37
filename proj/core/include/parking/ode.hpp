#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "parking/site_state.hpp"

namespace parking::ode {

/// Closed state of the two-line parking densities.
///
///   d0..d3  density of each joint site state
///   f0..f2  one-sided densities: state of the neighbour of a site that has
///           received no arrival
///   r       one-sided density of the pair (1, 0) next to such a site
///   d010    density of the triple (0, 1, 0)
struct OdeState {
  double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double f0 = 0.0, f1 = 0.0, f2 = 0.0;
  double r = 0.0;
  double d010 = 0.0;

  static constexpr std::size_t kDimension = 9;

  static OdeState initial() {
    OdeState s;
    s.d0 = 1.0;
    s.f0 = 1.0;
    return s;
  }

  std::array<double, kDimension> as_array() const { return {d0, d1, d2, d3, f0, f1, f2, r, d010}; }
  static OdeState from_array(const std::array<double, kDimension>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
  }

  double line1() const { return d1 + d3; }
  double line2() const { return d2 + d3; }
  /// Derived one-sided density of state 3, 1 - f0 - f1 - f2.
  double f3() const { return 1.0 - f0 - f1 - f2; }

  friend OdeState operator+(const OdeState& a, const OdeState& b);
  friend OdeState operator*(double k, const OdeState& a);
  friend bool operator==(const OdeState&, const OdeState&) = default;
};

/// Which "drive past a second-line car" terms are present in the equations.
/// Screening deletes the f2 contributions to the f0/f1 equations and the
/// (2,0,0) and (2,0,2) first-line parking terms.
struct TermMask {
  bool pass_second_line = true;

  static constexpr TermMask for_model(ModelVariant model) {
    return {model == ModelVariant::NoScreening};
  }
};

/// Time derivative of the nine densities.
OdeState rhs(ModelVariant model, double t, const OdeState& y);
OdeState rhs(TermMask mask, double t, const OdeState& y);

struct OdeSpec {
  ModelVariant model = ModelVariant::NoScreening;
  double t_max = 30.0;
  double step = 1e-3;
  std::size_t record_stride = 1;

  void validate() const;
};

struct Trajectory {
  ModelVariant model = ModelVariant::NoScreening;
  std::vector<double> times;
  std::vector<OdeState> states;

  /// State recorded at time t (within 1e-9). Throws std::out_of_range.
  const OdeState& at(double t) const;
  const OdeState& back() const { return states.back(); }
};

/// Classical fixed-step RK4 from the vacuum initial condition.
///
/// Records every `record_stride` steps and always the endpoint. If t_max is not
/// a multiple of `step`, the last step is shortened to land on t_max.
Trajectory integrate(const OdeSpec& spec);

/// exp(e^{-t} - 1): f0 + f2 in the model without screening.
double closed_form_fsum(double t);

/// t e^{-t}: probability that a site flanked by two arrival-free sites holds
/// exactly one first-line car.
double isolated_single_car(double t);

/// (1 - e^{-2}) / 2, the jamming density of the single-line process.
double first_line_jamming_limit();

struct LimitSummary {
  double t_end = 0.0;
  double line1 = 0.0;
  double line2 = 0.0;
  double increase_factor = 0.0;  // NaN while line1 is still 0
  double residual_drift = 0.0;  // max-norm of rhs at the endpoint
};

/// Endpoint densities without any convergence checks.
LimitSummary summarize(const Trajectory& trajectory);

inline constexpr double kMinLimitHorizon = 20.0;
inline constexpr double kMaxResidualDrift = 1e-4;

/// Endpoint densities as stand-ins for the t -> infinity limits. Throws
/// std::invalid_argument if the horizon is below 20 or the drift above 1e-4.
LimitSummary extract_limits(const Trajectory& trajectory);

}  // namespace parking::ode
