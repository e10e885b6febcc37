#include "parking/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace parking::ode {

OdeState operator+(const OdeState& a, const OdeState& b) {
  return {a.d0 + b.d0, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3, a.f0 + b.f0,
          a.f1 + b.f1, a.f2 + b.f2, a.r + b.r,   a.d010 + b.d010};
}

OdeState operator*(double k, const OdeState& a) {
  return {k * a.d0, k * a.d1, k * a.d2, k * a.d3, k * a.f0,
          k * a.f1, k * a.f2, k * a.r,  k * a.d010};
}

OdeState rhs(ModelVariant model, double t, const OdeState& y) {
  return rhs(TermMask::for_model(model), t, y);
}

OdeState rhs(TermMask mask, double t, const OdeState& y) {
  const double e = std::exp(-t);
  const double te2 = t * e * e;
  const double f2_pass = mask.pass_second_line ? y.f2 : 0.0;

  // Triple densities D(s,0,s') = f(s) f(s') e^{-t} for the centre to fill.
  const double first_line = (y.f0 * y.f0 + 2.0 * y.f0 * f2_pass + f2_pass * f2_pass) * e;
  const double second_from_empty = (2.0 * y.f0 * y.f1 + y.f1 * y.f1) * e;

  OdeState dy;
  dy.d0 = -first_line - second_from_empty;
  dy.d1 = first_line - y.d010;
  dy.d2 = second_from_empty;
  dy.d3 = y.d010;

  dy.f0 = -(y.f0 + y.f1 + f2_pass) * e;
  dy.f1 = (y.f0 + f2_pass) * e - y.r;
  dy.f2 = y.f1 * e;
  dy.r = y.f0 * (e - te2) - y.f1 * te2 - y.r;

  dy.d010 = y.f0 * y.f0 * e - y.d010 - 2.0 * y.r * y.f0 * e - 2.0 * y.r * y.f1 * e;
  return dy;
}

void OdeSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument("t_max must be finite and nonnegative");
  }
  if (record_stride == 0) throw std::invalid_argument("record stride must be positive");
}

const OdeState& Trajectory::at(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
  if (it == times.end() || std::abs(*it - t) > 1e-9) {
    throw std::out_of_range("time " + std::to_string(t) + " is not a recorded trajectory time");
  }
  return states[static_cast<std::size_t>(it - times.begin())];
}

namespace {

bool finite(const OdeState& s) {
  const auto v = s.as_array();
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

OdeState rk4_step(TermMask mask, double t, const OdeState& y, double h) {
  const OdeState k1 = rhs(mask, t, y);
  const OdeState k2 = rhs(mask, t + 0.5 * h, y + (0.5 * h) * k1);
  const OdeState k3 = rhs(mask, t + 0.5 * h, y + (0.5 * h) * k2);
  const OdeState k4 = rhs(mask, t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory integrate(const OdeSpec& spec) {
  spec.validate();
  const TermMask mask = TermMask::for_model(spec.model);

  // Full steps that fit, plus one shortened step for any remainder.
  const double ratio = spec.t_max / spec.step;
  auto full_steps = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  const bool partial =
      spec.t_max - static_cast<double>(full_steps) * spec.step > 1e-12 * std::max(1.0, spec.t_max);

  Trajectory traj;
  traj.model = spec.model;
  traj.times.reserve(full_steps / spec.record_stride + 2);
  traj.states.reserve(full_steps / spec.record_stride + 2);
  OdeState y = OdeState::initial();
  traj.times.push_back(0.0);
  traj.states.push_back(y);

  for (std::size_t n = 0; n < full_steps; ++n) {
    const double t = static_cast<double>(n) * spec.step;
    y = rk4_step(mask, t, y, spec.step);
    if (!finite(y)) throw std::runtime_error("nonfinite ODE state");
    const std::size_t done = n + 1;
    const bool last = done == full_steps && !partial;
    if (done % spec.record_stride == 0 || last) {
      traj.times.push_back(last ? spec.t_max : static_cast<double>(done) * spec.step);
      traj.states.push_back(y);
    }
  }
  if (partial) {
    const double t = static_cast<double>(full_steps) * spec.step;
    y = rk4_step(mask, t, y, spec.t_max - t);
    if (!finite(y)) throw std::runtime_error("nonfinite ODE state");
    traj.times.push_back(spec.t_max);
    traj.states.push_back(y);
  }
  return traj;
}

double closed_form_fsum(double t) { return std::exp(std::exp(-t) - 1.0); }

double isolated_single_car(double t) { return t * std::exp(-t); }

double first_line_jamming_limit() { return (1.0 - std::exp(-2.0)) / 2.0; }

LimitSummary summarize(const Trajectory& trajectory) {
  if (trajectory.states.empty()) throw std::invalid_argument("empty trajectory");
  const OdeState& end = trajectory.back();
  LimitSummary s;
  s.t_end = trajectory.times.back();
  s.line1 = end.line1();
  s.line2 = end.line2();
  s.increase_factor = s.line1 > 0.0 ? s.line2 / s.line1 : std::nan("");
  const auto drift = rhs(trajectory.model, s.t_end, end).as_array();
  for (double v : drift) s.residual_drift = std::max(s.residual_drift, std::abs(v));
  return s;
}

LimitSummary extract_limits(const Trajectory& trajectory) {
  const LimitSummary s = summarize(trajectory);
  if (s.t_end < kMinLimitHorizon) {
    throw std::invalid_argument("limit extraction needs t_max >= " +
                                std::to_string(kMinLimitHorizon));
  }
  if (s.residual_drift > kMaxResidualDrift) {
    throw std::invalid_argument("trajectory not stationary: residual drift " +
                                std::to_string(s.residual_drift));
  }
  return s;
}

}  // namespace parking::ode
