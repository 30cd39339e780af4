#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbsdelta/lq.hpp"
#include "fbsdelta/model.hpp"

namespace fbsdelta {

// Built-in model registry. Coefficients are not user-scriptable: every entry
// is constructed here from a named family plus a parameter block, so each
// instance is auditable. Derivatives are analytic.
//
//   zero       all coefficients vanish; optional constant and quadratic costs
//   lq         generic linear-quadratic family (scalar parameters)
//   storage    the energy-storage scheduling preset
//   tanh_drift bounded smooth nonlinearities (tanh/sine) in drift and driver
//   sine_drift sine nonlinearities, linear driver, structural boundary case
//   decoupled  drift/diffusion free of (y', z'), driver free of x
inline std::vector<std::string> registered_model_names() {
  return {"zero", "lq", "storage", "tanh_drift", "sine_drift", "decoupled"};
}

namespace detail {

template <typename Scalar>
using V = VecX<Scalar>;

template <typename Scalar>
void fill_scalar_quadratic_costs(ModelSpec<Scalar>& model, Scalar wx, Scalar wy, Scalar wz,
                                 Scalar wu, Scalar wterm, Scalar winit, Scalar lconst) {
  using Vec = VecX<Scalar>;
  model.running_cost = [=](int, Index, const Vec& x, const Vec& y, const Vec& z, const Vec& u) {
    return lconst + Scalar(0.5) * (wx * x.squaredNorm() + wy * y.squaredNorm() +
                                   wz * z.squaredNorm() + wu * u.squaredNorm());
  };
  model.running_cost_x = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    return Vec(wx * x);
  };
  model.running_cost_y = [=](int, Index, const Vec&, const Vec& y, const Vec&, const Vec&) {
    return Vec(wy * y);
  };
  model.running_cost_z = [=](int, Index, const Vec&, const Vec&, const Vec& z, const Vec&) {
    return Vec(wz * z);
  };
  model.running_cost_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec& u) {
    return Vec(wu * u);
  };
  model.terminal_cost = [=](Index, const Vec& x) { return Scalar(0.5) * wterm * x.squaredNorm(); };
  model.terminal_cost_dx = [=](Index, const Vec& x) { return Vec(wterm * x); };
  model.initial_cost = [=](const Vec& y) { return Scalar(0.5) * winit * y.squaredNorm(); };
  model.initial_cost_dy = [=](const Vec& y) { return Vec(winit * y); };
}

template <typename Scalar>
void fill_affine_boundaries(ModelSpec<Scalar>& model, Scalar init_offset, Scalar init_gain,
                            Scalar term_offset, Scalar term_gain) {
  using Vec = VecX<Scalar>;
  const Index n = model.n;
  model.initial_map = [=](const Vec& y) {
    return Vec(Vec::Constant(n, init_offset) + init_gain * y);
  };
  model.initial_map_dy = [=](const Vec&) {
    return MatX<Scalar>(init_gain * MatX<Scalar>::Identity(n, n));
  };
  model.terminal_map = [=](Index, const Vec& x) {
    return Vec(Vec::Constant(n, term_offset) + term_gain * x);
  };
  model.terminal_map_dx = [=](Index, const Vec&) {
    return MatX<Scalar>(term_gain * MatX<Scalar>::Identity(n, n));
  };
  model.initial_map_kind = init_gain == Scalar(0) ? BoundaryKind::Constant : BoundaryKind::Linear;
  model.terminal_map_kind = term_gain == Scalar(0) ? BoundaryKind::Constant : BoundaryKind::Linear;
}

}  // namespace detail

// Scalar nonlinear family with tanh/sine coefficients; all derivative blocks
// are bounded, so the family stays within the standing regularity assumptions.
template <typename Scalar>
ModelSpec<Scalar> tanh_drift_model(int horizon, const nlohmann::json& params = {}) {
  ModelSpec<Scalar> model;
  model.name = "tanh_drift";
  model.n = 1;
  model.m = 1;
  model.horizon = horizon;
  using Vec = VecX<Scalar>;
  const Scalar ax = static_cast<Scalar>(params.value("drift_state_gain", 0.4));
  const Scalar ay = static_cast<Scalar>(params.value("drift_reserve_gain", 0.2));
  const Scalar az = static_cast<Scalar>(params.value("drift_sensitivity_gain", 0.1));
  const Scalar au = static_cast<Scalar>(params.value("drift_control_gain", 0.5));
  const Scalar sx = static_cast<Scalar>(params.value("noise_state_gain", 0.3));
  const Scalar sz = static_cast<Scalar>(params.value("noise_sensitivity_gain", 0.1));
  const Scalar su = static_cast<Scalar>(params.value("noise_control_gain", 0.2));
  const Scalar fy = static_cast<Scalar>(params.value("driver_reserve_gain", 0.5));
  const Scalar fz = static_cast<Scalar>(params.value("driver_sensitivity_gain", 0.2));
  const Scalar fx = static_cast<Scalar>(params.value("driver_state_gain", 0.3));
  const Scalar fu = static_cast<Scalar>(params.value("driver_control_gain", 0.4));

  model.drift = [=](int, Index, const Vec& x, const Vec& y, const Vec& z, const Vec& u) {
    Vec out(1);
    out[0] = ax * std::tanh(x[0]) + ay * std::sin(y[0]) + az * z[0] + au * u[0];
    return out;
  };
  model.drift_x = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    const Scalar t = std::tanh(x[0]);
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, ax * (Scalar(1) - t * t)));
  };
  model.drift_y = [=](int, Index, const Vec&, const Vec& y, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, ay * std::cos(y[0])));
  };
  model.drift_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, az));
  };
  model.drift_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, au));
  };

  model.diffusion = [=](int, Index, const Vec& x, const Vec&, const Vec& z, const Vec& u) {
    Vec out(1);
    out[0] = sx * std::tanh(x[0]) + sz * z[0] + su * u[0];
    return out;
  };
  model.diffusion_x = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    const Scalar t = std::tanh(x[0]);
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, sx * (Scalar(1) - t * t)));
  };
  model.diffusion_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Zero(1, 1));
  };
  model.diffusion_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, sz));
  };
  model.diffusion_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, su));
  };

  model.driver = [=](int, Index, const Vec& x, const Vec& y, const Vec& z, const Vec& u) {
    Vec out(1);
    out[0] = -(fy * y[0] + fz * z[0] + fx * std::sin(x[0]) + fu * u[0]);
    return out;
  };
  model.driver_x = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fx * std::cos(x[0])));
  };
  model.driver_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fy));
  };
  model.driver_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fz));
  };
  model.driver_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fu));
  };

  detail::fill_scalar_quadratic_costs<Scalar>(
      model, static_cast<Scalar>(params.value("state_weight", 1.0)),
      static_cast<Scalar>(params.value("reserve_weight", 0.5)),
      static_cast<Scalar>(params.value("sensitivity_weight", 0.5)),
      static_cast<Scalar>(params.value("effort_weight", 1.0)),
      static_cast<Scalar>(params.value("terminal_weight", 1.0)),
      static_cast<Scalar>(params.value("initial_weight", 1.0)), Scalar(0));
  model.initial_map = [=](const Vec& y) {
    Vec out(1);
    out[0] = Scalar(0.5) - Scalar(0.2) * y[0];
    return out;
  };
  model.initial_map_dy = [=](const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, Scalar(-0.2)));
  };
  model.terminal_map = [=](Index, const Vec& x) {
    Vec out(1);
    out[0] = Scalar(0.3) * std::tanh(x[0]);
    return out;
  };
  model.terminal_map_dx = [=](Index, const Vec& x) {
    const Scalar t = std::tanh(x[0]);
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, Scalar(0.3) * (Scalar(1) - t * t)));
  };
  model.initial_map_kind = BoundaryKind::Linear;
  model.terminal_map_kind = BoundaryKind::General;
  model.controls = {ControlSet<Scalar>::all_of_space(1)};
  return model;
}

template <typename Scalar>
ModelSpec<Scalar> sine_drift_model(int horizon, const nlohmann::json& params = {}) {
  ModelSpec<Scalar> model;
  model.name = "sine_drift";
  model.n = 1;
  model.m = 1;
  model.horizon = horizon;
  using Vec = VecX<Scalar>;
  const Scalar bx = static_cast<Scalar>(params.value("drift_state_gain", 0.3));
  const Scalar by = static_cast<Scalar>(params.value("drift_reserve_gain", 0.15));
  const Scalar bu = static_cast<Scalar>(params.value("drift_control_gain", 0.25));
  const Scalar sx = static_cast<Scalar>(params.value("noise_state_gain", 0.2));
  const Scalar sy = static_cast<Scalar>(params.value("noise_reserve_gain", 0.1));
  const Scalar su = static_cast<Scalar>(params.value("noise_control_gain", 0.15));
  const Scalar fy = static_cast<Scalar>(params.value("driver_reserve_gain", 0.4));
  const Scalar fz = static_cast<Scalar>(params.value("driver_sensitivity_gain", 0.3));
  const Scalar fx = static_cast<Scalar>(params.value("driver_state_gain", 0.2));
  const Scalar fu = static_cast<Scalar>(params.value("driver_control_gain", 0.3));

  model.drift = [=](int, Index, const Vec& x, const Vec& y, const Vec&, const Vec& u) {
    Vec out(1);
    out[0] = bx * std::sin(x[0]) + by * y[0] + bu * u[0];
    return out;
  };
  model.drift_x = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, bx * std::cos(x[0])));
  };
  model.drift_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, by));
  };
  model.drift_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Zero(1, 1));
  };
  model.drift_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, bu));
  };

  model.diffusion = [=](int, Index, const Vec& x, const Vec& y, const Vec&, const Vec& u) {
    Vec out(1);
    out[0] = sx * std::sin(x[0]) + sy * y[0] + su * u[0];
    return out;
  };
  model.diffusion_x = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, sx * std::cos(x[0])));
  };
  model.diffusion_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, sy));
  };
  model.diffusion_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Zero(1, 1));
  };
  model.diffusion_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, su));
  };

  model.driver = [=](int, Index, const Vec& x, const Vec& y, const Vec& z, const Vec& u) {
    Vec out(1);
    out[0] = -(fy * y[0] + fz * z[0] + fx * x[0] + fu * u[0]);
    return out;
  };
  model.driver_x = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fx));
  };
  model.driver_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fy));
  };
  model.driver_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fz));
  };
  model.driver_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, -fu));
  };

  detail::fill_scalar_quadratic_costs<Scalar>(
      model, static_cast<Scalar>(params.value("state_weight", 1.0)),
      static_cast<Scalar>(params.value("reserve_weight", 0.4)),
      static_cast<Scalar>(params.value("sensitivity_weight", 0.4)),
      static_cast<Scalar>(params.value("effort_weight", 1.0)),
      static_cast<Scalar>(params.value("terminal_weight", 1.0)),
      static_cast<Scalar>(params.value("initial_weight", 1.0)), Scalar(0));
  // terminal map constant, initial map linear: the structural sufficiency case
  detail::fill_affine_boundaries<Scalar>(model, Scalar(0), Scalar(-0.3), Scalar(0.4), Scalar(0));
  model.controls = {ControlSet<Scalar>::all_of_space(1)};
  return model;
}

template <typename Scalar>
ModelSpec<Scalar> decoupled_model(int horizon, const nlohmann::json& params = {}) {
  ModelSpec<Scalar> model;
  model.name = "decoupled";
  model.n = 1;
  model.m = 1;
  model.horizon = horizon;
  using Vec = VecX<Scalar>;
  const Scalar bx = static_cast<Scalar>(params.value("drift_state_gain", 0.2));
  const Scalar bu = static_cast<Scalar>(params.value("drift_control_gain", 0.5));
  const Scalar b0 = static_cast<Scalar>(params.value("drift_offset", 0.1));
  const Scalar sx = static_cast<Scalar>(params.value("noise_state_gain", 0.1));
  const Scalar s0 = static_cast<Scalar>(params.value("noise_offset", 0.3));
  const Scalar fy = static_cast<Scalar>(params.value("driver_reserve_gain", 0.6));
  const Scalar fz = static_cast<Scalar>(params.value("driver_sensitivity_gain", 0.2));
  const Scalar fu = static_cast<Scalar>(params.value("driver_control_gain", 0.3));

  auto const_mat = [](Scalar v) { return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, v)); };
  model.drift = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec& u) {
    Vec out(1);
    out[0] = b0 + bx * x[0] + bu * u[0];
    return out;
  };
  model.drift_x = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(bx);
  };
  model.drift_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(Scalar(0));
  };
  model.drift_z = model.drift_y;
  model.drift_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(bu);
  };
  model.diffusion = [=](int, Index, const Vec& x, const Vec&, const Vec&, const Vec&) {
    Vec out(1);
    out[0] = s0 + sx * x[0];
    return out;
  };
  model.diffusion_x = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(sx);
  };
  model.diffusion_y = model.drift_y;
  model.diffusion_z = model.drift_y;
  model.diffusion_u = model.drift_y;
  model.driver = [=](int, Index, const Vec&, const Vec& y, const Vec& z, const Vec& u) {
    Vec out(1);
    out[0] = -(fy * y[0] + fz * z[0] + fu * u[0]);
    return out;
  };
  model.driver_x = model.drift_y;
  model.driver_y = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(-fy);
  };
  model.driver_z = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(-fz);
  };
  model.driver_u = [=](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return const_mat(-fu);
  };

  detail::fill_scalar_quadratic_costs<Scalar>(model, Scalar(1), Scalar(0.5), Scalar(0.5),
                                              Scalar(1), Scalar(1), Scalar(1), Scalar(0));
  detail::fill_affine_boundaries<Scalar>(
      model, static_cast<Scalar>(params.value("initial_level", 0.5)), Scalar(0),
      static_cast<Scalar>(params.value("terminal_level", 0.2)), Scalar(0));
  model.controls = {ControlSet<Scalar>::all_of_space(1)};
  return model;
}

template <typename Scalar>
ModelSpec<Scalar> zero_model(int horizon, const nlohmann::json& params = {}) {
  ModelSpec<Scalar> model;
  model.name = "zero";
  model.n = params.value("n", 1);
  model.m = params.value("m", 1);
  model.horizon = horizon;
  using Vec = VecX<Scalar>;
  const Index n = model.n, m = model.m;
  auto vzero = [n](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return Vec(Vec::Zero(n));
  };
  auto mzero_n = [n](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Zero(n, n));
  };
  auto mzero_m = [n, m](int, Index, const Vec&, const Vec&, const Vec&, const Vec&) {
    return MatX<Scalar>(MatX<Scalar>::Zero(n, m));
  };
  model.drift = vzero;
  model.diffusion = vzero;
  model.driver = vzero;
  model.drift_x = mzero_n;
  model.drift_y = mzero_n;
  model.drift_z = mzero_n;
  model.drift_u = mzero_m;
  model.diffusion_x = mzero_n;
  model.diffusion_y = mzero_n;
  model.diffusion_z = mzero_n;
  model.diffusion_u = mzero_m;
  model.driver_x = mzero_n;
  model.driver_y = mzero_n;
  model.driver_z = mzero_n;
  model.driver_u = mzero_m;
  detail::fill_scalar_quadratic_costs<Scalar>(
      model, static_cast<Scalar>(params.value("state_weight", 0.0)),
      static_cast<Scalar>(params.value("reserve_weight", 0.0)),
      static_cast<Scalar>(params.value("sensitivity_weight", 0.0)),
      static_cast<Scalar>(params.value("effort_weight", 0.0)),
      static_cast<Scalar>(params.value("terminal_weight", 0.0)),
      static_cast<Scalar>(params.value("initial_weight", 0.0)),
      static_cast<Scalar>(params.value("cost_offset", 0.0)));
  detail::fill_affine_boundaries<Scalar>(model, Scalar(0), Scalar(0), Scalar(0), Scalar(0));
  model.controls = {ControlSet<Scalar>::all_of_space(m)};
  return model;
}

namespace detail {

// Generic LQ family with scalar parameters (n = m = 1, uniform stages).
template <typename Scalar>
LQCoefficients<Scalar> lq_coefficients_from_params(int horizon, const nlohmann::json& params) {
  auto scal = [&](const char* key, double dflt) {
    return MatX<Scalar>(MatX<Scalar>::Constant(1, 1, static_cast<Scalar>(params.value(key, dflt))));
  };
  LQStageData<Scalar> st;
  st.A = scal("A", 1.0);
  st.B = scal("B", 0.1);
  st.Q = scal("Q", 0.2);
  st.L = scal("L", 0.1);
  st.C1 = scal("C1", 1.0);
  st.C2 = scal("C2", 0.2);
  st.C3 = scal("C3", 0.3);
  st.C4 = scal("C4", 0.5);
  st.D = scal("D", 0.5);
  st.R = scal("R", 0.2);
  st.S = scal("S", 0.1);
  VecX<Scalar> eta(1);
  eta[0] = static_cast<Scalar>(params.value("eta", 0.3));
  auto coeffs = LQCoefficients<Scalar>::uniform(horizon, std::move(st), scal("M0", 1.0),
                                                scal("MN", 1.0), scal("N", 0.4), std::move(eta));
  coeffs.validate();
  return coeffs;
}

template <typename Scalar>
StorageParams<Scalar> storage_params_from_json(const nlohmann::json& params) {
  StorageParams<Scalar> p;
  auto get = [&](const char* key, Scalar dflt) {
    return static_cast<Scalar>(params.value(key, static_cast<double>(dflt)));
  };
  p.horizon = params.value("horizon", p.horizon);
  p.retention = get("retention", p.retention);
  p.reserve_coupling = get("reserve_coupling", p.reserve_coupling);
  p.noise_state_gain = get("noise_state_gain", p.noise_state_gain);
  p.noise_sensitivity = get("noise_sensitivity", p.noise_sensitivity);
  p.dispatch_gain = get("dispatch_gain", p.dispatch_gain);
  p.dispatch_noise_gain = get("dispatch_noise_gain", p.dispatch_noise_gain);
  p.reserve_dispatch_gain = get("reserve_dispatch_gain", p.reserve_dispatch_gain);
  p.level_weight = get("level_weight", p.level_weight);
  p.reserve_weight = get("reserve_weight", p.reserve_weight);
  p.sensitivity_weight = get("sensitivity_weight", p.sensitivity_weight);
  p.effort_weight = get("effort_weight", p.effort_weight);
  p.initial_coupling = get("initial_coupling", p.initial_coupling);
  p.terminal_reserve = get("terminal_reserve", p.terminal_reserve);
  p.initial_weight = get("initial_weight", p.initial_weight);
  p.terminal_weight = get("terminal_weight", p.terminal_weight);
  return p;
}

}  // namespace detail

// Builds a registry model by name. `horizon` bounds the stage index the
// solvers will use. Unknown names raise ConfigError.
template <typename Scalar>
ModelSpec<Scalar> make_model(const std::string& name, int horizon,
                             const nlohmann::json& params = nlohmann::json::object()) {
  if (name == "zero") return zero_model<Scalar>(horizon, params);
  if (name == "tanh_drift") return tanh_drift_model<Scalar>(horizon, params);
  if (name == "sine_drift") return sine_drift_model<Scalar>(horizon, params);
  if (name == "decoupled") return decoupled_model<Scalar>(horizon, params);
  if (name == "lq")
    return as_model(detail::lq_coefficients_from_params<Scalar>(horizon, params));
  if (name == "storage") {
    auto p = detail::storage_params_from_json<Scalar>(params);
    p.horizon = std::max(p.horizon, horizon);
    return as_model(storage_preset(p));
  }
  throw ConfigError("unknown registry model '" + name + "'");
}

// LQ coefficient bundles for the families that have one.
template <typename Scalar>
LQCoefficients<Scalar> make_lq_coefficients(const std::string& name, int horizon,
                                            const nlohmann::json& params = nlohmann::json::object()) {
  if (name == "lq") return detail::lq_coefficients_from_params<Scalar>(horizon, params);
  if (name == "storage") {
    auto p = detail::storage_params_from_json<Scalar>(params);
    p.horizon = std::max(p.horizon, horizon);
    return storage_preset(p);
  }
  throw ConfigError("registry model '" + name + "' has no LQ coefficient bundle");
}

}  // namespace fbsdelta
