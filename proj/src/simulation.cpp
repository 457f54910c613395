#include "netmpc/simulation.hpp"

#include <algorithm>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "netmpc/protocol.hpp"

namespace netmpc {

namespace {

constexpr double kViolationTol = 1e-8;

std::vector<int> violated_rows(const PlantModel& plant, const Vec& x,
                               const Vec& u) {
  std::vector<int> rows;
  const Vec sx = plant.Mx * x - plant.nx;
  for (int i = 0; i < sx.size(); ++i)
    if (sx(i) > kViolationTol) rows.push_back(i);
  const Vec su = plant.Mu * u - plant.nu;
  for (int i = 0; i < su.size(); ++i)
    if (su(i) > kViolationTol) rows.push_back(static_cast<int>(sx.size()) + i);
  return rows;
}

int first_delivery(const std::vector<int>& ages) {
  for (int t = 0; t < static_cast<int>(ages.size()); ++t)
    if (ages[t] <= t) return t;
  return -1;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Stochastic: return "stochastic";
    case Variant::DeterministicBuffered: return "deterministic";
    case Variant::Lqr: return "lqr";
    case Variant::UnconstrainedStochastic: return "unconstrained";
  }
  throw std::invalid_argument("unknown variant");
}

ExperimentSpec ExperimentSpec::make(const SynthesisParams& sp, Variant v,
                                    Vec x0, int horizon, std::uint64_t seed) {
  ExperimentSpec e;
  e.variant = v;
  e.x0 = std::move(x0);
  e.horizon = horizon;
  e.seed = seed;
  e.d_spec = {sp.bounds.d_lo, sp.bounds.d_hi, sp.chain, std::nullopt};
  e.h_spec = {sp.bounds.h_lo, sp.bounds.h_hi, std::nullopt, std::nullopt};
  e.s_spec = {sp.bounds.s_lo, sp.bounds.s_hi, std::nullopt, std::nullopt};
  return e;
}

void ExperimentSpec::script_d(int value) {
  d_spec.script = std::vector<int>(horizon, value);
}
void ExperimentSpec::script_h(int value) {
  h_spec.script = std::vector<int>(horizon, value);
}
void ExperimentSpec::script_s(int value) {
  s_spec.script = std::vector<int>(horizon, value);
}

double Trace::final_cost() const {
  return steps.empty() ? 0.0 : steps.back().J;
}

SynthesisParams deterministic_buffered_params(const SynthesisParams& sp) {
  AgeBounds b = sp.bounds;
  b.d_lo = b.d_hi;
  MarkovChain single(b.d_hi, b.d_hi, Vec::Ones(1), Mat::Ones(1, 1));
  return SynthesisParams::make(sp.plant, b, sp.weights, sp.dims.N, single);
}

Trace run_closed_loop(const SynthesisTables& tables,
                      const ExperimentSpec& spec) {
  const SynthesisParams& sp = tables.params;
  const PlantModel& plant = sp.plant;
  const AgeBounds& b = sp.bounds;
  const int m = plant.m();

  NetworkRealization r =
      sample_realization(spec.d_spec, spec.h_spec, spec.s_spec, spec.horizon,
                         spec.seed);
  if (spec.variant == Variant::DeterministicBuffered)
    std::fill(r.D.begin(), r.D.end(), b.d_hi);  // buffer holds to max age
  const int K_d = first_delivery(r.D);

  Trace trace;
  trace.seed = spec.seed;
  trace.variant = variant_name(spec.variant);

  MpcController controller(tables,
                           spec.variant == Variant::UnconstrainedStochastic
                               ? MpcController::Mode::Unconstrained
                               : MpcController::Mode::Constrained);
  ControllerView view;
  std::vector<Vec> x{spec.x0};
  std::vector<ControllerPacket> packets;
  double J = 0.0;

  for (int k = 0; k < spec.horizon; ++k) {
    Vec u;
    bool feasible = true;
    if (spec.variant == Variant::Lqr) {
      // Direct state feedback once the first state can have arrived.
      u = (k < b.h_hi) ? Vec(Vec::Zero(m)) : Vec(-tables.aux.lqr.L * x[k]);
    } else {
      std::optional<SensorPacket> sensor;
      std::optional<ActuatorPacket> ack;
      if (r.H[k] <= k)
        sensor = make_sensor_packet(k - r.H[k], x, b.h_lo, b.h_hi);
      if (r.S[k] <= k) {
        const int ts = k - r.S[k];
        ack = make_actuator_packet(ts, r.D, (K_d >= 0 && ts >= K_d) ? K_d : -1,
                                   b.s_lo, b.s_hi);
      }
      view.advance(k, sensor, ack);
      const MpcController::StepResult res = controller.step(view);
      packets.push_back(res.packet);
      feasible = res.feasible;
      u = actuator_apply(k, r.D[k], packets, m, b.d_lo, b.d_hi);
    }

    J += x[k].dot(sp.weights.Q * x[k]) + u.dot(sp.weights.R * u);
    TraceStep step;
    step.k = k;
    step.x = x[k];
    step.u = u;
    step.D = r.D[k];
    step.H = r.H[k];
    step.S = r.S[k];
    step.feasible = feasible;
    step.J = J;
    step.violations = violated_rows(plant, x[k], u);
    trace.violation_count += static_cast<int>(step.violations.size());
    trace.steps.push_back(std::move(step));
    if (!feasible) {
      trace.feasible = false;
      break;
    }
    x.push_back(plant.A * x[k] + plant.B * u);
  }
  return trace;
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream out;
  out.precision(17);
  const int n = trace.steps.empty() ? 0 : static_cast<int>(trace.steps[0].x.size());
  const int m = trace.steps.empty() ? 0 : static_cast<int>(trace.steps[0].u.size());
  out << "k";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",u" << i;
  out << ",D,H,S,feasible,Jtilde\n";
  for (const TraceStep& s : trace.steps) {
    out << s.k;
    for (int i = 0; i < n; ++i) out << "," << s.x(i);
    for (int i = 0; i < m; ++i) out << "," << s.u(i);
    out << "," << s.D << "," << s.H << "," << s.S << ","
        << (s.feasible ? 1 : 0) << "," << s.J << "\n";
  }
  return out.str();
}

std::string summary_json(const std::vector<Trace>& traces) {
  nlohmann::json out = nlohmann::json::array();
  for (const Trace& t : traces) {
    nlohmann::json e;
    e["variant"] = t.variant;
    e["seed"] = t.seed;
    e["steps"] = t.steps.size();
    e["feasible"] = t.feasible;
    e["violations"] = t.violation_count;
    e["final_cost"] = t.final_cost();
    out.push_back(std::move(e));
  }
  return out.dump(2) + "\n";
}

std::string compare_csv(const std::vector<Trace>& traces) {
  std::ostringstream out;
  out.precision(17);
  out << "k";
  for (const Trace& t : traces) out << ",J_" << t.variant;
  out << "\n";
  std::size_t len = 0;
  for (const Trace& t : traces) len = std::max(len, t.steps.size());
  for (std::size_t k = 0; k < len; ++k) {
    out << k;
    for (const Trace& t : traces) {
      out << ",";
      if (k < t.steps.size()) out << t.steps[k].J;
    }
    out << "\n";
  }
  return out.str();
}

std::string trace_svg(const Trace& trace) {
  const int width = 640, height = 360, pad = 40;
  const int T = static_cast<int>(trace.steps.size());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  auto polyline = [&](auto value, const char* color) {
    double top = 1e-12;
    for (const TraceStep& s : trace.steps) top = std::max(top, value(s));
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (int k = 0; k < T; ++k) {
      const double px =
          pad + (T > 1 ? (width - 2.0 * pad) * k / (T - 1) : 0.0);
      const double py =
          height - pad - (height - 2.0 * pad) * value(trace.steps[k]) / top;
      out << px << "," << py << " ";
    }
    out << "\"/>\n";
  };
  polyline([](const TraceStep& s) { return s.x.cwiseAbs().maxCoeff(); },
           "#1f77b4");
  polyline([](const TraceStep& s) { return s.u.cwiseAbs().maxCoeff(); },
           "#ff7f0e");
  polyline([](const TraceStep& s) { return s.J; }, "#2ca02c");
  out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\""
      << width - 2 * pad << "\" height=\"" << height - 2 * pad
      << "\" fill=\"none\" stroke=\"#444\"/>\n</svg>\n";
  return out.str();
}

}  // namespace netmpc
