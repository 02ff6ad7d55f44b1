#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "v2xmac/chain_oracle.hpp"
#include "v2xmac/config.hpp"
#include "v2xmac/metrics.hpp"
#include "v2xmac/sim.hpp"

namespace py = pybind11;
using namespace v2xmac;

namespace {

Tech parse_tech(const std::string& name) {
  if (name == "cv2x") return Tech::Cv2x;
  if (name == "dot11p") return Tech::Dot11p;
  throw ModelError(ErrorCode::InvalidParameter, "tech must be 'cv2x' or 'dot11p'");
}

py::dict as_dict(const MetricsReport& r) {
  py::dict d;
  d["tech"] = std::string(to_string(r.tech));
  d["N"] = r.vehicles;
  d["P_col"] = r.collision;
  d["d_avg_ms"] = r.delay_defined ? py::cast(r.delay_ms) : py::none();
  d["CU_avg"] = r.utilization;
  d["P_t"] = r.transmit;
  d["P_txo"] = r.tx_opportunity;
  d["theta"] = r.theta;
  d["P_qe"] = r.queue_empty;
  d["iterations"] = r.fixed_point.iterations;
  d["converged"] = r.fixed_point.converged;
  d["T_C"] = r.fixed_point.cam_interval;
  return d;
}

py::dict as_dict(const SimReport& r) {
  auto est = [](const Estimate& e) { return py::make_tuple(e.mean, e.ci95); };
  py::dict d;
  d["tech"] = std::string(to_string(r.tech));
  d["P_col"] = est(r.collision);
  d["d_avg_ms"] = est(r.delay_ms);
  d["CU_avg"] = est(r.utilization);
  d["transmissions"] = r.transmissions;
  d["drops"] = r.drops;
  d["unreliable"] = r.unreliable;
  d["replications"] = r.replications;
  d["generated"] = r.counters.generated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Analytical MAC models of C-V2X Mode 4 and IEEE 802.11p";

  // Messages start with the error code name, e.g. "InvalidParameter: ...".
  py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);

  py::class_<ScenarioConfig>(m, "Scenario")
      .def(py::init<>())
      .def_static("parse", [](const std::string& text) { return parse_config(text); })
      .def("serialize", &serialize_config)
      .def("get", [](const ScenarioConfig& c, const std::string& key) { return get_field(c, key); })
      .def("set", [](ScenarioConfig& c, const std::string& key, const std::string& value) {
        set_field(c, key, value);
        if (key == "cv2x.gamma") resolve_rc_bounds(c);
        validate(c);
      })
      .def("expand", &expand_sweep)
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; })
      .def("__repr__", [](const ScenarioConfig& c) { return serialize_config(c); });

  m.def("config_keys", &config_keys);

  m.def("solve_cam", [](int interval, double p_t) { return solve_cam(interval, p_t).flatten(); },
        py::arg("interval"), py::arg("p_t"));
  m.def("solve_denm",
        [](int interval, int k, double lam, double window, double p_t) {
          TrafficParams t;
          t.denm_interval = interval;
          t.denm_repetitions = k;
          t.denm_rate = lam;
          t.trigger_window_s = window;
          return solve_denm(t, p_t).flatten();
        },
        py::arg("interval"), py::arg("K"), py::arg("lam"), py::arg("window_s") = 0.001, py::arg("p_t"));
  m.def("solve_queue", [](double a, double a1, double b, int cap) { return solve_queue(a, a1, b, cap).probs; },
        py::arg("alpha"), py::arg("alpha1"), py::arg("beta"), py::arg("M"));
  m.def("update_theta", &update_theta, py::arg("p_t"), py::arg("N"));
  m.def("adaptive_cam_rate", &adaptive_cam_rate, py::arg("theta"), py::arg("base_T_C"));

  m.def("oracle_steady_state",
        [](const std::string& kind, const ScenarioConfig& scenario, double p_t, double p_qe, double p_arr,
           double theta) {
          CouplingState s;
          s.transmit = p_t;
          s.queue_empty = p_qe;
          s.queue_nonempty = 1.0 - p_qe;
          s.arrival_when_empty = p_arr;
          s.channel_busy = theta;
          const auto pi = solve_steady_state(build_chain(parse_chain_kind(kind), scenario, s));
          return py::make_tuple(pi.labels, pi.probs);
        },
        py::arg("kind"), py::arg("scenario"), py::arg("p_t") = 0.01, py::arg("p_qe") = 0.9, py::arg("p_arr") = 0.0,
        py::arg("theta") = 0.1);

  m.def("evaluate",
        [](const std::string& tech, const ScenarioConfig& scenario) {
          MetricsReport r;
          {
            py::gil_scoped_release release;
            r = evaluate(parse_tech(tech), scenario);
          }
          return as_dict(r);
        },
        py::arg("tech"), py::arg("scenario"));

  m.def("simulate",
        [](const std::string& tech, const ScenarioConfig& scenario, std::uint64_t seed, double duration_s,
           int replications, int jobs) {
          SimOptions o;
          o.seed = seed;
          o.duration_s = duration_s;
          o.replications = replications;
          o.jobs = jobs;
          SimReport r;
          {
            py::gil_scoped_release release;
            r = run_sim(parse_tech(tech), scenario, o);
          }
          return as_dict(r);
        },
        py::arg("tech"), py::arg("scenario"), py::arg("seed") = 1, py::arg("duration_s") = 60.0,
        py::arg("replications") = 20, py::arg("jobs") = 1);
}
