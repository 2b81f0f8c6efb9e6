#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "auvhunt/acoustics.hpp"
#include "auvhunt/amadp/schedule.hpp"
#include "auvhunt/covert.hpp"
#include "auvhunt/harness/cli.hpp"
#include "auvhunt/harness/pipeline.hpp"

namespace py = pybind11;
using namespace auvhunt;

namespace {

harness::RunConfig parse_config(const std::string& text) {
  return text.empty() ? harness::RunConfig{}
                      : harness::from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Covert multi-AUV hunting: channel model, simulation and diffusion policies";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());

  py::class_<acoustics::ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("frequency_khz", &acoustics::ChannelParams::frequency_khz)
      .def_readwrite("spreading", &acoustics::ChannelParams::spreading)
      .def_readwrite("shipping", &acoustics::ChannelParams::shipping)
      .def_readwrite("wind_mps", &acoustics::ChannelParams::wind_mps)
      .def_readwrite("bandwidth_hz", &acoustics::ChannelParams::bandwidth_hz);

  py::class_<covert::CovertParams>(m, "CovertParams")
      .def(py::init<>())
      .def_readwrite("transmit_power_w", &covert::CovertParams::transmit_power_w)
      .def_readwrite("jam_power_w", &covert::CovertParams::jam_power_w)
      .def_readwrite("channel_uses", &covert::CovertParams::channel_uses)
      .def_readwrite("epsilon", &covert::CovertParams::epsilon)
      .def("kl_bound", &covert::CovertParams::kl_bound);

  py::class_<covert::DetectionSnapshot>(m, "DetectionSnapshot")
      .def_readonly("distance_m", &covert::DetectionSnapshot::distance_m)
      .def_readonly("beta", &covert::DetectionSnapshot::beta)
      .def_readonly("noise_total_w", &covert::DetectionSnapshot::noise_total_w)
      .def_readonly("threshold_w", &covert::DetectionSnapshot::threshold_w)
      .def_readonly("kl", &covert::DetectionSnapshot::kl)
      .def_readonly("covert_ok", &covert::DetectionSnapshot::covert_ok);

  m.def("thorp_db_per_km", [](double f) { return acoustics::thorp_db_per_km(f).value; },
        py::arg("frequency_khz"));
  m.def("path_loss_db",
        [](double d_km, const acoustics::ChannelParams& c) {
          return acoustics::path_loss_db(d_km, c).value;
        },
        py::arg("distance_km"), py::arg("channel") = acoustics::ChannelParams{});
  m.def("ambient_noise_db",
        [](const acoustics::ChannelParams& c) {
          const auto n = acoustics::ambient_noise_db(c);
          return py::dict(py::arg("turbulence") = n.turbulence.value,
                          py::arg("shipping") = n.shipping.value, py::arg("wind") = n.wind.value,
                          py::arg("thermal") = n.thermal.value, py::arg("total") = n.total.value);
        },
        py::arg("channel") = acoustics::ChannelParams{});
  m.def("ambient_noise_watts", &acoustics::ambient_noise_watts, py::arg("channel"),
        py::arg("reference_scale"));
  m.def("snr_beta", &covert::snr_beta, py::arg("transmit_power_w"), py::arg("path_loss_linear"),
        py::arg("noise_total_w"));
  m.def("optimal_threshold", &covert::optimal_threshold, py::arg("noise_total_w"),
        py::arg("beta"));
  m.def("kl_budget", &covert::kl_budget, py::arg("beta"), py::arg("channel_uses"));
  m.def("is_covert", &covert::is_covert, py::arg("kl"), py::arg("epsilon"));
  m.def("evaluate_link", &covert::evaluate_link, py::arg("distance_m"), py::arg("covert"),
        py::arg("channel"), py::arg("ambient_noise_w"), py::arg("min_distance_m") = 1.0);
  m.def("min_covert_distance", &covert::min_covert_distance, py::arg("covert"),
        py::arg("channel"), py::arg("ambient_noise_w"), py::arg("max_distance_m"),
        py::arg("tolerance_m") = 1e-3);

  m.def("alpha_bar",
        [](int K, double beta_start, double beta_end) {
          const auto s = amadp::make_schedule(K, beta_start, beta_end);
          std::vector<double> out;
          for (int k = 1; k <= s.steps(); ++k) out.push_back(s.alpha_bar_at(k));
          return out;
        },
        py::arg("K"), py::arg("beta_start"), py::arg("beta_end"),
        "alpha_bar_k for k = 1..K of a linear beta schedule.");

  m.def("q_sample",
        [](const std::vector<float>& x0, int k, const std::vector<float>& noise, int K,
           double beta_start, double beta_end) {
          return amadp::q_sample(x0, k, noise, amadp::make_schedule(K, beta_start, beta_end));
        },
        py::arg("x0"), py::arg("k"), py::arg("noise"), py::arg("K"), py::arg("beta_start"),
        py::arg("beta_end"));

  m.def("default_config", [] { return harness::dump(harness::RunConfig{}); },
        "Default run configuration as JSON text.");
  m.def("config_hash",
        [](const std::string& text) { return harness::config_hash(parse_config(text)); },
        py::arg("config_json"));
  m.def("simulate",
        [](const std::string& text, const std::string& policy, int episodes) {
          const auto cfg = parse_config(text);
          cfg.validate();
          std::vector<env::EpisodeTrace> traces;
          {
            py::gil_scoped_release release;
            traces = harness::evaluate_scripted(cfg, behavior::policy_from_string(policy),
                                                episodes, harness::seeds(cfg).simulate);
          }
          auto report = harness::summarize(traces, cfg.env, policy);
          report.config_hash = harness::config_hash(cfg);
          return harness::to_json(report).dump();
        },
        py::arg("config_json"), py::arg("policy"), py::arg("episodes"),
        "Scripted-policy episodes; returns the metrics report as JSON text.");
  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = harness::run_cli(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line interface in-process: (exit code, stdout, stderr).");
}
