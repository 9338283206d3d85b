// Copyright 2026 The qsltraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsltraj/cli.hpp"
#include "qsltraj/ensemble.hpp"
#include "qsltraj/errors.hpp"
#include "qsltraj/integrator.hpp"
#include "qsltraj/io.hpp"
#include "qsltraj/kernels.hpp"
#include "qsltraj/metrics.hpp"
#include "qsltraj/validation.hpp"

#include <array>
#include <sstream>
#include <tuple>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace qsltraj;

namespace {

using Triple = std::array<double, 3>;

Triple to_triple(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
BlochVector from_triple(const Triple& t) { return BlochVector(t[0], t[1], t[2]); }

// JSON documents cross the boundary as text; the Python side parses them.
std::string ensemble_json(const SimParams& p, unsigned workers, int n_bins) {
    EnsembleOptions o;
    o.workers = workers;
    o.n_bins = n_bins;
    EnsembleStats s;
    {
        py::gil_scoped_release release;
        s = run_ensemble(p, o);
    }
    nlohmann::json j = stats_json(s);
    nlohmann::json vc = nlohmann::json::array();
    for (const auto& sample : s.samples) vc.push_back(sample.v_conditioned);
    j["v_c"] = std::move(vc);
    j["params"] = params_json(p);
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_qsltraj, m) {
    m.doc() = "Conditioned qubit trajectories and quantum speed limit metrics";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidStateError>(m, "InvalidStateError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<SimParams>(m, "SimParams")
        .def(py::init<>())
        .def_readwrite("omega", &SimParams::omega)
        .def_readwrite("kappa", &SimParams::kappa)
        .def_readwrite("tau", &SimParams::tau)
        .def_readwrite("dt", &SimParams::dt)
        .def_readwrite("n_traj", &SimParams::n_traj)
        .def_readwrite("seed", &SimParams::seed)
        .def_readwrite("clamp_tolerance", &SimParams::clamp_tolerance)
        .def_readwrite("max_norm_defect", &SimParams::max_norm_defect)
        .def_property(
            "initial", [](const SimParams& p) { return to_triple(p.initial.vec()); },
            [](SimParams& p, const Triple& t) { p.initial = from_triple(t); })
        .def("validate", &SimParams::validate)
        .def("n_steps", &SimParams::n_steps)
        .def("__repr__", [](const SimParams& p) { return "SimParams(" + params_json(p).dump() + ")"; });

    m.def("bloch_drift", [](const Triple& r, const SimParams& p) { return to_triple(bloch_drift(from_triple(r), p)); });
    m.def("bloch_diffusion",
          [](const Triple& r, const SimParams& p) { return to_triple(bloch_diffusion(from_triple(r), p)); });
    m.def("ensemble_state", [](double t, const SimParams& p) { return to_triple(ensemble_state_analytic(t, p).vec()); },
          py::arg("t"), py::arg("params"));
    m.def("fidelity", [](const Triple& r0, const Triple& r) { return fidelity(from_triple(r0), from_triple(r)); });
    m.def("bures_angle", &bures_angle);
    m.def("ensemble_velocity", &ensemble_velocity);
    m.def("qsl_velocity", &qsl_velocity);
    m.def("qsl_fidelity", &qsl_fidelity, py::arg("t"), py::arg("params"));
    m.def(
        "qsl_report",
        [](const SimParams& p, double target) {
            const QslReport r = qsl_report(p, target);
            py::dict d;
            d["v_ensemble"] = r.v_ensemble;
            d["v_qsl"] = r.v_qsl;
            d["target_angle"] = r.target_angle;
            d["tau_qsl_angle"] = r.tau_qsl_angle;
            d["tau_qsl_ratio"] = r.tau_qsl_ratio;
            d["tau_qsl_sweep"] = r.tau_qsl_sweep;
            d["tau_qsl_bound"] = r.tau_qsl_bound;
            return d;
        },
        py::arg("params"), py::arg("target_angle") = kDefaultTargetAngle);

    m.def(
        "simulate_trajectory",
        [](const SimParams& p, std::uint64_t traj_index) {
            const TrajectoryRecord rec = simulate_trajectory(p, traj_index);
            const VelocitySample s = conditioned_velocity(rec, p);
            std::vector<Triple> states;
            states.reserve(rec.states.size());
            for (const auto& r : rec.states) states.push_back(to_triple(r.vec()));
            py::dict d;
            d["t"] = rec.times;
            d["states"] = states;
            d["fidelity"] = rec.fidelity_path;
            d["dW"] = rec.wiener;
            d["v_c"] = s.v_conditioned;
            d["bures_final"] = s.bures_final;
            d["passage_time"] = s.passage_time;
            d["seed_used"] = rec.seed_used;
            d["clamp_events"] = rec.clamp_events;
            return d;
        },
        py::arg("params"), py::arg("traj_index") = 0);

    m.def("_run_ensemble_json", &ensemble_json, py::arg("params"), py::arg("workers") = 0, py::arg("n_bins") = 60);

    m.def(
        "histogram",
        [](const std::vector<double>& values, int n_bins) {
            const Histogram h = histogram(values, n_bins);
            return std::make_tuple(h.bin_edges, h.counts, h.density);
        },
        py::arg("values"), py::arg("n_bins"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return std::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
