// ===== Python bindings =====
//
// Thin pybind11 layer over the main operations: measure distance, preset
// configs, and the experiment runner.  Heavy objects stay in C++; the Python
// surface works with plain lists, strings, and dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfsmp/experiment.hpp"
#include "mfsmp/measure.hpp"
#include "mfsmp/parallel.hpp"
#include "mfsmp/presets.hpp"

namespace py = pybind11;

namespace {

double py_wasserstein1(const std::vector<double>& atoms_a, const std::vector<double>& atoms_b,
                       const std::vector<double>& weights_a,
                       const std::vector<double>& weights_b) {
    const mfsmp::EmpiricalMeasure a = weights_a.empty()
                                          ? mfsmp::EmpiricalMeasure(atoms_a)
                                          : mfsmp::EmpiricalMeasure(atoms_a, weights_a);
    const mfsmp::EmpiricalMeasure b = weights_b.empty()
                                          ? mfsmp::EmpiricalMeasure(atoms_b)
                                          : mfsmp::EmpiricalMeasure(atoms_b, weights_b);
    return mfsmp::wasserstein1(a, b);
}

std::string py_preset_config(const std::string& name) {
    mfsmp::ExperimentConfig cfg;
    mfsmp::apply_preset(cfg, name);
    cfg.preset = name;
    return mfsmp::serialize_config(cfg);
}

std::string py_roundtrip_config(const std::string& text) {
    return mfsmp::serialize_config(mfsmp::parse_config(text));
}

py::dict py_run(const std::string& subcommand, const std::string& config_text,
                const std::string& out_dir, int threads) {
    mfsmp::ExperimentConfig cfg = mfsmp::parse_config(config_text);
    mfsmp::set_thread_count(threads <= 0 ? 1 : static_cast<std::size_t>(threads));
    const mfsmp::ReportBundle bundle = mfsmp::run_experiment(cfg, subcommand);
    const std::filesystem::path dir = out_dir.empty() ? cfg.output : out_dir;
    const mfsmp::ReportPaths paths = mfsmp::emit_report(bundle, dir);
    py::dict out;
    out["exit_code"] = bundle.exit_code;
    out["csv"] = paths.csv.string();
    out["json"] = paths.json.string();
    out["summary"] = bundle.summary.dump(2);
    return out;
}

py::dict py_forward_summary(const std::string& config_text, int threads) {
    mfsmp::ExperimentConfig cfg = mfsmp::parse_config(config_text);
    mfsmp::set_thread_count(threads <= 0 ? 1 : static_cast<std::size_t>(threads));
    const mfsmp::ReportBundle bundle = mfsmp::run_experiment(cfg, "forward");
    const auto& js = bundle.summary["pipelines"]["forward"];
    py::dict out;
    out["cost"] = js["cost"].get<double>();
    out["cost_se"] = js["cost_se"].get<double>();
    out["iterations"] = js["iterations"].get<std::size_t>();
    out["exit_code"] = bundle.exit_code;
    return out;
}

}  // namespace

PYBIND11_MODULE(_mfsmp, m) {
    m.doc() = "Simulation and verification for partially observed mean-field control";

    m.def("wasserstein1", &py_wasserstein1, py::arg("atoms_a"), py::arg("atoms_b"),
          py::arg("weights_a") = std::vector<double>{},
          py::arg("weights_b") = std::vector<double>{},
          "Exact 1-Wasserstein distance between two weighted atomic measures; "
          "empty weights mean uniform");

    m.def("preset_names", &mfsmp::preset_names, "Names of the built-in experiment presets");
    m.def("preset_config", &py_preset_config, py::arg("name"),
          "Canonical config text for a named preset");
    m.def("roundtrip_config", &py_roundtrip_config, py::arg("text"),
          "Parse config text and serialize it back in canonical form");

    m.def("run", &py_run, py::arg("subcommand"), py::arg("config_text"),
          py::arg("out_dir") = std::string(), py::arg("threads") = 1,
          "Run one experiment pipeline and emit the CSV/JSON report pair");
    m.def("forward_summary", &py_forward_summary, py::arg("config_text"), py::arg("threads") = 1,
          "Run the forward pipeline and return the cost summary");
}
