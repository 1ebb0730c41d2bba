#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "z2lab/cluster.hpp"
#include "z2lab/constants.hpp"
#include "z2lab/exact.hpp"
#include "z2lab/experiment.hpp"
#include "z2lab/lattice.hpp"
#include "z2lab/mc.hpp"
#include "z2lab/model.hpp"
#include "z2lab/polymer.hpp"

namespace py = pybind11;
using namespace z2lab;

namespace {

RunConfig run_config(long sweeps, long burn_in, int bins, int chains, std::uint64_t seed, bool translate) {
  RunConfig cfg;
  cfg.sweeps = sweeps;
  cfg.burn_in = burn_in;
  cfg.bins = bins;
  cfg.chains = chains;
  cfg.seed = seed;
  cfg.translate = translate;
  return cfg;
}

py::object to_python(const Value& v) {
  return std::visit([](const auto& x) -> py::object { return py::cast(x); }, v);
}

py::dict table_dict(const Table& t) {
  py::dict out;
  out["columns"] = t.columns;
  py::list rows;
  for (const auto& row : t.rows) {
    py::list r;
    for (const auto& v : row) r.append(to_python(v));
    rows.append(r);
  }
  out["rows"] = rows;
  py::dict summary;
  for (const auto& [k, v] : t.summary) summary[py::str(k)] = to_python(v);
  out["summary"] = summary;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Z2 lattice gauge-Higgs model: lattices, exact sums, cluster series and Monte Carlo.";

  py::register_exception<BudgetError>(m, "BudgetError");
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<LatticeError>(m, "LatticeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<Lattice>(m, "Lattice")
      .def(py::init<std::vector<int>, std::vector<int>>(), py::arg("lo"), py::arg("hi"))
      .def_static("box", &Lattice::box, py::arg("m"), py::arg("N"))
      .def_property_readonly("dim", &Lattice::dim)
      .def_property_readonly("lo", &Lattice::lo)
      .def_property_readonly("hi", &Lattice::hi)
      .def("count", &Lattice::count, py::arg("k"))
      .def("__repr__", &Lattice::describe);

  m.def("single_plaquette", &tiny::single_plaquette);
  m.def("cube2", &tiny::cube2);
  m.def("slab", &tiny::slab);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double beta, double kappa) { return ModelParams{beta, kappa}; }), py::arg("beta"),
           py::arg("kappa"))
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(beta=" + std::to_string(p.beta) + ", kappa=" + std::to_string(p.kappa) + ")";
      });

  py::class_<Path>(m, "Path")
      .def_static("walk", &Path::walk, py::arg("lattice"), py::arg("vertices"))
      .def_static("single_edge", &Path::single_edge, py::arg("lattice"), py::arg("edge"))
      .def_property_readonly("length", &Path::length)
      .def("edges", &Path::edges)
      .def("__add__", &Path::operator+)
      .def("__neg__", [](const Path& p) { return -p; });

  m.def("build_line_pair", &build_line_pair, py::arg("lattice"), py::arg("R"), py::arg("T"));

  py::class_<ExpansionConstants>(m, "ExpansionConstants")
      .def_readonly("m", &ExpansionConstants::m)
      .def_readonly("M0", &ExpansionConstants::M0)
      .def_readonly("M1", &ExpansionConstants::M1)
      .def_readonly("M2", &ExpansionConstants::M2)
      .def_readonly("M3", &ExpansionConstants::M3)
      .def_readonly("alpha_higgs", &ExpansionConstants::alpha_higgs)
      .def_readonly("kappa0_higgs", &ExpansionConstants::kappa0_higgs)
      .def_readonly("beta0_conf", &ExpansionConstants::beta0_conf)
      .def_readonly("D0", &ExpansionConstants::D0);
  m.def("compute_constants", &compute_constants, py::arg("m") = 3, py::arg("d0_exponent") = -1);
  m.def("ceps", &ceps, py::arg("constants"), py::arg("eps"));

  m.def("ursell", &ursell, py::arg("weights"), "Ursell function of a symmetric interaction matrix.");

  m.def(
      "exact_wilson",
      [](const Lattice& lat, const ModelParams& p, const Path& g) {
        return exact_expectation(TinyLattice(lat), p, g, Ensemble::Unitary).mean;
      },
      py::arg("lattice"), py::arg("params"), py::arg("path"));
  m.def(
      "exact_mf_ratio",
      [](const Lattice& lat, const ModelParams& p, const Path& g1, const Path& g2) {
        return exact_mf_ratio(TinyLattice(lat), p, g1, g2).ratio;
      },
      py::arg("lattice"), py::arg("params"), py::arg("g1"), py::arg("g2"));

  py::class_<EstimatorResult>(m, "EstimatorResult")
      .def_readonly("mean", &EstimatorResult::mean)
      .def_readonly("stderr", &EstimatorResult::stderr_)
      .def_readonly("n_samples", &EstimatorResult::n_samples)
      .def_readonly("n_bins", &EstimatorResult::n_bins);

  py::class_<RatioResult>(m, "RatioResult")
      .def_readonly("rho", &RatioResult::rho)
      .def_readonly("log_rho", &RatioResult::log_rho)
      .def_readonly("w1", &RatioResult::w1)
      .def_readonly("w2", &RatioResult::w2)
      .def_readonly("w12", &RatioResult::w12)
      .def_property_readonly("flag", [](const RatioResult& r) { return std::string(ratio_flag_name(r.flag)); });

  m.def(
      "estimate_mf_ratios",
      [](const Lattice& lat, const ModelParams& p, const std::vector<std::pair<int, int>>& sizes, long sweeps,
         long burn_in, int bins, int chains, std::uint64_t seed, bool translate) {
        const RunConfig cfg = run_config(sweeps, burn_in, bins, chains, seed, translate);
        py::gil_scoped_release release;
        return estimate_mf_ratios(lat, p, sizes, cfg);
      },
      py::arg("lattice"), py::arg("params"), py::arg("sizes"), py::arg("sweeps") = 10000, py::arg("burn_in") = -1,
      py::arg("bins") = 50, py::arg("chains") = 1, py::arg("seed") = 1, py::arg("translate") = false);

  m.def(
      "run_experiment",
      [](const std::string& config_text, bool write) {
        const ExperimentConfig cfg = parse_config(config_text);
        if (!write) return table_dict(run_table(cfg));
        const auto art = run(cfg);
        py::dict out = table_dict(art.table);
        out["csv_path"] = art.csv_path;
        out["json_path"] = art.json_path;
        return out;
      },
      py::arg("config"), py::arg("write") = false,
      "Run an experiment from key=value config text; returns columns, rows and summary.");

  m.attr("build_id") = build_id();
}
