#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "torus_kam/automorphy.hpp"
#include "torus_kam/instance.hpp"
#include "torus_kam/json_io.hpp"
#include "torus_kam/kam.hpp"

namespace py = pybind11;
namespace tk = torus_kam;

namespace {

tk::Series series_from_json_str(const std::string& s) {
  return tk::io::series_from_json(tk::io::json::parse(s));
}

std::string series_to_json_str(const tk::Series& f) {
  return tk::io::series_to_json(f).dump();
}

} // namespace

PYBIND11_MODULE(_torus_kam, m) {
  m.doc() = "commuting deck transformations near complex tori: matrix "
            "logarithms, small divisors, cohomological equations and the "
            "Newton linearization scheme";

  py::register_exception<tk::SingularLattice>(m, "SingularLattice");
  py::register_exception<tk::NotCommuting>(m, "NotCommuting");
  py::register_exception<tk::ResonantInput>(m, "ResonantInput");
  py::register_exception<tk::PBandOverflow>(m, "PBandOverflow");
  py::register_exception<tk::ResonantDivisor>(m, "ResonantDivisorError");
  py::register_exception<tk::NoConvergence>(m, "NoConvergenceError");
  py::register_exception<tk::InvalidParams>(m, "InvalidParamsError");

  py::class_<tk::Lattice>(m, "Lattice")
      .def(py::init<int, Eigen::MatrixXcd>(), py::arg("n"), py::arg("e_prime"))
      .def_readonly("n", &tk::Lattice::n)
      .def_readonly("e_prime", &tk::Lattice::e_prime)
      .def("validate", &tk::Lattice::validate);

  py::class_<tk::DomainSpec>(m, "DomainSpec")
      .def(py::init([](double eps, double r) {
             tk::DomainSpec d{eps, r};
             d.validate();
             return d;
           }),
           py::arg("eps"), py::arg("r"))
      .def_readonly("eps", &tk::DomainSpec::eps)
      .def_readonly("r", &tk::DomainSpec::r);

  m.def("kappa", &tk::kappa, "separation constant 2*pi*sigma_min/sqrt(n)");
  m.def("kappa0", &tk::kappa0);
  m.def(
      "sup_h_pow",
      [](const tk::Lattice& lat, double eps, const std::vector<int>& P) {
        return tk::sup_h_pow(lat, eps, P);
      },
      py::arg("lattice"), py::arg("eps"), py::arg("P"));
  m.def("parallelotope_vertices", &tk::parallelotope_vertices);

  m.def("commuting_logs", [](const std::vector<Eigen::MatrixXcd>& mats) {
    return tk::commuting_logs(tk::CommutingFamily(mats));
  });
  m.def("flow_map",
        [](const std::vector<Eigen::MatrixXcd>& logs,
           const std::vector<tk::Complex>& z) { return tk::flow_map(logs, z); });
  m.def("log_upper_triangular", &tk::log_upper_triangular);

  py::class_<tk::Series>(m, "Series")
      .def_static("from_json", &series_from_json_str)
      .def("to_json", &series_to_json_str)
      .def_property_readonly("v_min", &tk::Series::v_min)
      .def_property_readonly("term_count", &tk::Series::term_count)
      .def("eval", [](const tk::Series& f, const std::vector<tk::Complex>& h,
                      const std::vector<tk::Complex>& v) {
        return tk::eval(f, h, v);
      });

  py::class_<tk::LinearDeck>(m, "LinearDeck")
      .def_static("from_lattice", &tk::LinearDeck::from_lattice)
      .def_readonly("lam", &tk::LinearDeck::lam)
      .def_readonly("mu", &tk::LinearDeck::mu);

  py::class_<tk::DivisorRecord>(m, "DivisorRecord")
      .def_readonly("P", &tk::DivisorRecord::P)
      .def_readonly("Q", &tk::DivisorRecord::Q)
      .def_readonly("value", &tk::DivisorRecord::value)
      .def_readonly("argmax", &tk::DivisorRecord::argmax);

  m.def(
      "small_divisor",
      [](const tk::LinearDeck& deck, const std::vector<int>& P,
         const std::vector<int>& Q, bool horizontal, int index) {
        return tk::small_divisor(deck, P, Q, {horizontal, index});
      },
      py::arg("deck"), py::arg("P"), py::arg("Q"), py::arg("horizontal"),
      py::arg("index"));
  m.def("nonresonance_ok", [](const tk::LinearDeck& deck, int N) {
    return tk::nonresonance_scan(deck, N).ok;
  });
  m.def(
      "diophantine_fit",
      [](const tk::LinearDeck& deck, int N, double tau) {
        const auto fit = tk::diophantine_fit(deck, N, tau);
        return py::make_tuple(fit.D_fit, fit.tau_exp, fit.N_scan);
      },
      py::arg("deck"), py::arg("N"), py::arg("tau_exp"));

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto cfg =
            tk::io::config_from_json(tk::io::json::parse(config_json));
        const auto inst = tk::gen_instance(cfg);
        auto params = cfg.kam;
        const auto fit =
            tk::diophantine_fit(inst.sys.linear, cfg.n_scan, cfg.tau_exp);
        params.tau_exp = fit.tau_exp;
        params.D_fit = fit.D_fit;
        const auto res = tk::run(inst.sys, params);
        tk::io::json out;
        out["kam"] = tk::io::report_to_json(res.report);
        out["fit"] = tk::io::fit_to_json(fit, true);
        out["phi_total"] = tk::io::series_to_json(res.phi_total);
        out["phi_true_max_dev"] =
            tk::sub(res.phi_total, inst.phi_true).max_abs_coeff();
        return out.dump();
      },
      "generate an instance from a config JSON string, run the full "
      "linearization, and return the report as JSON");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "0.1.0";
#endif
}
