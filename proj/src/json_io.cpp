#include "torus_kam/json_io.hpp"

#include <cstdio>
#include <fstream>

namespace torus_kam::io {

namespace {

json complex_to_json(const Complex& z) {
  return json::array({z.real(), z.imag()});
}

Complex complex_from_json(const json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

json matrix_to_json(const Eigen::MatrixXcd& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(complex_to_json(M(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  const int rows = int(j.size());
  const int cols = rows ? int(j.at(0).size()) : 0;
  Eigen::MatrixXcd M(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) M(r, c) = complex_from_json(j.at(r).at(c));
  return M;
}

json lattice_to_json(const Lattice& lat) {
  return json{{"n", lat.n}, {"e_prime", matrix_to_json(lat.e_prime)}};
}

Lattice lattice_from_json(const json& j) {
  Lattice lat(j.at("n").get<int>(), matrix_from_json(j.at("e_prime")));
  lat.validate();
  return lat;
}

json series_to_json(const Series& f) {
  json coeffs = json::array();
  std::vector<int> Q(static_cast<std::size_t>(f.d())), P(static_cast<std::size_t>(f.n()));
  for (const auto& [k, c] : f.terms()) {
    for (int l = 0; l < f.d(); ++l) Q[std::size_t(l)] = k.v[std::size_t(l)];
    for (int i = 0; i < f.n(); ++i)
      P[std::size_t(i)] = k.v[std::size_t(f.d() + i)];
    json cj = json::array();
    for (int i = 0; i < f.m(); ++i)
      cj.push_back(complex_to_json(c.a[std::size_t(i)]));
    coeffs.push_back(json{{"Q", Q}, {"P", P}, {"c", std::move(cj)}});
  }
  return json{{"n", f.n()},         {"d", f.d()},         {"m", f.m()},
              {"Q_max", f.q_max()}, {"P_max", f.p_max()}, {"coeffs", coeffs}};
}

Series series_from_json(const json& j) {
  Series f(j.at("n").get<int>(), j.at("d").get<int>(), j.at("m").get<int>(),
           j.at("Q_max").get<int>(), j.at("P_max").get<int>());
  for (const auto& term : j.at("coeffs")) {
    const auto Q = term.at("Q").get<std::vector<int>>();
    const auto P = term.at("P").get<std::vector<int>>();
    std::vector<Complex> c;
    for (const auto& x : term.at("c")) c.push_back(complex_from_json(x));
    f.set(Q, P, c);
  }
  return f;
}

json system_to_json(const DeckSystem& sys) {
  json pert = json::array();
  for (const auto& p : sys.pert) pert.push_back(series_to_json(p));
  return json{{"lattice", lattice_to_json(sys.lat)},
              {"mu", matrix_to_json(sys.linear.mu)},
              {"dom", json{{"eps", sys.dom.eps}, {"r", sys.dom.r}}},
              {"pert", std::move(pert)}};
}

DeckSystem system_from_json(const json& j) {
  DeckSystem sys;
  sys.lat = lattice_from_json(j.at("lattice"));
  sys.linear = LinearDeck::from_lattice(sys.lat, matrix_from_json(j.at("mu")));
  sys.dom = DomainSpec{j.at("dom").at("eps").get<double>(),
                       j.at("dom").at("r").get<double>()};
  for (const auto& p : j.at("pert")) sys.pert.push_back(series_from_json(p));
  sys.validate();
  return sys;
}

json instance_to_json(const Instance& inst) {
  json j = system_to_json(inst.sys);
  j["phi_true"] = series_to_json(inst.phi_true);
  if (inst.has_planted) {
    j["planted"] = json{{"P", inst.planted_P}, {"Q", inst.planted_Q}};
  }
  return j;
}

Instance instance_from_json(const json& j) {
  Instance inst;
  inst.sys = system_from_json(j);
  if (j.contains("phi_true"))
    inst.phi_true = series_from_json(j.at("phi_true"));
  if (j.contains("planted")) {
    inst.has_planted = true;
    inst.planted_P = j.at("planted").at("P").get<std::vector<int>>();
    inst.planted_Q = j.at("planted").at("Q").get<std::vector<int>>();
  }
  return inst;
}

json factor_to_json(const ConstantFactor& f) {
  json rho = json::array();
  for (const auto& M : f.rho) rho.push_back(matrix_to_json(M));
  return json{{"lattice", lattice_to_json(f.lat)},
              {"d", f.d},
              {"rho", std::move(rho)}};
}

ConstantFactor factor_from_json(const json& j) {
  ConstantFactor f;
  f.lat = lattice_from_json(j.at("lattice"));
  f.d = j.at("d").get<int>();
  for (const auto& M : j.at("rho")) f.rho.push_back(matrix_from_json(M));
  f.validate();
  return f;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.lattice = lattice_from_json(j.at("lattice"));

  const json& bundle = j.at("bundle");
  if (bundle.contains("mu")) {
    cfg.mu = matrix_from_json(bundle.at("mu"));
  } else if (bundle.contains("hermitian_generators")) {
    for (const auto& M : bundle.at("hermitian_generators"))
      cfg.hermitian_gens.push_back(matrix_from_json(M));
  } else {
    throw InvalidParams("bundle needs mu or hermitian_generators");
  }

  const json& inst = j.at("instance");
  const std::string mode = inst.at("mode").get<std::string>();
  if (mode == "conjugated")
    cfg.instance.mode = InstanceMode::conjugated;
  else if (mode == "planted-resonance")
    cfg.instance.mode = InstanceMode::planted_resonance;
  else if (mode == "custom-file")
    cfg.instance.mode = InstanceMode::custom_file;
  else
    throw InvalidParams("unknown instance mode: " + mode);
  cfg.instance.seed = inst.at("seed").get<std::uint64_t>();
  cfg.instance.pert_norm = inst.at("pert_norm").get<double>();
  cfg.instance.q_max = inst.at("Q_max").get<int>();
  cfg.instance.p_max = inst.at("P_max").get<int>();
  if (inst.contains("file")) cfg.instance.file = inst.at("file");

  cfg.n_scan = j.at("dioph").at("N_scan").get<int>();
  cfg.tau_exp = j.at("dioph").at("tau_exp").get<double>();

  const json& kj = j.at("kam");
  cfg.kam.delta0 = kj.at("delta0").get<double>();
  cfg.kam.eps0 = kj.at("eps0").get<double>();
  cfg.kam.r0 = kj.at("r0").get<double>();
  cfg.kam.q0 = kj.value("q0", 1);
  cfg.kam.K_max = kj.value("K_max", 32);
  cfg.kam.tau_exp = cfg.tau_exp;
  const int d_guess = bundle.contains("mu")
                          ? int(cfg.mu.cols())
                          : int(cfg.hermitian_gens.front().rows());
  cfg.kam.mu_exp = kj.value(
      "mu_exp", KamParams::default_mu_exp(cfg.tau_exp, cfg.lattice.n, d_guess));
  cfg.kam.target_residual = kj.value("target_residual", 1e-12);
  cfg.kam.commutation_tol = kj.value("commutation_tol", 1e-8);
  cfg.kam.dilation_safety = kj.value("dilation_safety", 1e-2);
  const std::string policy = kj.value("overflow_policy", std::string("strict"));
  if (policy == "strict")
    cfg.kam.overflow_policy = OverflowPolicy::strict;
  else if (policy == "tolerant")
    cfg.kam.overflow_policy = OverflowPolicy::tolerant;
  else
    throw InvalidParams("unknown overflow_policy: " + policy);

  if (j.contains("output")) {
    cfg.report_path = j.at("output").value("report_path", "");
    cfg.csv_path = j.at("output").value("csv_path", "");
  }
  return cfg;
}

json divisor_record_to_json(const DivisorRecord& rec) {
  return json{{"P", rec.P},
              {"Q", rec.Q},
              {"target",
               json{{"kind", rec.target.horizontal ? "horizontal" : "vertical"},
                    {"index", rec.target.index}}},
              {"value", rec.value},
              {"argmax", rec.argmax}};
}

json fit_to_json(const DiophantineFit& fit, bool ok) {
  return json{{"ok", ok},
              {"D_fit", fit.D_fit},
              {"tau_exp", fit.tau_exp},
              {"N_scan", fit.N_scan},
              {"worst", divisor_record_to_json(fit.worst)}};
}

json report_to_json(const KamReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back(json{{"k", r.k},
                        {"q_k", r.q_k},
                        {"delta_k", r.delta_k},
                        {"eps_k", r.eps_k},
                        {"r_k", r.r_k},
                        {"residual_bound", r.residual_bound},
                        {"phi_norm", r.phi_norm},
                        {"dropped_mass", r.dropped_mass},
                        {"residual_v_min", r.residual_v_min},
                        {"phi_total_delta", r.phi_total_delta}});
  }
  return json{{"rows", std::move(rows)},
              {"converged", rep.converged},
              {"final_domain",
               json{{"eps", rep.final_domain.eps}, {"r", rep.final_domain.r}}},
              {"dilation", rep.dilation},
              {"verify_bound", rep.verify_bound},
              {"stop_reason", rep.stop_reason}};
}

std::string report_to_csv(const KamReport& rep) {
  std::string out =
      "k,q_k,delta_k,eps_k,r_k,residual_bound,phi_norm,dropped_mass\n";
  for (const auto& r : rep.rows) {
    out += std::to_string(r.k) + "," + std::to_string(r.q_k) + "," +
           fmt_double(r.delta_k) + "," + fmt_double(r.eps_k) + "," +
           fmt_double(r.r_k) + "," + fmt_double(r.residual_bound) + "," +
           fmt_double(r.phi_norm) + "," + fmt_double(r.dropped_mass) + "\n";
  }
  return out;
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidParams("cannot write " + path);
  out << j.dump(2) << "\n";
}

} // namespace torus_kam::io
