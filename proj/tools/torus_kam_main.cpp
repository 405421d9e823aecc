// torus-kam: experiment driver for linearizing commuting deck transformations
// near a complex torus.
//
//   torus-kam <subcommand> --config <path> [--out <path>] [--seed N] [--quiet]
//
// subcommands: linearize, check-diophantine, trivialize, gen-instance, report
// exit codes:  0 success/converged, 1 config error, 2 resonance,
//              3 no convergence (includes strict-mode band overflow)

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "torus_kam/json_io.hpp"

namespace tk = torus_kam;
using tk::io::json;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

void emit(const CliOptions& opt, const json& j) {
  if (!opt.quiet) std::cout << j.dump(2) << "\n";
}

json error_object(const std::string& type, const std::string& message) {
  return json{{"error", json{{"type", type}, {"message", message}}}};
}

tk::ExperimentConfig load_config(const CliOptions& opt) {
  auto cfg = tk::io::config_from_json(tk::io::read_file(opt.config_path));
  if (opt.seed) cfg.instance.seed = *opt.seed;
  return cfg;
}

tk::Instance make_instance(const tk::ExperimentConfig& cfg) {
  if (cfg.instance.mode == tk::InstanceMode::custom_file)
    return tk::io::instance_from_json(tk::io::read_file(cfg.instance.file));
  return tk::gen_instance(cfg);
}

int cmd_linearize(const CliOptions& opt) {
  tk::ExperimentConfig cfg = load_config(opt);
  tk::Instance inst = make_instance(cfg);

  json report;
  report["meta"] = json{{"timestamp", iso_timestamp()},
                        {"command", "linearize"},
                        {"seed", cfg.instance.seed}};

  tk::DiophantineFit fit;
  try {
    fit = tk::diophantine_fit(inst.sys.linear, cfg.n_scan, cfg.tau_exp);
  } catch (const tk::ResonantInput&) {
    const auto scan = tk::nonresonance_scan(inst.sys.linear, cfg.n_scan);
    json witnesses = json::array();
    for (const auto& w : scan.witnesses)
      witnesses.push_back(tk::io::divisor_record_to_json(w));
    report["error"] = json{{"type", "ResonantInput"},
                           {"message", "resonance inside the scan range"},
                           {"witnesses", std::move(witnesses)}};
    if (!opt.out_path.empty()) tk::io::write_file(opt.out_path, report);
    if (!cfg.report_path.empty()) tk::io::write_file(cfg.report_path, report);
    emit(opt, report);
    return 2;
  }
  report["fit"] = tk::io::fit_to_json(fit, true);

  tk::KamParams params = cfg.kam;
  params.tau_exp = fit.tau_exp;
  params.D_fit = fit.D_fit;

  int code = 0;
  try {
    const tk::KamRunResult res = tk::run(inst.sys, params);
    report["kam"] = tk::io::report_to_json(res.report);
    report["phi_total"] = tk::io::series_to_json(res.phi_total);
    if (!inst.phi_true.empty()) {
      const double dev =
          tk::sub(res.phi_total, inst.phi_true).max_abs_coeff();
      report["phi_true_max_dev"] = dev;
    }
    const std::string csv = tk::io::report_to_csv(res.report);
    if (!cfg.csv_path.empty()) {
      std::ofstream out(cfg.csv_path);
      out << csv;
    }
  } catch (const tk::ResonantDivisor& e) {
    report["error"] = json{{"type", "ResonantDivisor"},
                           {"message", e.what()},
                           {"P", e.P},
                           {"Q", e.Q},
                           {"target",
                            json{{"kind", e.horizontal ? "horizontal" : "vertical"},
                                 {"index", e.target_index}}},
                           {"value", e.value}};
    code = 2;
  } catch (const tk::KamNoConvergence& e) {
    report["error"] = json{{"type", "NoConvergence"}, {"message", e.what()}};
    report["kam"] = tk::io::report_to_json(e.report);
    code = 3;
  } catch (const tk::PBandOverflow& e) {
    report["error"] = json{{"type", "PBandOverflow"},
                           {"message", e.what()},
                           {"dropped_mass", e.dropped_mass}};
    code = 3;
  }

  if (!opt.out_path.empty()) tk::io::write_file(opt.out_path, report);
  if (!cfg.report_path.empty()) tk::io::write_file(cfg.report_path, report);
  emit(opt, report);
  return code;
}

int cmd_check_diophantine(const CliOptions& opt) {
  tk::ExperimentConfig cfg = load_config(opt);
  tk::Instance inst = make_instance(cfg);
  const auto scan = tk::nonresonance_scan(inst.sys.linear, cfg.n_scan);
  json verdict;
  int code = 0;
  if (scan.ok) {
    const auto fit =
        tk::diophantine_fit(inst.sys.linear, cfg.n_scan, cfg.tau_exp);
    verdict = tk::io::fit_to_json(fit, true);
  } else {
    tk::DiophantineFit fit;
    fit.tau_exp = cfg.tau_exp;
    fit.D_fit = 0.0;
    fit.N_scan = cfg.n_scan;
    fit.worst = scan.witnesses.front();
    verdict = tk::io::fit_to_json(fit, false);
    code = 2;
  }
  verdict["splitting_check"] =
      tk::splitting_divisor_check(inst.sys.linear, cfg.n_scan);
  if (!opt.out_path.empty()) tk::io::write_file(opt.out_path, verdict);
  emit(opt, verdict);
  return code;
}

int cmd_trivialize(const CliOptions& opt) {
  const auto factor =
      tk::io::factor_from_json(tk::io::read_file(opt.config_path));
  const auto triv = tk::trivialize_over_cylinder(factor);
  json out;
  json logs = json::array();
  for (const auto& L : triv.logs) logs.push_back(tk::io::matrix_to_json(L));
  out["logs"] = std::move(logs);
  out["factor"] = tk::io::factor_to_json(triv.factor);
  double dev = 0.0;
  for (int j = 0; j < factor.lat.n; ++j)
    dev = std::max(dev,
                   tk::mat_norm(Eigen::MatrixXcd(
                       triv.factor.rho[std::size_t(j)] -
                       Eigen::MatrixXcd::Identity(factor.d, factor.d))));
  out["max_unit_generator_dev"] = dev;
  if (!opt.out_path.empty()) tk::io::write_file(opt.out_path, out);
  emit(opt, out);
  return 0;
}

int cmd_gen_instance(const CliOptions& opt) {
  tk::ExperimentConfig cfg = load_config(opt);
  const tk::Instance inst = tk::gen_instance(cfg);
  json j = tk::io::instance_to_json(inst);
  j["meta"] = json{{"seed", cfg.instance.seed},
                   {"pert_norm", cfg.instance.pert_norm}};
  const std::string path =
      !opt.out_path.empty()
          ? opt.out_path
          : (!cfg.report_path.empty() ? cfg.report_path : "instance.json");
  tk::io::write_file(path, j);
  if (!opt.quiet) std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_report(const CliOptions& opt) {
  const json j = tk::io::read_file(opt.config_path);
  if (!j.contains("kam"))
    throw tk::InvalidParams("report: file has no kam section");
  const json& rows = j.at("kam").at("rows");
  std::string csv =
      "k,q_k,delta_k,eps_k,r_k,residual_bound,phi_norm,dropped_mass\n";
  for (const auto& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.at("k").get<int>(), r.at("q_k").get<long long>(),
                  r.at("delta_k").get<double>(), r.at("eps_k").get<double>(),
                  r.at("r_k").get<double>(),
                  r.at("residual_bound").get<double>(),
                  r.at("phi_norm").get<double>(),
                  r.at("dropped_mass").get<double>());
    csv += buf;
  }
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    out << csv;
  }
  if (!opt.quiet) {
    std::cout << csv;
    std::cout << "converged: " << j.at("kam").at("converged").dump() << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"linearization experiments for commuting deck transformations "
               "near a complex torus"};
  app.require_subcommand(1);

  CliOptions opt;
  std::uint64_t seed_arg = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "configuration file")
        ->required();
    sub->add_option("--out", opt.out_path, "output path");
    sub->add_option("--seed", seed_arg, "override instance seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_flag("--quiet", opt.quiet, "suppress stdout report");
  };

  CLI::App* linearize = app.add_subcommand("linearize", "full pipeline");
  CLI::App* checkd =
      app.add_subcommand("check-diophantine", "small-divisor scan and fit");
  CLI::App* trivialize =
      app.add_subcommand("trivialize", "trivialize a constant factor");
  CLI::App* gen = app.add_subcommand("gen-instance", "generate an instance");
  CLI::App* report = app.add_subcommand("report", "re-render CSV from a report");
  for (CLI::App* sub : {linearize, checkd, trivialize, gen, report})
    add_common(sub);

  CLI11_PARSE(app, argc, argv);
  if (seed_set) opt.seed = seed_arg;

  try {
    if (linearize->parsed()) return cmd_linearize(opt);
    if (checkd->parsed()) return cmd_check_diophantine(opt);
    if (trivialize->parsed()) return cmd_trivialize(opt);
    if (gen->parsed()) return cmd_gen_instance(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const nlohmann::json::exception& e) {
    std::cout << error_object("ConfigError", e.what()).dump(2) << "\n";
    return 1;
  } catch (const tk::ResonantInput& e) {
    std::cout << error_object("ResonantInput", e.what()).dump(2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cout << error_object("ConfigError", e.what()).dump(2) << "\n";
    return 1;
  }
  return 1;
}
