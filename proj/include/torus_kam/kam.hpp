#pragma once

#include <string>
#include <vector>

#include "torus_kam/cohomology.hpp"
#include "torus_kam/system.hpp"

namespace torus_kam {

enum class OverflowPolicy { strict, tolerant };

struct KamParams {
  double delta0 = 0.0;
  double eps0 = 0.0;
  double r0 = 0.0;
  double mu_exp = 0.0;
  int q0 = 1;
  int K_max = 32;
  double tau_exp = 0.0;
  double D_fit = 0.0;
  OverflowPolicy overflow_policy = OverflowPolicy::strict;
  double target_residual = 1e-12;
  double commutation_tol = 1e-8;
  double dilation_safety = 1e-2;

  static double default_mu_exp(double tau, int n, int d) {
    return 3.0 * (tau + double(n) + double(d));
  }

  /// delta0 < (kappa/20) eps0 and delta0 < ln(2)/10; throws InvalidParams.
  void validate(double kappa_val) const;
};

struct ScheduleRow {
  double delta_k = 0.0;
  double eps_k = 0.0;
  double r_k = 0.0;
  long long q_k = 0; // saturates near 2^62; runs exhaust the jet long before
};

/// delta_k = delta0/(k+1)^2, eps_{k+1} = eps_k - 5 delta_k / kappa,
/// r_{k+1} = r_k e^{-5 delta_k}, q_{k+1} = 2 q_k + 1; the conditions on
/// delta0 keep eps_k > eps0/2 and r_k > r0/2 forever.
std::vector<ScheduleRow> schedule(const KamParams& params, double kappa_val,
                                  int K);

/// Jet-exact inverse of Id + phi as Id - psi: fixed-point iteration
/// psi <- phi o (Id - psi), finite because each pass is exact on one more
/// band of vertical orders.  Requires v_min(phi) >= q+1 with q >= 1.
Series invert_map(const Series& phi, int q, double& dropped);

struct StepRow {
  int k = 0;
  long long q_k = 0;
  double delta_k = 0.0;
  double eps_k = 0.0;
  double r_k = 0.0;
  double residual_bound = 0.0;
  double phi_norm = 0.0;
  double dropped_mass = 0.0;
  int residual_v_min = 0; // q_max+1 once the jet is exhausted
  double phi_total_delta = 0.0;
};

struct KamReport {
  std::vector<StepRow> rows;
  bool converged = false;
  DomainSpec final_domain;
  double dilation = 1.0;
  double verify_bound = 0.0;
  std::string stop_reason;
};

/// Thrown when K_max is exhausted; carries the diagnostic rows.
struct KamNoConvergence : NoConvergence {
  KamReport report;
  explicit KamNoConvergence(KamReport rep)
      : NoConvergence("iteration cap reached before the residual target"),
        report(std::move(rep)) {}
};

struct NewtonStepResult {
  DeckSystem next;       // domain shrunk to (eps_{k+1}, r_{k+1})
  Series phi;            // solved transform (g part of Id + phi)
  Series psi;            // inverse part
  CohomSolveReport solve_report;
  double dropped = 0.0;
  double residual_bound = 0.0; // next residual on the shrunk domain
};

/// One conjugation step at jet order q_k: solve the cohomological equation
/// for F = -J^{2q}(pert), invert, conjugate jet-exactly, and zero the
/// (verified vanishing) low orders of the new perturbation.
NewtonStepResult newton_step(const DeckSystem& sys, int q_k,
                             const DiophantineFit& fit,
                             const KamParams& params, double delta_k,
                             double kappa_val, const DomainSpec& next_dom);

struct KamRunResult {
  Series phi_total; // g with (Id+g) o tau_hat_i = tau_i o (Id+g)
  KamReport report;
};

/// Full iteration with automatic dilation preconditioning; phi_total is
/// reported in the original (un-dilated) coordinates.
KamRunResult run(const DeckSystem& sys, const KamParams& params);

/// Certified norm bound of Phi o tau_hat_i - tau_i o Phi (max over i) with
/// Phi = Id + phi_g, plus a pointwise sampling cross-check.
double verify_conjugacy(const Series& phi_g, const DeckSystem& sys,
                        const DomainSpec& dom);

/// Coefficientwise scaling induced by the vertical dilation v -> s v on a
/// map-valued perturbation: tangential components scale by s^|Q|, normal
/// components by s^(|Q|-1).
Series dilate_perturbation(const Series& f, double s, int n);

} // namespace torus_kam
