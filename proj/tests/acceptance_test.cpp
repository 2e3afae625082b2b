// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "linqs/linqs.hpp"
#include "test_support.hpp"

namespace {

using namespace linqs;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Every trajectory produced by the criteria below, for the physicality sweep.
std::vector<std::pair<std::string, Trajectory>> g_trajectories;

void record(const std::string& name, const Trajectory& t) { g_trajectories.emplace_back(name, t); }

struct OracleRun {
  double mean_dev = 0.0;
  double cov_dev = 0.0;
  double tail = 0.0;
  std::size_t samples = 0;
};

OracleRun oracle_compare(const std::string& name, const LinearOpenSystem& sys, Complex alpha) {
  const Index cutoff = 20;
  const double dt = 1e-3, t_final = 5.0;
  const std::size_t every = 10;
  const auto ad = build_drift_diffusion(sys);
  const auto rig = build_rig(sys, cutoff);
  const auto rho0 = product_state(rig, {coherent_state(cutoff, alpha)});
  const auto m0 = moments_from_density(rig, rho0);

  const auto moments = integrate(ad, m0, t_final, dt, every);
  const auto densities = integrate_master(rig, rho0, t_final, dt, every);
  OracleRun out;
  out.samples = densities.size();
  Trajectory extracted;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    const auto m = moments_from_density(rig, densities[i]);
    out.mean_dev = std::max(out.mean_dev, max_abs(m.mean() - moments[i].mean()));
    out.cov_dev = std::max(out.cov_dev, max_abs(m.covariance() - moments[i].covariance()));
    out.tail = std::max(out.tail, cutoff_adequacy(densities[i], kTailLevels));
    extracted.push_back(m);
  }
  record(name + " moments", moments);
  record(name + " oracle", extracted);
  return out;
}

Outcome oracle_outcome(const OracleRun& r) {
  const bool pass = r.samples == 501 && r.mean_dev <= 1e-3 && r.cov_dev <= 1e-3 && r.tail <= 1e-8;
  return {pass, "mean dev " + sci(r.mean_dev) + ", cov dev " + sci(r.cov_dev) + ", tail " +
                    sci(r.tail) + ", samples " + std::to_string(r.samples)};
}

Outcome ac1() {
  const auto ad = build_drift_diffusion(testing::damped_oscillator(1.0, 0.5));
  MatrixXd a(2, 2);
  a << -0.25, 1.0, -1.0, -0.25;
  const MatrixXd d = 0.25 * MatrixXd::Identity(2, 2);
  const double ea = max_abs(ad.drift - a), ed = max_abs(ad.diffusion - d);
  return {ea <= 1e-12 && ed <= 1e-12, "|A - A*| = " + sci(ea) + ", |D - D*| = " + sci(ed)};
}

Outcome ac2() {
  const auto ss = steady_state(build_drift_diffusion(testing::damped_oscillator(1.0, 0.5)));
  if (!ss.stable()) return {false, "drift not Hurwitz"};
  const double ev = max_abs(*ss.covariance - 0.5 * MatrixXd::Identity(2, 2));
  const GaussianMomentState state(0.0, VectorXd::Zero(2), *ss.covariance);
  const double ep = std::abs(purity(state) - 1.0);
  Trajectory t;
  t.push_back(state);
  record("steady state", t);
  return {ev <= 1e-12 && ss.residual <= 1e-12 && ep <= 1e-10,
          "|V_ss - I/2| = " + sci(ev) + ", residual " + sci(ss.residual) + ", |purity - 1| = " +
              sci(ep)};
}

Outcome ac3() {
  return oracle_outcome(oracle_compare("one channel", testing::damped_oscillator(1.0, 0.5), 0.5));
}

Outcome ac4() {
  return oracle_outcome(oracle_compare("two channels", testing::two_channel_oscillator(0.4, 0.3),
                                       0.5));
}

Outcome ac5() {
  const auto sys = testing::closed_oscillator(1.0);
  MatrixXd v0(2, 2);
  v0 << 1.0, 0.0, 0.0, 0.25;
  const GaussianMomentState init(0.0, VectorXd::Zero(2), v0);
  const auto traj = integrate(build_drift_diffusion(sys), init, 10.0, 1e-3);
  record("closed system", traj);
  const double det0 = v0.determinant(), pur0 = purity(init);
  double det_dev = 0.0, pur_dev = 0.0;
  for (const auto& s : traj.samples()) {
    det_dev = std::max(det_dev, std::abs(s.covariance().determinant() - det0) / det0);
    pur_dev = std::max(pur_dev, std::abs(purity(s) - pur0) / pur0);
  }
  return {det_dev <= 1e-8 && pur_dev <= 1e-8 && traj.back().time() == 10.0,
          "rel det drift " + sci(det_dev) + ", rel purity drift " + sci(pur_dev)};
}

Outcome ac6() {
  const auto sys = testing::damped_oscillator(1.0, 0.5);
  const auto ad = build_drift_diffusion(sys);
  const auto rig = build_rig(sys, 20);
  const auto init = moments_from_density(rig, product_state(rig, {coherent_state(20, 0.5)}));
  const double t_final = 5.0;
  // Samples land on the shared 1e-3 grid for every step size.
  const auto coarse = integrate(ad, init, t_final, 1e-3, 1);
  const auto fine = integrate(ad, init, t_final, 5e-4, 2);
  const auto ref = integrate(ad, init, t_final, 1.25e-4, 8);
  record("convergence dt=1e-3", coarse);
  record("convergence dt=5e-4", fine);
  record("convergence reference", ref);
  if (coarse.size() != ref.size() || fine.size() != ref.size())
    return {false, "sample grids differ"};
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    e1 = std::max(e1, testing::moment_distance(coarse[i], ref[i]));
    e2 = std::max(e2, testing::moment_distance(fine[i], ref[i]));
  }
  const double ratio = e1 / e2;
  return {ratio >= 12.0 && ratio <= 20.0,
          "err(1e-3) " + sci(e1) + ", err(5e-4) " + sci(e2) + ", ratio " + sci(ratio)};
}

Outcome ac7() {
  double worst = INFINITY;
  std::string where;
  std::size_t count = 0;
  for (const auto& [name, traj] : g_trajectories)
    for (const auto& s : traj.samples()) {
      const auto check = check_physical(s, SymplecticForm(s.n_modes()), 1e-9);
      ++count;
      if (check.min_eigenvalue < worst) {
        worst = check.min_eigenvalue;
        where = name;
      }
    }
  return {count > 0 && worst >= -1e-9, "min eig(V + i/2 Sigma) = " + sci(worst) + " (" + where +
                                           ") over " + std::to_string(count) + " samples"};
}

Outcome ac8() {
  testing::Random rng(2024);
  double trace_worst = 0.0, herm_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.integer(1, 2);
    const auto rig = build_rig(rng.system(n, rng.integer(1, 3)), n == 1 ? 10 : 4);
    const MatrixXcd rho = rng.hermitian(rig.hilbert_dim());
    const MatrixXcd l = lindblad_rhs(rig, rho);
    trace_worst = std::max(trace_worst, std::abs(l.trace()));
    herm_worst = std::max(herm_worst, max_abs(l - MatrixXcd(l.adjoint())));
  }

  bool sigma_ok = true;
  for (Index n = 1; n <= 4; ++n) {
    const MatrixXd s = symplectic_form(n).matrix();
    const MatrixXd id = MatrixXd::Identity(2 * n, 2 * n);
    sigma_ok = sigma_ok && MatrixXd(s.transpose()) == MatrixXd(-s) &&
               MatrixXd(s * s) == MatrixXd(-id) && MatrixXd(s * s.transpose()) == id;
  }

  double psd_worst = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const auto sys = rng.system(rng.integer(1, 4), rng.integer(1, 4));
    psd_worst = std::min(psd_worst, min_hermitian_eigenvalue(build_diffusion(sys)));
  }
  return {trace_worst <= 1e-12 && herm_worst <= 1e-12 && sigma_ok && psd_worst >= -1e-10,
          "trace " + sci(trace_worst) + ", hermiticity " + sci(herm_worst) + ", sigma " +
              (sigma_ok ? "exact" : "BROKEN") + ", min eig D " + sci(psd_worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 drift/diffusion construction", ac1},
      {"AC2 steady state", ac2},
      {"AC3 oracle equivalence, one channel", ac3},
      {"AC4 oracle equivalence, two channels", ac4},
      {"AC5 closed-system conservation", ac5},
      {"AC6 convergence order", ac6},
      {"AC7 physicality preservation", ac7},
      {"AC8 invariant suites", ac8},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
