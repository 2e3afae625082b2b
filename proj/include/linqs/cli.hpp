#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation or physics
// failure, 2 usage error.

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linqs/core_model.hpp"
#include "linqs/errors.hpp"
#include "linqs/fock_oracle.hpp"
#include "linqs/model_io.hpp"
#include "linqs/moment_dynamics.hpp"

namespace linqs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline std::string fmt(double v) { return format_double(v, 12); }

inline void print_matrix(std::ostream& out, const std::string& name, const MatrixXd& m) {
  out << name << " =\n";
  for (Index i = 0; i < m.rows(); ++i) {
    out << " ";
    for (Index j = 0; j < m.cols(); ++j) out << "  " << fmt(m(i, j));
    out << '\n';
  }
}

inline void print_vector(std::ostream& out, const std::string& name, const VectorXd& v) {
  out << name << " =";
  for (Index i = 0; i < v.size(); ++i) out << "  " << fmt(v(i));
  out << '\n';
}

inline std::string fmt(Complex z) {
  return fmt(z.real()) + (z.imag() < 0.0 ? " - " : " + ") + fmt(std::abs(z.imag())) + "i";
}

namespace detail {

inline int cmd_build(const std::string& path, std::ostream& out) {
  const auto model = load_model(path);
  const auto ad = build_drift_diffusion(model.system);
  print_matrix(out, "A", ad.drift);
  print_matrix(out, "D", ad.diffusion);
  out << "norm2(A) = " << fmt(spectral_norm(ad.drift)) << '\n';
  out << "suggested dt = " << fmt(suggested_dt(ad)) << '\n';
  return kExitOk;
}

inline int cmd_simulate(const std::string& path, double t_final, double dt, std::size_t every,
                        const std::string& out_path, std::ostream& out) {
  const auto model = load_model(path);
  const auto ad = build_drift_diffusion(model.system);
  const auto traj = integrate(ad, model.initial, t_final, dt, every);
  save_trajectory(traj, out_path);
  const auto& last = traj.back();
  out << "samples = " << traj.size() << '\n';
  out << "t = " << fmt(last.time()) << '\n';
  print_vector(out, "mean", last.mean());
  print_matrix(out, "V", last.covariance());
  const auto phys = check_physical(last, SymplecticForm(model.system.n_modes));
  out << "min eig(V + i/2 Sigma) = " << fmt(phys.min_eigenvalue) << '\n';
  out << "wrote " << out_path << '\n';
  return kExitOk;
}

inline int cmd_steadystate(const std::string& path, std::ostream& out) {
  const auto model = load_model(path);
  const auto ad = build_drift_diffusion(model.system);
  const auto ss = steady_state(ad);
  if (!ss.stable()) {
    out << "unstable: drift matrix is not Hurwitz (need Re(lambda) < -" << fmt(kHurwitzTol)
        << ")\n";
    out << "offending eigenvalues:\n";
    for (Index i = 0; i < ss.drift_eigenvalues.size(); ++i)
      if (!(ss.drift_eigenvalues(i).real() < -kHurwitzTol))
        out << "  " << fmt(ss.drift_eigenvalues(i)) << '\n';
    return kExitFailure;
  }
  print_matrix(out, "V_ss", *ss.covariance);
  out << "residual = " << fmt(ss.residual) << '\n';
  const GaussianMomentState state(0.0, VectorXd::Zero(ad.dim()), *ss.covariance);
  const double det = ss.covariance->determinant();
  if (det > 0.0)
    out << "purity = " << fmt(purity(state)) << '\n';
  else
    out << "purity = undefined (det V_ss = " << fmt(det) << ")\n";
  return kExitOk;
}

inline int cmd_validate(const std::string& path, std::ostream& out) {
  const auto file = read_model(path);
  const auto report = validate_model(file.system);
  for (const auto& c : report.checks)
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name << (c.detail.empty() ? "" : ": ")
        << c.detail << '\n';
  if (file.ordering != QuadratureOrdering::block) {
    out << "FAIL  quadrature ordering: interleaved ordering is not supported\n";
    return kExitFailure;
  }
  if (!report.ok()) return kExitFailure;

  LoadedModel model;
  try {
    model = finalize_model(file);
  } catch (const ValidationError& e) {
    out << "FAIL  initial state: " << e.what() << '\n';
    return kExitFailure;
  }
  out << "PASS  initial state shape\n";
  const auto phys = check_physical(model.initial, SymplecticForm(model.system.n_modes));
  out << (phys.physical ? "PASS  " : "FAIL  ") << "uncertainty relation: min eig(V + i/2 Sigma) = "
      << fmt(phys.min_eigenvalue) << '\n';
  if (model.initial.covariance().determinant() > 0.0)
    out << "initial purity = " << fmt(purity(model.initial)) << '\n';
  return phys.physical ? kExitOk : kExitFailure;
}

inline int cmd_oracle(const std::string& path, Index cutoff, double t_final, double dt,
                      std::size_t every, const std::string& out_path, std::ostream& out) {
  const auto model = load_model(path);
  const auto ad = build_drift_diffusion(model.system);
  const auto rig = build_rig(model.system, cutoff);
  if (cutoff <= kTailLevels)
    throw CutoffError("cutoff must exceed " + std::to_string(kTailLevels) +
                      " tail levels used for the adequacy check");
  const auto rho0 = gaussian_density(rig, model.initial);
  const double tail0 = cutoff_adequacy(rho0, kTailLevels);
  if (tail0 > kTailThreshold)
    throw CutoffError("cutoff inadequate: initial tail population " + fmt(tail0) + " in top " +
                      std::to_string(kTailLevels) + " levels exceeds " + fmt(kTailThreshold) +
                      "; raise --cutoff");

  const auto moments = integrate(ad, model.initial, t_final, dt, every);
  const auto densities = integrate_master(rig, rho0, t_final, dt, every);

  Trajectory extracted;
  extracted.integrator = "rk4-lindblad";
  extracted.step = dt;
  extracted.fingerprint = moments.fingerprint;
  double mean_dev = 0.0, cov_dev = 0.0, tail = tail0, purity_dev = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    const auto m = moments_from_density(rig, densities[i]);
    mean_dev = std::max(mean_dev, max_abs(m.mean() - moments[i].mean()));
    cov_dev = std::max(cov_dev, max_abs(m.covariance() - moments[i].covariance()));
    tail = std::max(tail, cutoff_adequacy(densities[i], kTailLevels));
    if (moments[i].covariance().determinant() > 0.0)
      purity_dev = std::max(purity_dev,
                            std::abs(purity(moments[i]) - purity_exact(densities[i])));
    extracted.push_back(m);
  }
  save_trajectory(extracted, out_path);

  out << "samples = " << densities.size() << '\n';
  out << "max mean deviation = " << fmt(mean_dev) << '\n';
  out << "max covariance deviation = " << fmt(cov_dev) << '\n';
  out << "max purity deviation = " << fmt(purity_dev) << '\n';
  out << "max tail population (top " << kTailLevels << " levels) = " << fmt(tail) << '\n';
  out << "wrote " << out_path << '\n';
  if (tail > kTailThreshold) {
    out << "cutoff inadequate: tail population exceeded " << fmt(kTailThreshold)
        << " during the run; raise --cutoff\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear open quantum system moment simulator with a Fock-space oracle", "linqs"};
  app.require_subcommand(1);

  std::string model;
  double t_final = 0.0, dt = 0.0;
  std::size_t every = 1;
  Index cutoff = 0;
  std::string out_path;

  auto* build = app.add_subcommand("build", "Print drift A, diffusion D and ||A||_2");
  build->add_option("model", model, "Model file")->required();

  auto* simulate = app.add_subcommand("simulate", "Integrate the moment equations to CSV");
  simulate->add_option("model", model, "Model file")->required();
  simulate->add_option("--t-final", t_final, "Final time")->required();
  simulate->add_option("--dt", dt, "RK4 step")->required();
  simulate->add_option("--out", out_path, "Output CSV")->required();
  simulate->add_option("--sample-every", every, "Record every k-th step")->check(CLI::PositiveNumber);

  auto* steady = app.add_subcommand("steadystate", "Solve the stationary covariance");
  steady->add_option("model", model, "Model file")->required();

  auto* validate = app.add_subcommand("validate", "Report model validation and physicality");
  validate->add_option("model", model, "Model file")->required();

  auto* oracle = app.add_subcommand("oracle", "Cross-check moments against the Fock-space oracle");
  oracle->add_option("model", model, "Model file")->required();
  oracle->add_option("--cutoff", cutoff, "Fock cutoff per mode")->required();
  oracle->add_option("--t-final", t_final, "Final time")->required();
  oracle->add_option("--dt", dt, "RK4 step")->required();
  oracle->add_option("--out", out_path, "Output CSV of oracle moments")->required();
  oracle->add_option("--sample-every", every, "Record every k-th step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*build) return detail::cmd_build(model, out);
    if (*simulate) return detail::cmd_simulate(model, t_final, dt, every, out_path, out);
    if (*steady) return detail::cmd_steadystate(model, out);
    if (*validate) return detail::cmd_validate(model, out);
    if (*oracle) return detail::cmd_oracle(model, cutoff, t_final, dt, every, out_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"linqs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace linqs::cli
