// holoq: configuration-driven experiment runner for pseudo-Hermitian
// holonomy computations.
//
//   holoq run <config.json> [--out DIR] [--quiet]
//   holoq verify [--filter MODULE] [--out DIR] [--quiet]
//
// Exit codes: 0 pass, 1 invariant failure, 2 config error, 3 numeric
// breakdown (exceptional point, gap closure, blow-up).

#include "holoq/biortho.hpp"
#include "holoq/bundles.hpp"
#include "holoq/dynamics.hpp"
#include "holoq/gaugeholo.hpp"
#include "holoq/json_io.hpp"
#include "holoq/tripod.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace holoq;
using holoq::io::json;

namespace {

struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string cmp = "<";  // "<" or ">"
  bool pass() const { return cmp == "<" ? measured < threshold : measured > threshold; }
};

struct Report {
  json inputs;
  json results = json::object();
  json matrices = json::object();
  std::vector<Check> checks;
  double wall_time_s = 0.0;

  void check(const std::string& name, double measured, double threshold,
             const std::string& cmp = "<") {
    checks.push_back({name, measured, threshold, cmp});
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return true;
  }
  json to_json() const {
    json rows = json::array();
    for (const auto& c : checks)
      rows.push_back(json{{"name", c.name},
                          {"measured", c.measured},
                          {"threshold", c.threshold},
                          {"cmp", c.cmp},
                          {"pass", c.pass()}});
    return json{{"inputs", inputs},
                {"results", results},
                {"matrices", matrices},
                {"checks", rows},
                {"wall_time_s", wall_time_s}};
  }
};

std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// ---------------------------------------------------------------------------
// system construction from config

struct PresetSystem {
  gauge::HamiltonianFamily family;
  bool is_u1 = false;
  double alpha = 0.0, delta = 0.0, kappa = 0.0;
};

PresetSystem preset_family(const json& cfg) {
  PresetSystem out;
  std::string preset = cfg.value("preset", std::string{});
  out.alpha = cfg.value("alpha", 0.6);
  out.delta = cfg.value("delta", 1.0);
  out.kappa = cfg.value("kappa", 1.0);
  if (preset == "tripod-u1") {
    out.family = tripod::u1_family(out.alpha, out.delta, out.kappa);
    out.is_u1 = true;
  } else if (preset == "tripod-u2") {
    out.family = tripod::u2_family(out.alpha, out.delta, out.kappa);
    out.is_u1 = false;
  } else {
    throw ConfigInvalid("unknown preset '" + preset +
                        "' (expected tripod-u1 or tripod-u2)");
  }
  return out;
}

gauge::ParamLoop loop_from_config(const json& cfg, int* n_steps = nullptr) {
  if (cfg.contains("loop")) {
    io::LoopSpec spec = io::loop_from_json(cfg["loop"]);
    if (n_steps && !cfg.contains("n_steps"))
      *n_steps = spec.steps_per_edge * int(spec.loop.points.size() - 1);
    return spec.loop;
  }
  double theta0 = cfg.value("theta0", M_PI / 2);
  double phi_span = cfg.value("phi_span", 2 * M_PI);
  return tripod::rectangle_loop(theta0, phi_span);
}

// ---------------------------------------------------------------------------
// experiment kinds

void run_decompose(const json& cfg, Report& rep) {
  ComplexMatrix H;
  if (cfg.contains("system") && cfg["system"].contains("matrix")) {
    H = io::matrix_from_json(cfg["system"]["matrix"]);
  } else if (cfg.contains("system") && cfg["system"].contains("random")) {
    const auto& r = cfg["system"]["random"];
    auto [Hr, eta] = biortho::random_pseudo_hermitian(
        r.value("n", 4), r.value("seed", cfg.value("seed", 1)));
    H = Hr;
  } else if (cfg.contains("system") && cfg["system"].contains("preset")) {
    auto sys = preset_family(cfg["system"]);
    gauge::ParamPoint p(2);
    p << cfg["system"].value("theta", 0.0), cfg["system"].value("phi", 0.0);
    H = sys.family.h_at(p);
  } else {
    throw ConfigInvalid("decompose needs system.matrix, system.random or system.preset");
  }

  auto sys = biortho::biorthogonal_eig(H, cfg.value("degeneracy_tol", -1.0));
  auto eta = biortho::metric_from_left(sys);

  json eigs = json::array();
  for (Eigen::Index i = 0; i < sys.eigenvalues.size(); ++i)
    eigs.push_back(io::complex_to_json(sys.eigenvalues(i)));
  rep.results["eigenvalues"] = eigs;
  rep.results["reconstruction_residual"] = sys.reconstruction_residual;
  double defect = (sys.left_frame.adjoint() * sys.right_frame -
                   ComplexMatrix::Identity(sys.dim, sys.dim))
                      .cwiseAbs()
                      .maxCoeff();
  rep.results["biortho_defect"] = defect;
  rep.results["metric_min_eigenvalue"] = eta.min_eigenvalue;
  double phr = biortho::pseudo_hermiticity_residual(H, eta);
  rep.results["pseudo_hermiticity_residual"] = phr;
  rep.matrices["right_frame"] = io::matrix_to_json(sys.right_frame);
  rep.matrices["left_frame"] = io::matrix_to_json(sys.left_frame);
  rep.matrices["eta"] = io::matrix_to_json(eta.matrix);

  rep.check("biortho_defect", defect, 1e-10);
  rep.check("reconstruction_residual", sys.reconstruction_residual, 1e-10);
  rep.check("pseudo_hermiticity_residual", phr, 1e-8);
  rep.check("metric_min_eigenvalue", eta.min_eigenvalue, 0.0, ">");
}

void dump_gauge_field(const PresetSystem& sys, int grid, const fs::path& path) {
  std::ofstream csv(path);
  csv << "theta,phi,mu";
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) csv << ",re_" << r << c << ",im_" << r << c;
  csv << "\n";
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      gauge::ParamPoint p(2);
      p << (i + 0.5) * M_PI / grid, (j + 0.5) * 2 * M_PI / grid;
      auto s = gauge::gauge_field(sys.family, p, gauge::LevelSelector{0.0});
      for (int mu = 0; mu < 2; ++mu) {
        csv << fmt17(p(0)) << "," << fmt17(p(1)) << "," << mu;
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            csv << "," << fmt17(s.components[mu](r, c).real()) << ","
                << fmt17(s.components[mu](r, c).imag());
        csv << "\n";
      }
    }
}

void run_holonomy(const json& cfg, Report& rep, const fs::path& out_dir,
                  bool dumps_allowed) {
  auto sys = preset_family(cfg);
  int n_steps = cfg.value("n_steps", 2000);
  auto loop = loop_from_config(cfg, &n_steps);
  tripod::TripodGateReport gate =
      sys.is_u1 ? tripod::gate_u1(loop, sys.alpha, sys.delta, sys.kappa, n_steps)
                : tripod::gate_u2(loop, sys.alpha, sys.delta, sys.kappa, n_steps);

  rep.results[sys.is_u1 ? "beta1" : "beta2"] = gate.beta;
  rep.results["discrepancy"] = gate.discrepancy;
  rep.results["pseudo_unitarity_residual"] = gate.pseudo_unitarity_residual;
  rep.matrices["gate"] = io::matrix_to_json(gate.gate);
  rep.matrices["numeric_holonomy"] = io::matrix_to_json(gate.numeric_holonomy);
  rep.check("discrepancy", gate.discrepancy, 1e-6);
  rep.check("pseudo_unitarity_residual", gate.pseudo_unitarity_residual, 1e-8);

  if (dumps_allowed && cfg.value("dump_gauge_field", false))
    dump_gauge_field(sys, cfg.value("gauge_grid", 8), out_dir / "gauge_field.csv");
}

void run_tripod_gates(const json& cfg, Report& rep) {
  auto sys = preset_family(cfg);
  auto loop = loop_from_config(cfg);
  int n_steps = cfg.value("n_steps", 2000);
  tripod::TripodGateReport gate =
      sys.is_u1 ? tripod::gate_u1(loop, sys.alpha, sys.delta, sys.kappa, n_steps)
                : tripod::gate_u2(loop, sys.alpha, sys.delta, sys.kappa, n_steps);
  rep.results[sys.is_u1 ? "beta1" : "beta2"] = gate.beta;
  rep.results["discrepancy"] = gate.discrepancy;
  rep.results["pseudo_unitarity_residual"] = gate.pseudo_unitarity_residual;
  rep.matrices["gate"] = io::matrix_to_json(gate.gate);
  rep.matrices["numeric_holonomy"] = io::matrix_to_json(gate.numeric_holonomy);
  rep.check("discrepancy", gate.discrepancy, 1e-6);
  rep.check("pseudo_unitarity_residual", gate.pseudo_unitarity_residual, 1e-8);

  // companion gate on the other chart over the same loop: universality witness
  double beta_other =
      (sys.is_u1 ? tripod::gate_u2(loop, sys.alpha, sys.delta, sys.kappa, 200)
                 : tripod::gate_u1(loop, sys.alpha, sys.delta, sys.kappa, 200))
          .beta;
  double b1 = sys.is_u1 ? gate.beta : beta_other;
  double b2 = sys.is_u1 ? beta_other : gate.beta;
  double comm = tripod::commutator_check(b1, b2);
  rep.results["commutator_residual"] = comm;
  rep.check("commutator_residual", comm, 1e-12);
}

void write_trajectory_csv(const dynamics::Trajectory& traj, const fs::path& path) {
  std::ofstream csv(path);
  const Eigen::Index n = traj.states.front().size();
  csv << "t";
  for (Eigen::Index i = 0; i < n; ++i) csv << ",re_" << i << ",im_" << i;
  csv << ",eta_norm\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    csv << fmt17(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i)
      csv << "," << fmt17(traj.states[k](i).real()) << ","
          << fmt17(traj.states[k](i).imag());
    csv << "," << fmt17(traj.eta_norms[k]) << "\n";
  }
}

void run_evolve(const json& cfg, Report& rep, const fs::path& out_dir,
                bool dumps_allowed) {
  auto sys = preset_family(cfg);
  auto loop = loop_from_config(cfg);
  std::vector<double> T_values;
  if (cfg.contains("T_values"))
    for (const auto& v : cfg["T_values"]) T_values.push_back(v.get<double>());
  else
    T_values = {cfg.value("T", 100.0)};
  int n_steps = cfg.value("n_steps", 200000);
  int stride = cfg.value("record_stride", std::max(1, n_steps / 1000));

  int gate_steps = cfg.value("holonomy_steps", 1000);
  auto hol = sys.is_u1
                 ? tripod::gate_u1(loop, sys.alpha, sys.delta, sys.kappa, gate_steps)
                 : tripod::gate_u2(loop, sys.alpha, sys.delta, sys.kappa, gate_steps);
  auto base = sys.family.frame_provider(loop.points.front());
  auto eta = sys.family.metric_at(loop.points.front());

  json errors = json::array(), drifts = json::array(), leaks = json::array();
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  dynamics::Trajectory last_traj;
  for (double T : T_values) {
    auto tdsys = dynamics::system_from_loop(sys.family, loop, T);
    std::vector<dynamics::Trajectory> trajs;
    double drift = 0.0;
    for (int col = 0; col < 2; ++col) {
      trajs.push_back(dynamics::evolve(tdsys, ComplexVector(base.right.col(col)),
                                       n_steps, dynamics::GeneratorKind::Full, 1e-6,
                                       stride));
      drift = std::max(drift, dynamics::norm_conservation_drift(trajs.back()));
    }
    double leak = 0.0;
    ComplexMatrix G = dynamics::adiabatic_gate_extract(
        std::span<const dynamics::Trajectory>(trajs.data(), trajs.size()), base.right,
        base.left, eta, &leak, 1.0);
    double err = (G - hol.gate).norm();
    if (err >= prev) monotone = false;
    prev = err;
    errors.push_back(err);
    drifts.push_back(drift);
    leaks.push_back(leak);
    rep.check("eta_norm_drift_T" + std::to_string(int(T)), drift, 1e-6);
    last_traj = std::move(trajs.front());
  }
  rep.results["T_values"] = cfg.contains("T_values") ? cfg["T_values"] : json(T_values);
  rep.results["gate_error"] = errors;
  rep.results["eta_norm_drift"] = drifts;
  rep.results["leakage"] = leaks;
  rep.results["gate_error_monotone"] = monotone;
  if (T_values.size() > 1)
    rep.check("gate_error_monotone", monotone ? 1.0 : 0.0, 0.5, ">");
  if (dumps_allowed) write_trajectory_csv(last_traj, out_dir / "trajectory.csv");
}

// ---------------------------------------------------------------------------
// built-in verification suites (holoq verify)

void verify_biortho(Report& rep) {
  double worst_pair = 0.0, worst_rec = 0.0, worst_ph = 0.0, worst_inv = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto [H, eta_gen] = biortho::random_pseudo_hermitian(4 + seed % 3, seed);
    auto sys = biortho::biorthogonal_eig(H);
    worst_pair = std::max(worst_pair,
                          (sys.left_frame.adjoint() * sys.right_frame -
                           ComplexMatrix::Identity(sys.dim, sys.dim))
                              .cwiseAbs()
                              .maxCoeff());
    worst_rec = std::max(worst_rec, sys.reconstruction_residual);
    auto eta = biortho::metric_from_left(sys);
    worst_ph = std::max(worst_ph, biortho::pseudo_hermiticity_residual(H, eta));
    min_eig = std::min(min_eig, eta.min_eigenvalue);
    ComplexMatrix M = H * H - 2.0 * H;
    worst_inv = std::max(
        worst_inv,
        (biortho::pseudo_adjoint(eta, biortho::pseudo_adjoint(eta, M)) - M).norm());
  }
  auto [Ha, ea] = biortho::random_pseudo_hermitian(5, 42);
  auto [Hb, eb] = biortho::random_pseudo_hermitian(5, 42);
  rep.check("biortho.frame_pairing", worst_pair, 1e-10);
  rep.check("biortho.reconstruction", worst_rec, 1e-10);
  rep.check("biortho.metric_pseudo_hermiticity", worst_ph, 1e-8);
  rep.check("biortho.metric_positive", min_eig, 0.0, ">");
  rep.check("biortho.pseudo_adjoint_involution", worst_inv, 1e-12);
  rep.check("biortho.determinism", (Ha - Hb).norm() + (ea.matrix - eb.matrix).norm(),
            1e-300);
}

void verify_tripod(Report& rep) {
  double worst_build = 0.0, worst_imag = 0.0, worst_eta = 0.0, worst_herm = 0.0;
  ComplexMatrix eta_ref;
  for (double ratio : {0.1, 0.5, 0.9}) {
    ComplexMatrix eta_first;
    for (double th : {0.4, 1.9}) {
      auto p = tripod::params_for_u1({th, 1.1, 1.0}, ratio, 1.0);
      worst_build = std::max(worst_build, (tripod::build_hamiltonian(p) -
                                           tripod::build_hamiltonian_gainloss(p))
                                              .norm());
      auto sys = biortho::biorthogonal_eig(tripod::build_hamiltonian(p));
      worst_imag = std::max(worst_imag, sys.eigenvalues.imag().cwiseAbs().maxCoeff());
      if (eta_first.size() == 0)
        eta_first = tripod::metric(p).matrix;
      else
        worst_eta = std::max(worst_eta, (tripod::metric(p).matrix - eta_first).norm());
      auto hc = tripod::hermitian_counterpart(p);
      worst_herm = std::max({worst_herm, (hc.h - hc.h.adjoint()).norm(),
                             (hc.h_tilde - hc.h_tilde.adjoint()).norm()});
    }
  }
  double worst_comm = 0.0;
  for (double b1 : {0.3, 2.2, 5.1})
    for (double b2 : {0.7, 1.9, 4.4})
      worst_comm = std::max(worst_comm, tripod::commutator_check(b1, b2));
  auto fam = tripod::u2_family(0.6, 1.0, 1.0);
  gauge::ParamPoint pk(2);
  pk << 0.9, 2.4;
  double worst_K = std::max(gauge::kinetic_connection(fam, pk, 0, 1e-5).norm(),
                            gauge::kinetic_connection(fam, pk, 1, 1e-5).norm());
  rep.check("tripod.builders_agree", worst_build, 1e-12);
  rep.check("tripod.spectrum_real", worst_imag, 1e-10);
  rep.check("tripod.metric_chart_independent", worst_eta, 1e-12);
  rep.check("tripod.kinetic_connection_zero", worst_K, 1e-8);
  rep.check("tripod.commutator_identity", worst_comm, 1e-12);
  rep.check("tripod.hermitian_counterparts", worst_herm, 1e-10);
}

void verify_gaugeholo(Report& rep) {
  auto u1 = tripod::u1_family(0.6, 1.0, 1.0);
  auto u2 = tripod::u2_family(0.6, 1.0, 1.0);
  double u1_dev = 0.0, u1_other = 0.0, u2_dev = 0.0, u2_theta = 0.0;
  ComplexMatrix sy(2, 2);
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  for (auto [th, ph] : {std::pair{0.6, 0.9}, {1.4, 3.8}, {2.3, 5.2}}) {
    gauge::ParamPoint p(2);
    p << th, ph;
    auto s1 = gauge::gauge_field(u1, p, gauge::LevelSelector{0.0});
    u1_dev = std::max(u1_dev, std::abs(s1.components[1](1, 1) -
                                       Complex(-std::pow(std::sin(th / 2), 2))));
    u1_other = std::max({u1_other, s1.components[0].norm(),
                         std::abs(s1.components[1](0, 0)),
                         std::abs(s1.components[1](0, 1)),
                         std::abs(s1.components[1](1, 0))});
    auto s2 = gauge::gauge_field(u2, p, gauge::LevelSelector{0.0});
    u2_dev = std::max(u2_dev, (s2.components[1] - std::cos(th) * sy).norm());
    u2_theta = std::max(u2_theta, s2.components[0].norm());
  }
  auto loop = tripod::rectangle_loop(M_PI / 3, 2 * M_PI);
  auto rep1 = tripod::gate_u1(loop, 0.6, 1.0, 1.0, 800);
  auto rep2 = tripod::gate_u2(loop, 0.6, 1.0, 1.0, 800);
  gauge::ParamLoop rev = loop;
  std::reverse(rev.points.begin(), rev.points.end());
  auto numeric = u2;
  numeric.frame_provider = nullptr;
  auto fwd = gauge::holonomy_of_loop(numeric, loop, gauge::LevelSelector{0.0}, 400);
  auto bwd = gauge::holonomy_of_loop(numeric, rev, gauge::LevelSelector{0.0}, 400);
  gauge::ParamPoint pa(2);
  pa << 1.1, 2.0;
  rep.check("gauge.u1_field_component", u1_dev, 1e-6);
  rep.check("gauge.u1_field_vanishing", u1_other, 1e-8);
  rep.check("gauge.u2_field_phi", u2_dev, 1e-6);
  rep.check("gauge.u2_field_theta", u2_theta, 1e-8);
  rep.check("gauge.holonomy_u1_discrepancy", rep1.discrepancy, 1e-6);
  rep.check("gauge.holonomy_u2_discrepancy", rep2.discrepancy, 1e-6);
  rep.check("gauge.pseudo_unitarity",
            std::max(rep1.pseudo_unitarity_residual, rep2.pseudo_unitarity_residual),
            1e-8);
  rep.check("gauge.reversal_inverse",
            (fwd.matrix * bwd.matrix - ComplexMatrix::Identity(2, 2)).norm(), 1e-8);
  rep.check("gauge.antihermiticity",
            gauge::antihermiticity_residual(u2, pa, gauge::LevelSelector{0.0}), 1e-8);
}

void verify_dynamics(Report& rep) {
  auto fam = tripod::u2_family(0.6, 1.0, 1.0);
  auto loop = tripod::rectangle_loop(M_PI / 3, 2 * M_PI);
  auto sys = dynamics::system_from_loop(fam, loop, 30.0);
  auto f = fam.frame_provider(loop.points.front());
  auto traj = dynamics::evolve(sys, ComplexVector(f.right.col(1)), 20000,
                               dynamics::GeneratorKind::Full, 1e-6, 40);
  rep.check("dynamics.eta_norm_drift", dynamics::norm_conservation_drift(traj), 1e-6);

  dynamics::TimeDependentSystem synth;
  synth.dim = 2;
  synth.duration = 1.0;
  synth.hamiltonian = [](double t) {
    ComplexMatrix H = ComplexMatrix::Zero(2, 2);
    H(0, 1) = std::exp(t);
    H(1, 0) = std::exp(-t);
    return H;
  };
  synth.metric = [](double t) {
    ComplexMatrix eta = ComplexMatrix::Zero(2, 2);
    eta(0, 0) = std::exp(-2.0 * t);
    eta(1, 1) = 1.0;
    return biortho::MetricOperator::from_matrix(eta);
  };
  synth.metric_time_dependent = true;
  double worst_ode = 0.0;
  for (double t : {0.2, 0.5, 0.8})
    worst_ode = std::max(worst_ode, dynamics::metric_ode_residual(synth, t, 1e-5));
  rep.check("dynamics.metric_evolution_identity", worst_ode, 1e-6);

  ComplexVector psi0(2);
  psi0 << 1.0, 0.5;
  auto good = dynamics::evolve(synth, psi0, 4000);
  auto bad =
      dynamics::evolve(synth, psi0, 4000, dynamics::GeneratorKind::BareHamiltonian);
  rep.check("dynamics.full_generator_drift", dynamics::norm_conservation_drift(good),
            1e-6);
  rep.check("dynamics.bare_hamiltonian_drifts",
            dynamics::norm_conservation_drift(bad), 1e-2, ">");
}

void verify_bundles(Report& rep) {
  double worst_frame = 0.0, worst_pi = 0.0, worst_group = 0.0, worst_compat = 0.0;
  auto probe = [&](const biortho::BiorthoSystem& sys, Complex level,
                   const biortho::MetricOperator* eta_a, std::uint64_t seed) {
    auto f = bundles::stiefel_frame(sys, level, eta_a);
    Eigen::Index nl = f.V.cols();
    ComplexMatrix vd = bundles::frame_pseudo_adjoint(f);
    worst_frame =
        std::max(worst_frame, (vd * f.V - ComplexMatrix::Identity(nl, nl)).norm());
    ComplexMatrix Pi = bundles::grassmann_projector(f).Pi;
    ComplexMatrix pid = f.eta_big.inverse * Pi.adjoint() * f.eta_big.matrix;
    worst_pi = std::max({worst_pi, (Pi * Pi - Pi).norm(), (pid - Pi).norm(),
                         std::abs(Pi.trace() - Complex(double(nl)))});
    worst_compat = std::max(
        worst_compat,
        (Pi.adjoint() * f.eta_big.matrix - f.eta_big.matrix * Pi).norm());
    ComplexMatrix U = bundles::random_pseudo_unitary(f.eta_small, seed, 0.8);
    worst_group = std::max(worst_group, bundles::group_action_invariance(f, U));
  };
  tripod::U1Chart c{1.0, 0.7, 1.0};
  auto sys_t = biortho::biorthogonal_eig(
      tripod::build_hamiltonian(tripod::params_for_u1(c, 0.6, 1.0)));
  probe(sys_t, Complex(0.0), nullptr, 5);
  ComplexMatrix eta_a_m = ComplexMatrix::Zero(2, 2);
  eta_a_m(0, 0) = 2.0;
  eta_a_m(1, 1) = 0.5;
  auto eta_a = biortho::MetricOperator::from_matrix(eta_a_m);
  probe(sys_t, Complex(0.0), &eta_a, 6);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto [H, eta] = biortho::random_pseudo_hermitian(5, seed * 13);
    auto sys = biortho::biorthogonal_eig(H);
    probe(sys, sys.eigenvalues(2), nullptr, seed);
  }
  rep.check("bundles.frame_property", worst_frame, 1e-10);
  rep.check("bundles.projector_conditions", worst_pi, 1e-10);
  rep.check("bundles.group_invariance", worst_group, 1e-10);
  rep.check("bundles.metric_compatibility", worst_compat, 1e-10);
}

void run_verify(const std::string& filter, Report& rep) {
  auto wants = [&](const char* m) { return filter.empty() || filter == m; };
  if (wants("biortho")) verify_biortho(rep);
  if (wants("tripod")) verify_tripod(rep);
  if (wants("gaugeholo")) verify_gaugeholo(rep);
  if (wants("dynamics")) verify_dynamics(rep);
  if (wants("bundles")) verify_bundles(rep);
  if (rep.checks.empty())
    throw ConfigInvalid("verify filter '" + filter + "' matches no module");
}

// ---------------------------------------------------------------------------
// sweep

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

Report run_experiment(const json& cfg, const fs::path& out_dir, bool dumps_allowed);

void run_sweep(const json& cfg, Report& rep, const fs::path& out_dir) {
  if (!cfg.contains("axes") || !cfg.contains("experiment"))
    throw ConfigInvalid("sweep needs axes and experiment");
  std::vector<SweepAxis> axes;
  for (const auto& a : cfg["axes"]) {
    SweepAxis ax;
    ax.name = a.at("name").get<std::string>();
    for (const auto& v : a.at("values")) ax.values.push_back(v.get<double>());
    axes.push_back(std::move(ax));
  }
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.values.size();

  struct Row {
    std::vector<double> coords;
    json results;
    std::string status = "ok";
  };
  std::vector<Row> rows(total);

  auto assign = [](json& obj, const std::string& path, double v) {
    json* node = &obj;
    std::size_t pos = 0;
    while (true) {
      std::size_t dot = path.find('.', pos);
      if (dot == std::string::npos) {
        (*node)[path.substr(pos)] = v;
        return;
      }
      node = &(*node)[path.substr(pos, dot - pos)];
      pos = dot + 1;
    }
  };
  auto point_config = [&](std::size_t idx) {
    json sub = cfg["experiment"];
    std::vector<double> coords;
    std::size_t rem = idx;
    for (const auto& ax : axes) {
      double v = ax.values[rem % ax.values.size()];
      rem /= ax.values.size();
      assign(sub, ax.name, v);
      coords.push_back(v);
    }
    return std::pair{sub, coords};
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::size_t next = 0;
  while (next < total) {
    std::size_t batch = std::min(workers, total - next);
    std::vector<std::future<void>> futs;
    for (std::size_t k = 0; k < batch; ++k) {
      std::size_t idx = next + k;
      futs.push_back(std::async(std::launch::async, [&, idx] {
        auto [sub, coords] = point_config(idx);
        rows[idx].coords = coords;
        try {
          Report sub_rep = run_experiment(sub, out_dir, false);
          rows[idx].results = sub_rep.results;
          if (!sub_rep.all_pass()) rows[idx].status = "check_failed";
        } catch (const std::exception& e) {
          rows[idx].status = e.what();
        }
      }));
    }
    for (auto& f : futs) f.get();
    next += batch;
  }

  // aggregate the union of scalar result keys, ordered by grid index
  std::vector<std::string> keys;
  for (const auto& r : rows)
    for (auto it = r.results.begin(); it != r.results.end(); ++it)
      if (it.value().is_number() &&
          std::find(keys.begin(), keys.end(), it.key()) == keys.end())
        keys.push_back(it.key());

  std::ofstream csv(out_dir / "sweep.csv");
  for (const auto& ax : axes) csv << ax.name << ",";
  for (const auto& k : keys) csv << k << ",";
  csv << "status\n";
  std::size_t failures = 0;
  for (const auto& r : rows) {
    for (double c : r.coords) csv << fmt17(c) << ",";
    for (const auto& k : keys) {
      if (r.results.contains(k)) csv << fmt17(r.results[k].get<double>());
      csv << ",";
    }
    csv << r.status << "\n";
    if (r.status != "ok") ++failures;
  }
  rep.results["rows"] = total;
  rep.results["failures"] = failures;
  rep.check("sweep_failures", double(failures), 0.5);
}

Report run_experiment(const json& cfg, const fs::path& out_dir, bool dumps_allowed) {
  Report rep;
  rep.inputs = cfg;
  std::string kind = cfg.value("kind", std::string{});
  if (kind == "decompose")
    run_decompose(cfg, rep);
  else if (kind == "holonomy")
    run_holonomy(cfg, rep, out_dir, dumps_allowed);
  else if (kind == "tripod-gates")
    run_tripod_gates(cfg, rep);
  else if (kind == "evolve")
    run_evolve(cfg, rep, out_dir, dumps_allowed);
  else if (kind == "verify")
    run_verify(cfg.value("filter", std::string{}), rep);
  else if (kind == "sweep")
    run_sweep(cfg, rep, out_dir);
  else
    throw ConfigInvalid("unknown experiment kind '" + kind + "'");
  return rep;
}

int finish(Report& rep, const fs::path& out_dir, bool quiet,
           std::chrono::steady_clock::time_point t0) {
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream out(out_dir / "report.json");
  out << rep.to_json().dump(2) << "\n";
  if (!quiet) {
    for (const auto& c : rep.checks)
      std::cout << (c.pass() ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.measured
                << " " << c.cmp << " " << c.threshold << "\n";
    std::cout << "report: " << (out_dir / "report.json").string() << "\n";
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-Hermitian holonomy experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_override, filter;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_override, "output directory override");
  run->add_flag("--quiet", quiet, "suppress progress output");

  auto* verify = app.add_subcommand("verify", "run the built-in invariant suites");
  verify->add_option("--filter", filter, "restrict to one module");
  verify->add_option("--out", out_override, "output directory override");
  verify->add_flag("--quiet", quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);
  auto t0 = std::chrono::steady_clock::now();

  try {
    json cfg;
    fs::path out_dir = ".";
    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigInvalid("cannot open config file " + config_path);
      try {
        cfg = json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("config parse error: ") + e.what());
      }
      if (cfg.contains("output_dir")) out_dir = cfg["output_dir"].get<std::string>();
      if (!out_override.empty()) out_dir = out_override;
      fs::create_directories(out_dir);
      Report rep = run_experiment(cfg, out_dir, true);
      return finish(rep, out_dir, quiet, t0);
    }
    cfg = json{{"kind", "verify"}, {"filter", filter}};
    if (!out_override.empty()) out_dir = out_override;
    fs::create_directories(out_dir);
    Report rep = run_experiment(cfg, out_dir, true);
    return finish(rep, out_dir, quiet, t0);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numeric breakdown: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
