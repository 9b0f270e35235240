// vsa: dataset generation, spectral runs, diagnostics and exports from the command line.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "manifest.hpp"
#include "vsa/baselines.hpp"
#include "vsa/dataset.hpp"
#include "vsa/delay_geometry.hpp"
#include "vsa/error.hpp"
#include "vsa/kernels.hpp"
#include "vsa/ks_model.hpp"
#include "vsa/markov_spectral.hpp"
#include "vsa/patterns.hpp"
#include "vsa/pipeline.hpp"

#ifndef VSA_VERSION
#define VSA_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace {

struct Common {
  unsigned threads = 0;
};

struct GenKs {
  double L = 22.0, tau = 0.25, dt = 0.05, spinup = 2500.0;
  long long S = 65, N = 1000;
  std::uint64_t seed = 0;
  std::string output = "ks.vsaf";
};

struct GenWave {
  double alpha = 0.3, tau = 0.25, L = 22.0;
  long long m = 1, S = 65, N = 1000;
  std::string output = "wave.vsaf";
};

struct Analysis {
  std::string input, out = "vsa_out", basis;
  long long Q = 15, n_eig = 51, knn = 0, max_iter = 0;
  double tol = 1e-10, eps_min = -30.0, eps_max = 30.0;
  std::uint64_t seed = 0;
  bool no_scaling = false;
  double epsilon = 0.0, epsilon_bar = 0.0, m_hat = 0.0;
  std::vector<long long> modes{1, 2, 3};
  bool field_csv = false;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw vsa::ValidationError(msg);
}

std::size_t positive(long long v, const char* name) {
  require(v >= 1, std::string(name) + " must be ≥ 1");
  return static_cast<std::size_t>(v);
}

std::vector<double> eps_grid(const Analysis& a) {
  require(a.eps_min < a.eps_max, "eps grid bounds must satisfy min < max");
  require(std::floor(2 * a.eps_min) == 2 * a.eps_min && std::floor(2 * a.eps_max) == 2 * a.eps_max,
          "eps grid bounds must be multiples of 0.5");
  std::vector<double> g;
  for (long k = long(2 * a.eps_min); k <= long(2 * a.eps_max); ++k) g.push_back(std::exp2(0.5 * double(k)));
  return g;
}

vsa::FieldTrajectory load(const Analysis& a) {
  require(!a.input.empty(), "--input is required");
  return vsa::read_dataset(a.input);
}

fs::path prepare_out(const Analysis& a) {
  fs::create_directories(a.out);
  return a.out;
}

vsa::SpectralConfig spectral_config(const Analysis& a, const Common& c) {
  vsa::SpectralConfig cfg;
  cfg.k_nn = static_cast<std::size_t>(std::max(0LL, a.knn));
  require(a.knn == 0 || a.knn >= 2, "knn must be 0 (default) or ≥ 2");
  cfg.n_eig = positive(a.n_eig, "n-eig");
  cfg.tol = a.tol;
  require(a.tol > 0.0, "tol must be positive");
  require(a.max_iter >= 0, "max-iter must be ≥ 0");
  cfg.max_iter = static_cast<std::size_t>(a.max_iter);
  cfg.seed = a.seed;
  cfg.eps_grid = eps_grid(a);
  cfg.use_scaling = !a.no_scaling;
  if (a.epsilon_bar > 0.0) cfg.epsilon_bar = a.epsilon_bar;
  if (a.m_hat > 0.0) cfg.m_hat = a.m_hat;
  if (a.epsilon > 0.0) cfg.epsilon = a.epsilon;
  cfg.threads = c.threads;
  return cfg;
}

void describe(vsa_cli::Manifest& m, const std::string& method, const Analysis& a,
              const Common& c, const vsa::FieldTrajectory& t) {
  m.set("method", method);
  m.set("code_version", std::string(VSA_VERSION));
  m.set("Q", static_cast<long long>(a.Q));
  m.set("N", t.samples());
  m.set("S", t.points());
  m.set("L", t.length());
  m.set("tau", t.tau());
  m.set("n_eig", static_cast<long long>(a.n_eig));
  m.set("knn_requested", static_cast<long long>(a.knn));
  m.set("tol", a.tol);
  m.set("max_iter", static_cast<long long>(a.max_iter));
  m.set("seed", static_cast<long long>(a.seed));
  m.set("eps_grid_min_log2", a.eps_min);
  m.set("eps_grid_max_log2", a.eps_max);
  m.set("scaling", std::string(a.no_scaling ? "off" : "on"));
  m.set("threads", static_cast<long long>(c.threads));
  m.digest("input", a.input);
}

void record_run(vsa_cli::Manifest& m, const vsa::SpectralRun& run) {
  m.set("k_nn", run.k_nn);
  m.set("nnz", run.nnz);
  m.set("epsilon", run.epsilon);
  m.set("epsilon_bar", run.epsilon_bar);
  m.set("m_hat", run.m_hat);
  m.set("gamma", run.scaling.gamma);
  m.set("m_hat_mismatch", run.m_hat_mismatch);
  m.set("row_sum_error", run.row_sum_error);
  m.set("biorthogonality", run.biorthogonality);
  m.set("phi0_sd", run.phi0_sd);
  for (const auto& [stage, sec] : run.seconds) m.set("seconds." + stage, sec);
}

void write_scan(const vsa::BandwidthScan& s, const fs::path& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "epsilon,kappa,dlogk\n";
  for (std::size_t i = 0; i < s.epsilons.size(); ++i) {
    out << s.epsilons[i] << ',' << s.kappa[i] << ',' << s.dlogk[i] << '\n';
  }
}

std::vector<std::size_t> mode_list(const Analysis& a, std::size_t available) {
  std::vector<std::size_t> out;
  for (long long j : a.modes) {
    require(j >= 0 && std::size_t(j) < available, "mode index out of range: " + std::to_string(j));
    out.push_back(std::size_t(j));
  }
  return out;
}

int generate_ks(const GenKs& g) {
  vsa::KsConfig c;
  c.length = g.L;
  require(g.S >= 3, "S must be ≥ 3");
  require(g.N >= 1, "N must be ≥ 1");
  c.points = static_cast<std::size_t>(g.S);
  c.samples = static_cast<std::size_t>(g.N);
  c.tau = g.tau;
  c.dt = g.dt;
  c.spinup = g.spinup;
  c.seed = g.seed;
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto traj = vsa::integrate_ks(c, vsa::ks_initial_state(c.points));
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  vsa::write_dataset(traj, g.output);
  vsa_cli::Manifest m;
  m.set("method", std::string("generate-ks"));
  m.set("code_version", std::string(VSA_VERSION));
  m.set("L", g.L);
  m.set("S", c.points);
  m.set("N", c.samples);
  m.set("tau", g.tau);
  m.set("dt", g.dt);
  m.set("spinup", g.spinup);
  m.set("seed", static_cast<long long>(g.seed));
  m.set("seconds.integrate", sec);
  m.digest("output", g.output);
  m.write(g.output + ".manifest");
  return 0;
}

int generate_wave(const GenWave& g) {
  require(g.N >= 1 && g.S >= 1, "N and S must be ≥ 1");
  const auto traj = vsa::generate_traveling_wave(g.alpha, int(g.m), std::size_t(g.N),
                                                 std::size_t(g.S), g.tau, g.L);
  vsa::write_dataset(traj, g.output);
  vsa_cli::Manifest m;
  m.set("method", std::string("generate-wave"));
  m.set("code_version", std::string(VSA_VERSION));
  m.set("alpha", g.alpha);
  m.set("m", static_cast<long long>(g.m));
  m.set("L", g.L);
  m.set("S", static_cast<long long>(g.S));
  m.set("N", static_cast<long long>(g.N));
  m.set("tau", g.tau);
  m.digest("output", g.output);
  m.write(g.output + ".manifest");
  return 0;
}

int run_vsa(const Analysis& a, const Common& c) {
  const std::size_t Q = positive(a.Q, "Q");
  const auto cfg = spectral_config(a, c);
  const auto traj = load(a);
  const auto out = prepare_out(a);
  const auto run = vsa::run_vsa(traj, Q, cfg);
  const auto win = vsa::trim_for_delays(traj, Q);
  const auto patterns = vsa::pattern_set(run.basis, win);
  const auto diag = vsa::diagnose(run.basis, win);
  vsa::write_eigenbasis(run.basis, out / "eigenbasis.bin");
  vsa::export_eigenvalues_csv(run.basis.lambdas, out / "eigenvalues.csv");
  vsa::export_diagnostics_csv(run.basis.lambdas, patterns, diag, out / "diagnostics.csv");
  vsa_cli::Manifest m;
  describe(m, "vsa", a, c, traj);
  record_run(m, run);
  if (run.unscaled_scan) write_scan(*run.unscaled_scan, out / "scan_unscaled.csv");
  if (run.scaled_scan) write_scan(*run.scaled_scan, out / "scan_scaled.csv");
  for (const auto& f : {"eigenbasis.bin", "eigenvalues.csv", "diagnostics.csv",
                        "scan_unscaled.csv", "scan_scaled.csv"}) {
    if (fs::exists(out / f)) m.digest("output", out / f);
  }
  m.write(out / "manifest.txt");
  if (run.epsilon == cfg.eps_grid.front() || run.epsilon == cfg.eps_grid.back()) {
    std::fprintf(stderr, "warning: tuned epsilon %.6g sits at the end of the grid\n", run.epsilon);
  }
  std::printf("eigenvalues: %zu, epsilon %.6g, m_hat %.4g, outputs in %s\n",
              static_cast<std::size_t>(run.basis.lambdas.size()), run.epsilon, run.m_hat,
              out.string().c_str());
  return 0;
}

int run_pod(const Analysis& a, const Common& c) {
  const std::size_t Q = positive(a.Q, "Q");
  const std::size_t n_modes = positive(a.n_eig, "n-eig");
  const auto traj = load(a);
  const auto out = prepare_out(a);
  const auto t0 = std::chrono::steady_clock::now();
  const auto pod = vsa::pod_decompose(traj, n_modes, Q);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream f(out / "pod_variances.csv");
    f.precision(17);
    f << "j,eigenvalue,variance\n";
    for (Eigen::Index j = 0; j < pod.eigenvalues.size(); ++j) {
      f << j << ',' << pod.eigenvalues(j) << ',' << pod.variances(j) << '\n';
    }
  }
  {
    std::ofstream f(out / "pod_spatial.csv");
    f.precision(17);
    f << "j,row,psi\n";
    for (Eigen::Index j = 0; j < pod.spatial.cols(); ++j) {
      for (Eigen::Index r = 0; r < pod.spatial.rows(); ++r) f << j << ',' << r << ',' << pod.spatial(r, j) << '\n';
    }
  }
  vsa_cli::Manifest m;
  describe(m, "pod", a, c, traj);
  m.set("seconds.pod", sec);
  m.digest("output", out / "pod_variances.csv");
  m.digest("output", out / "pod_spatial.csv");
  m.write(out / "manifest.txt");
  std::printf("leading variances:");
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(3, pod.variances.size()); ++j) {
    std::printf(" %.4f", pod.variances(j));
  }
  std::printf("\n");
  return 0;
}

int run_nlsa(const Analysis& a, const Common& c) {
  const std::size_t Q = positive(a.Q, "Q");
  const auto cfg = spectral_config(a, c);
  const auto traj = load(a);
  const auto out = prepare_out(a);
  const auto res = vsa::nlsa_decompose(traj, Q, cfg.n_eig, cfg);
  const auto win = vsa::trim_for_delays(traj, Q);
  vsa::export_eigenvalues_csv(res.lambdas, out / "nlsa_eigenvalues.csv");
  vsa_cli::Manifest m;
  describe(m, "nlsa", a, c, traj);
  record_run(m, res.run);
  m.digest("output", out / "nlsa_eigenvalues.csv");
  for (std::size_t j : mode_list(a, std::size_t(res.phi.cols()))) {
    const auto name = "nlsa_phi_" + std::to_string(j) + ".csv";
    vsa::export_patterns_csv(res.phi, j, win, out / name, "nlsa");
    m.digest("output", out / name);
  }
  m.write(out / "manifest.txt");
  return 0;
}

vsa::MarkovEigenbasis load_basis(const Analysis& a, const vsa::AnalysisWindow& win) {
  require(!a.basis.empty(), "--basis is required");
  const auto w = vsa::product_weights(win, vsa::uniform_weights(win.points()));
  return vsa::read_eigenbasis(a.basis, w);
}

int run_diagnose(const Analysis& a, const Common& c) {
  const std::size_t Q = positive(a.Q, "Q");
  const auto traj = load(a);
  const auto win = vsa::trim_for_delays(traj, Q);
  const auto basis = load_basis(a, win);
  const auto out = prepare_out(a);
  const auto patterns = vsa::pattern_set(basis, win);
  const auto diag = vsa::diagnose(basis, win);
  vsa::export_diagnostics_csv(basis.lambdas, patterns, diag, out / "diagnostics.csv");
  vsa_cli::Manifest m;
  describe(m, "diagnose", a, c, traj);
  m.digest("input", a.basis);
  m.digest("output", out / "diagnostics.csv");
  m.write(out / "manifest.txt");
  return 0;
}

int run_export(const Analysis& a, const Common& c) {
  const std::size_t Q = positive(a.Q, "Q");
  const auto traj = load(a);
  const auto win = vsa::trim_for_delays(traj, Q);
  const auto out = prepare_out(a);
  vsa_cli::Manifest m;
  describe(m, "export", a, c, traj);
  if (a.field_csv) {
    vsa::export_csv(traj, out / "field.csv");
    m.digest("output", out / "field.csv");
  }
  if (!a.basis.empty()) {
    const auto basis = load_basis(a, win);
    m.digest("input", a.basis);
    for (std::size_t j : mode_list(a, std::size_t(basis.phi.cols()))) {
      const auto name = "vsa_phi_" + std::to_string(j) + ".csv";
      vsa::export_patterns_csv(basis.phi, j, win, out / name, "vsa");
      m.digest("output", out / name);
    }
  }
  require(a.field_csv || !a.basis.empty(), "nothing to export: pass --basis and/or --field");
  m.write(out / "manifest.txt");
  return 0;
}

int run_scan(const Analysis& a, const Common& c) {
  const std::size_t Q = positive(a.Q, "Q");
  const auto grid = eps_grid(a);
  require(a.knn == 0 || a.knn >= 2, "knn must be 0 (default) or ≥ 2");
  const auto traj = load(a);
  const auto win = vsa::trim_for_delays(traj, Q);
  const auto out = prepare_out(a);
  const std::size_t k = a.knn ? std::size_t(a.knn) : vsa::default_knn(win.size());
  const auto graph = vsa::knn_graph(win, k, c.threads);
  const auto w = vsa::product_weights(win, vsa::uniform_weights(win.points()));
  const auto scan = vsa::bandwidth_scan(graph, w, grid, {}, c.threads);
  write_scan(scan, out / "scan.csv");
  vsa_cli::Manifest m;
  describe(m, "scan-bandwidth", a, c, traj);
  m.set("k_nn", k);
  m.set("m_hat", scan.m_hat);
  m.set("eps_star", scan.eps_star);
  m.digest("output", out / "scan.csv");
  m.write(out / "manifest.txt");
  std::printf("m_hat %.4f, eps* %.6g\n", scan.m_hat, scan.eps_star);
  return 0;
}

void analysis_flags(CLI::App* sub, Analysis& a, bool spectral) {
  sub->add_option("--input", a.input, "VSAF dataset");
  sub->add_option("--out", a.out, "output directory")->capture_default_str();
  sub->add_option("--Q", a.Q, "number of delays")->capture_default_str();
  if (!spectral) return;
  sub->add_option("--n-eig", a.n_eig, "eigenpairs (modes for pod)")->capture_default_str();
  sub->add_option("--knn", a.knn, "neighbors per point, 0 for the default");
  sub->add_option("--tol", a.tol, "eigensolver residual tolerance")->capture_default_str();
  sub->add_option("--max-iter", a.max_iter, "eigensolver iteration budget, 0 for automatic");
  sub->add_option("--seed", a.seed, "eigensolver start vector seed");
  sub->add_option("--eps-min", a.eps_min, "log2 of the smallest grid bandwidth")->capture_default_str();
  sub->add_option("--eps-max", a.eps_max, "log2 of the largest grid bandwidth")->capture_default_str();
  sub->add_flag("--no-scaling", a.no_scaling, "use s = 1");
  sub->add_option("--epsilon", a.epsilon, "fixed kernel bandwidth, skips the scaled scan");
  sub->add_option("--epsilon-bar", a.epsilon_bar, "fixed density bandwidth");
  sub->add_option("--m-hat", a.m_hat, "fixed dimension estimate");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vector-valued spectral analysis of spatiotemporal data"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads, 0 for all cores")
      ->envname("VSA_THREADS");

  GenKs gk;
  auto* ks = app.add_subcommand("generate-ks", "integrate Kuramoto-Sivashinsky");
  ks->add_option("--L", gk.L)->capture_default_str();
  ks->add_option("--S", gk.S)->capture_default_str();
  ks->add_option("--N", gk.N)->capture_default_str();
  ks->add_option("--tau", gk.tau)->capture_default_str();
  ks->add_option("--dt", gk.dt)->capture_default_str();
  ks->add_option("--spinup", gk.spinup)->capture_default_str();
  ks->add_option("--seed", gk.seed)->capture_default_str();
  ks->add_option("--output", gk.output)->capture_default_str();

  GenWave gw;
  auto* wave = app.add_subcommand("generate-wave", "traveling wave cos(2 pi m y / L - alpha t)");
  wave->add_option("--alpha", gw.alpha)->capture_default_str();
  wave->add_option("--m", gw.m)->capture_default_str();
  wave->add_option("--L", gw.L)->capture_default_str();
  wave->add_option("--S", gw.S)->capture_default_str();
  wave->add_option("--N", gw.N)->capture_default_str();
  wave->add_option("--tau", gw.tau)->capture_default_str();
  wave->add_option("--output", gw.output)->capture_default_str();

  Analysis a;
  auto* vsa_cmd = app.add_subcommand("vsa", "VSA eigenbasis and diagnostics");
  analysis_flags(vsa_cmd, a, true);
  auto* pod = app.add_subcommand("pod", "proper orthogonal decomposition");
  analysis_flags(pod, a, false);
  pod->add_option("--n-modes", a.n_eig, "modes to keep")->capture_default_str();
  auto* nlsa = app.add_subcommand("nlsa", "state-space diffusion eigenfunctions");
  analysis_flags(nlsa, a, true);
  nlsa->add_option("--modes", a.modes, "eigenfunctions to export");
  auto* diag = app.add_subcommand("diagnose", "diagnostics of a stored eigenbasis");
  analysis_flags(diag, a, false);
  diag->add_option("--basis", a.basis, "eigenbasis file from `vsa`");
  auto* exp = app.add_subcommand("export", "CSV export of eigenfunctions or the field");
  analysis_flags(exp, a, false);
  exp->add_option("--basis", a.basis, "eigenbasis file from `vsa`");
  exp->add_option("--modes", a.modes, "eigenfunctions to export");
  exp->add_flag("--field", a.field_csv, "also write the field as t,y,value");
  auto* scan = app.add_subcommand("scan-bandwidth", "kappa(eps) scan and dimension estimate");
  analysis_flags(scan, a, false);
  scan->add_option("--knn", a.knn, "neighbors per point, 0 for the default");
  scan->add_option("--eps-min", a.eps_min)->capture_default_str();
  scan->add_option("--eps-max", a.eps_max)->capture_default_str();
  for (auto* s : app.get_subcommands({})) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ks) return generate_ks(gk);
    if (*wave) return generate_wave(gw);
    if (*vsa_cmd) return run_vsa(a, common);
    if (*pod) return run_pod(a, common);
    if (*nlsa) return run_nlsa(a, common);
    if (*diag) return run_diagnose(a, common);
    if (*exp) return run_export(a, common);
    if (*scan) return run_scan(a, common);
  } catch (const vsa::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const vsa::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const vsa::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
