// certkit: Monte Carlo certification of simulated quantum states, processes,
// and continuous-variable states, plus local-Hamiltonian learning from
// short-time dynamics.  Subcommands write a JSON summary envelope and CSV
// sample ledgers; outputs are deterministic for a fixed config and seed.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "certkit/fidelity.hpp"
#include "certkit/ham_learn.hpp"
#include "certkit/process.hpp"
#include "certkit/wigner.hpp"

using json = nlohmann::ordered_json;
using namespace certkit;

namespace {

constexpr const char* kVersion = "certkit 1.0.0";

double trace_overlap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a * b).trace().real();
}

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string out_json;
  std::string out_csv;
  int threads = 0;  // 0 = auto; accepted for interface stability
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "Random seed (determinism contract)");
  cmd->add_option("--out", opts.out_json, "Path for the JSON summary");
  cmd->add_option("--csv", opts.out_csv, "Path for the CSV sample ledger");
  cmd->add_option("--threads", opts.threads,
                  "Worker count (overrides CERTKIT_THREADS)");
}

int resolve_threads(const CommonOpts& opts) {
  if (opts.threads > 0) return opts.threads;
  if (const char* env = std::getenv("CERTKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// The JSON envelope deliberately excludes wall-clock and thread count so
// identical (config, seed) runs produce byte-identical files.
void write_outputs(const CommonOpts& opts, const json& config,
                   const json& payload, const std::string& csv) {
  json envelope;
  envelope["version"] = kVersion;
  envelope["config"] = config;
  envelope["report"] = payload;
  if (!opts.out_json.empty()) {
    std::ofstream file(opts.out_json);
    if (!file) throw std::runtime_error("cannot write " + opts.out_json);
    file << envelope.dump(2) << "\n";
  } else {
    std::cout << envelope.dump(2) << "\n";
  }
  if (!opts.out_csv.empty() && !csv.empty()) {
    std::ofstream file(opts.out_csv);
    if (!file) throw std::runtime_error("cannot write " + opts.out_csv);
    file << csv;
  }
}

StateModel parse_state(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? "" : text.substr(colon + 1);
  auto int_arg = [&]() {
    if (rest.empty())
      throw std::invalid_argument("state spec needs a size: " + text);
    return std::stoi(rest);
  };
  if (kind == "ghz") return StateModel(make_ghz(int_arg()));
  if (kind == "w") return StateModel(make_w(int_arg()));
  if (kind == "t") return StateModel(make_t(int_arg()));
  if (kind == "cluster") {
    const auto second = rest.find(':');
    const int n = std::stoi(rest.substr(0, second));
    const bool periodic =
        second != std::string::npos && rest.substr(second + 1) == "periodic";
    return StateModel(make_cluster_1d(n, periodic));
  }
  if (kind == "product") {
    std::vector<std::string> labels;
    std::stringstream stream(rest);
    std::string tok;
    while (std::getline(stream, tok, ',')) labels.push_back(tok);
    return StateModel(make_product(labels));
  }
  throw std::invalid_argument("unknown state spec: " + text);
}

ChannelModel parse_channel(const std::string& text, int n_hint) {
  // Named Clifford circuits; qubit count from the gate list or the hint.
  int n = n_hint;
  if (n <= 0) {
    n = 1;
    if (text.find("cnot") != std::string::npos) n = 2;
    for (const char c : text)
      (void)c;  // gate indices below may still raise n
    for (std::size_t i = 0; i + 1 < text.size(); ++i)
      if (std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
          !std::isdigit(static_cast<unsigned char>(text[i])))
        n = std::max(n, std::atoi(text.c_str() + i + 1) + 1);
  }
  return ChannelModel::from_clifford(CliffordCircuit::parse(n, text));
}

json budget_json(const ErrorBudget& b) {
  return {{"eps1", b.eps1},
          {"eps2", b.eps2},
          {"delta_target", b.delta_target},
          {"n1", b.n1}};
}

// ---------------------------------------------------------------------------

int cmd_certify_state(const CommonOpts& opts, const std::string& target,
                      const std::string& noise_text, double eps, double delta,
                      long n1_override, double trunc_eps) {
  const auto rho = parse_state(target);
  const auto noise = NoiseSpec::parse(noise_text);
  ErrorBudget budget = plan_budget(rho, eps, delta);
  if (n1_override > 0) budget.n1 = n1_override;
  const TruncationPolicy truncation{trunc_eps};

  DensityMatrixBackend backend(prepare_sigma(rho, noise));
  const auto report =
      estimate_fidelity(rho, backend, budget, truncation, opts.seed);

  std::vector<std::pair<double, long>> shot_plan;
  for (const auto& s : report.samples)
    shot_plan.emplace_back(s.sample.rho_i, s.shots.n_shots());

  const int n = num_qubits(rho);
  json payload;
  payload["kind"] = "state-fidelity";
  payload["estimate"] = report.estimate;
  payload["in_range"] = report.estimate >= -1e-9 && report.estimate <= 1 + 1e-9;
  payload["total_shots"] = report.total_shots;
  payload["budget"] = budget_json(budget);
  payload["chebyshev_bound"] = chebyshev_bound(budget.n1, budget.eps1);
  payload["hoeffding_bound"] = hoeffding_bound(shot_plan, budget.eps2);
  payload["truncation_bias_bound"] = truncation.bias_bound(n);
  payload["truncation_rejection_bound"] = truncation.rejection_bound(n);
  payload["exact_fidelity"] = trace_overlap(
      to_density(rho).matrix, backend.sigma().matrix);

  std::string csv = "k,index,pauli,rho_i,weight,n2,plus,minus,ratio\n";
  for (std::size_t k = 0; k < report.samples.size(); ++k) {
    const auto& s = report.samples[k];
    csv += std::to_string(k) + "," + std::to_string(s.sample.index) + "," +
           PauliString::from_index(n, s.sample.index).to_text() + "," +
           std::to_string(s.sample.rho_i) + "," +
           std::to_string(s.sample.weight) + "," +
           std::to_string(s.shots.n_shots()) + "," +
           std::to_string(s.shots.plus_count) + "," +
           std::to_string(s.shots.minus_count) + "," +
           std::to_string(s.ratio) + "\n";
  }

  json config = {{"subcommand", "certify-state"}, {"target", target},
                 {"noise", noise.to_text()},      {"eps", eps},
                 {"delta", delta},                {"truncation_eps", trunc_eps},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

int cmd_certify_process(const CommonOpts& opts, const std::string& target,
                        const std::string& actual,
                        const std::string& noise_text, double eps,
                        double delta, long n1_override,
                        const std::string& scheme, int n_hint) {
  const auto target_channel = parse_channel(target, n_hint);
  auto actual_channel =
      parse_channel(actual.empty() ? target : actual, target_channel.n);
  actual_channel = actual_channel.with_noise(NoiseSpec::parse(noise_text));

  const auto rho_model = StateModel(choi_stabilizer(target_channel.clifford));
  ErrorBudget budget = plan_budget(rho_model, eps, delta);
  if (n1_override > 0) budget.n1 = n1_override;
  const TruncationPolicy truncation{1.0};

  ProcessReport report;
  if (scheme == "direct") {
    report = certify_process_direct(target_channel, actual_channel, budget,
                                    truncation, opts.seed);
  } else if (scheme == "product") {
    report = certify_process_product_protocol(target_channel, actual_channel,
                                              budget, truncation, opts.seed);
  } else {
    throw std::invalid_argument("scheme must be direct or product");
  }

  json payload;
  payload["kind"] = "process-fidelity";
  payload["scheme"] = scheme;
  payload["choi_fidelity"] = report.choi_fidelity;
  payload["average_fidelity"] = report.avg_fidelity;
  payload["total_shots"] = report.report.total_shots;
  payload["budget"] = budget_json(budget);
  payload["exact_choi_fidelity"] = trace_overlap(
      choi_state(target_channel).state.matrix,
      choi_state(actual_channel).state.matrix);

  const int n2q = 2 * target_channel.n;
  std::string csv = "k,index,pauli,rho_i,n2,plus,minus,ratio\n";
  for (std::size_t k = 0; k < report.report.samples.size(); ++k) {
    const auto& s = report.report.samples[k];
    csv += std::to_string(k) + "," + std::to_string(s.sample.index) + "," +
           PauliString::from_index(n2q, s.sample.index).to_text() + "," +
           std::to_string(s.sample.rho_i) + "," +
           std::to_string(s.shots.n_shots()) + "," +
           std::to_string(s.shots.plus_count) + "," +
           std::to_string(s.shots.minus_count) + "," +
           std::to_string(s.ratio) + "\n";
  }

  json config = {{"subcommand", "certify-process"},
                 {"target", target},
                 {"actual", actual.empty() ? target : actual},
                 {"noise", noise_text},
                 {"eps", eps},
                 {"delta", delta},
                 {"scheme", scheme},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

int cmd_certify_cv(const CommonOpts& opts, const std::string& target,
                   const std::string& actual, long points, long shots) {
  const auto rho = CvState::parse(target);
  const auto sigma = CvState::parse(actual.empty() ? target : actual);
  const auto report = estimate_fidelity_cv(rho, sigma, points, shots,
                                           opts.seed);

  json payload;
  payload["kind"] = "cv-fidelity";
  payload["estimate"] = report.estimate;
  payload["points"] = points;
  payload["shots_per_point"] = shots;
  payload["cv_cutoff"] = kCvCutoff;
  payload["truncation_error_bound"] = cv_truncation_error(rho, kCvCutoff);
  payload["exact_fidelity_quadrature"] = wigner_overlap_integral(rho, sigma);

  std::string csv = "re_alpha,im_alpha,w_rho,w_sigma_tilde,ratio\n";
  for (const auto& s : report.points)
    csv += std::to_string(s.point.alpha.real()) + "," +
           std::to_string(s.point.alpha.imag()) + "," +
           std::to_string(s.w_rho) + "," + std::to_string(s.w_sigma_tilde) +
           "," + std::to_string(s.ratio) + "\n";

  json config = {{"subcommand", "certify-cv"},
                 {"target", target},
                 {"actual", actual.empty() ? target : actual},
                 {"points", points},
                 {"shots", shots},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

int cmd_learn(const CommonOpts& opts, int n, double t, double noise_eps,
              const std::string& noise_kind, int trials) {
  ShiftNoise noise = ShiftNoise::kUniform;
  if (noise_kind == "none" || noise_eps == 0.0) noise = ShiftNoise::kNone;
  else if (noise_kind == "uniform") noise = ShiftNoise::kUniform;
  else if (noise_kind == "gaussian") noise = ShiftNoise::kGaussian;
  else throw std::invalid_argument("noise kind must be none|uniform|gaussian");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  std::string csv = "trial,rms_error,total_scaling,mean_scaling_amp\n";
  double mean_rms = 0.0, mean_scaling = 0.0;
  auto rng = make_rng(opts.seed);
  for (int trial = 0; trial < trials; ++trial) {
    const auto h = random_local_hamiltonian(n, rng);
    const auto report = learn_run(h, t, noise, noise_eps, rng);
    mean_rms += report.rms_error / trials;
    mean_scaling += report.total_scaling / trials;
    csv += std::to_string(trial) + "," + std::to_string(report.rms_error) +
           "," + std::to_string(report.total_scaling) + "," +
           std::to_string(report.scaling_amp.mean()) + "\n";
  }

  json payload;
  payload["kind"] = "hamiltonian-learning";
  payload["n"] = n;
  payload["t"] = t;
  payload["noise_eps"] = noise_eps;
  payload["trials"] = trials;
  payload["mean_rms_error"] = mean_rms;
  payload["mean_total_scaling"] = mean_scaling;

  json config = {{"subcommand", "learn-hamiltonian"},
                 {"n", n},
                 {"t", t},
                 {"noise_eps", noise_eps},
                 {"noise_kind", noise_kind},
                 {"trials", trials},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

int cmd_sample_relevance(const CommonOpts& opts, const std::string& target,
                         long count) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const auto rho = parse_state(target);
  const int n = num_qubits(rho);
  RelevanceSampler sampler(rho);
  auto rng = make_rng(opts.seed);

  std::string csv = "k,index,pauli,rho_i,weight\n";
  double mean_abs_rho = 0.0;
  for (long k = 0; k < count; ++k) {
    const auto s = sampler.sample(rng);
    mean_abs_rho += std::abs(s.rho_i) / count;
    csv += std::to_string(k) + "," + std::to_string(s.index) + "," +
           PauliString::from_index(n, s.index).to_text() + "," +
           std::to_string(s.rho_i) + "," + std::to_string(s.weight) + "\n";
  }

  json payload;
  payload["kind"] = "relevance-samples";
  payload["count"] = count;
  payload["mean_abs_rho"] = mean_abs_rho;

  json config = {{"subcommand", "sample-relevance"},
                 {"target", target},
                 {"count", count},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

int cmd_repro_wigner(const CommonOpts& opts, int runs, long points,
                     long shots) {
  const auto rho = CvState::parse("cat:3");
  const auto sigma = CvState::parse("mixture:3");
  const double truth = 0.5 * (1.0 + std::exp(-18.0));

  std::string csv = "run,n,estimate,abs_error\n";
  json run_summaries = json::array();
  for (int run = 0; run < runs; ++run) {
    const auto report = estimate_fidelity_cv(
        rho, sigma, points, shots, mix_seed(opts.seed, run));
    double sum = 0.0;
    for (std::size_t k = 0; k < report.points.size(); ++k) {
      sum += report.points[k].ratio;
      const long n = static_cast<long>(k) + 1;
      // Log-spaced checkpoints plus the final sample.
      bool emit = n == points;
      for (long mark = 10; mark <= points && !emit; mark *= 2)
        emit = n == mark;
      if (emit)
        csv += std::to_string(run) + "," + std::to_string(n) + "," +
               std::to_string(sum / n) + "," +
               std::to_string(std::abs(sum / n - truth)) + "\n";
    }
    run_summaries.push_back(
        {{"run", run},
         {"estimate", report.estimate},
         {"abs_error", std::abs(report.estimate - truth)}});
  }

  json payload;
  payload["kind"] = "cat-state-experiment";
  payload["true_fidelity"] = truth;
  payload["runs"] = run_summaries;

  json config = {{"subcommand", "repro-fig-wigner"},
                 {"runs", runs},
                 {"points", points},
                 {"shots", shots},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

int cmd_repro_rms(const CommonOpts& opts, int n_min, int n_max, double t,
                  double noise_eps, int trials) {
  std::string csv = "n,trial,rms_error,total_scaling\n";
  json sweep = json::array();
  for (int n = n_min; n <= n_max; ++n) {
    auto rng = make_rng(mix_seed(opts.seed, n));
    double mean_rms = 0.0, mean_scaling = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      const auto h = random_local_hamiltonian(n, rng);
      const auto report =
          learn_run(h, t, ShiftNoise::kUniform, noise_eps, rng);
      mean_rms += report.rms_error / trials;
      mean_scaling += report.total_scaling / trials;
      csv += std::to_string(n) + "," + std::to_string(trial) + "," +
             std::to_string(report.rms_error) + "," +
             std::to_string(report.total_scaling) + "\n";
    }
    sweep.push_back({{"n", n},
                     {"mean_rms_error", mean_rms},
                     {"mean_total_scaling", mean_scaling}});
  }

  json payload;
  payload["kind"] = "learning-error-sweep";
  payload["sweep"] = sweep;

  json config = {{"subcommand", "repro-fig-rms"},
                 {"n_min", n_min},
                 {"n_max", n_max},
                 {"t", t},
                 {"noise_eps", noise_eps},
                 {"trials", trials},
                 {"seed", opts.seed}};
  write_outputs(opts, config, payload, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo certification of simulated quantum devices"};
  app.set_config("--config", "", "key=value config file (flags override)");
  app.require_subcommand(1);

  // certify-state ----------------------------------------------------------
  auto* state_cmd =
      app.add_subcommand("certify-state", "Certify a qubit state");
  CommonOpts state_opts;
  std::string state_target = "ghz:3", state_noise = "none";
  double state_eps = 0.1, state_delta = 0.1, state_trunc = 1.0;
  long state_n1 = 0;
  state_cmd->add_option("--target", state_target, "State spec, e.g. ghz:3");
  state_cmd->add_option("--noise", state_noise, "Noise channel spec");
  state_cmd->add_option("--eps", state_eps, "Total error budget")
      ->check(CLI::Range(1e-6, 1.999));
  state_cmd->add_option("--delta", state_delta, "Failure probability")
      ->check(CLI::Range(1e-9, 0.999));
  state_cmd->add_option("--n1", state_n1, "Override sample count N1");
  state_cmd->add_option("--trunc-eps", state_trunc, "Truncation exponent");
  add_common(state_cmd, state_opts);

  // certify-process --------------------------------------------------------
  auto* proc_cmd =
      app.add_subcommand("certify-process", "Certify a quantum operation");
  CommonOpts proc_opts;
  std::string proc_target = "cnot", proc_actual, proc_noise = "none",
              proc_scheme = "direct";
  double proc_eps = 0.1, proc_delta = 0.1;
  long proc_n1 = 0;
  int proc_n = 0;
  proc_cmd->add_option("--target", proc_target, "Clifford circuit spec");
  proc_cmd->add_option("--actual", proc_actual,
                       "Actual circuit (defaults to target)");
  proc_cmd->add_option("--noise", proc_noise, "Noise applied after actual");
  proc_cmd->add_option("--eps", proc_eps, "Total error budget")
      ->check(CLI::Range(1e-6, 1.999));
  proc_cmd->add_option("--delta", proc_delta, "Failure probability")
      ->check(CLI::Range(1e-9, 0.999));
  proc_cmd->add_option("--n1", proc_n1, "Override sample count N1");
  proc_cmd->add_option("--scheme", proc_scheme, "direct or product");
  proc_cmd->add_option("--n", proc_n, "Qubit count hint");
  add_common(proc_cmd, proc_opts);

  // certify-cv -------------------------------------------------------------
  auto* cv_cmd = app.add_subcommand("certify-cv",
                                    "Certify a continuous-variable state");
  CommonOpts cv_opts;
  std::string cv_target = "cat:3", cv_actual;
  long cv_points = 1000, cv_shots = 400;
  cv_cmd->add_option("--target", cv_target, "CV state spec, e.g. cat:3");
  cv_cmd->add_option("--actual", cv_actual, "Actual state (defaults to target)");
  cv_cmd->add_option("--points", cv_points, "Phase-space points")
      ->check(CLI::PositiveNumber);
  cv_cmd->add_option("--shots", cv_shots, "Parity shots per point")
      ->check(CLI::PositiveNumber);
  add_common(cv_cmd, cv_opts);

  // learn-hamiltonian ------------------------------------------------------
  auto* learn_cmd =
      app.add_subcommand("learn-hamiltonian", "Learn a 2-local chain");
  CommonOpts learn_opts;
  int learn_n = 4, learn_trials = 10;
  double learn_t = 1e-3, learn_eps = 1e-4;
  std::string learn_kind = "uniform";
  learn_cmd->add_option("--n", learn_n, "Chain length")->check(CLI::Range(2, 8));
  learn_cmd->add_option("--t", learn_t, "Evolution time")
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--noise-eps", learn_eps, "Measurement precision");
  learn_cmd->add_option("--noise-kind", learn_kind, "none|uniform|gaussian");
  learn_cmd->add_option("--trials", learn_trials, "Random Hamiltonians");
  add_common(learn_cmd, learn_opts);

  // sample-relevance -------------------------------------------------------
  auto* sample_cmd =
      app.add_subcommand("sample-relevance", "Draw Pauli relevance samples");
  CommonOpts sample_opts;
  std::string sample_target = "ghz:3";
  long sample_count = 100;
  sample_cmd->add_option("--target", sample_target, "State spec");
  sample_cmd->add_option("--count", sample_count, "Number of samples");
  add_common(sample_cmd, sample_opts);

  // repro-fig-wigner -------------------------------------------------------
  auto* wig_cmd = app.add_subcommand(
      "repro-fig-wigner", "Cat-state experiment: error vs sample count");
  CommonOpts wig_opts;
  int wig_runs = 5;
  long wig_points = 1000, wig_shots = 400;
  wig_cmd->add_option("--runs", wig_runs, "Independent runs");
  wig_cmd->add_option("--points", wig_points, "Points per run");
  wig_cmd->add_option("--shots", wig_shots, "Parity shots per point");
  add_common(wig_cmd, wig_opts);

  // repro-fig-rms ----------------------------------------------------------
  auto* rms_cmd = app.add_subcommand(
      "repro-fig-rms", "Learning error and scaling factors vs chain length");
  CommonOpts rms_opts;
  int rms_min = 3, rms_max = 6, rms_trials = 50;
  double rms_t = 1e-3, rms_eps = 1e-4;
  rms_cmd->add_option("--n-min", rms_min, "Smallest chain");
  rms_cmd->add_option("--n-max", rms_max, "Largest chain");
  rms_cmd->add_option("--t", rms_t, "Evolution time");
  rms_cmd->add_option("--noise-eps", rms_eps, "Measurement precision");
  rms_cmd->add_option("--trials", rms_trials, "Trials per length");
  add_common(rms_cmd, rms_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    int rc = 0;
    if (*state_cmd) {
      (void)resolve_threads(state_opts);
      rc = cmd_certify_state(state_opts, state_target, state_noise, state_eps,
                             state_delta, state_n1, state_trunc);
    } else if (*proc_cmd) {
      rc = cmd_certify_process(proc_opts, proc_target, proc_actual, proc_noise,
                               proc_eps, proc_delta, proc_n1, proc_scheme,
                               proc_n);
    } else if (*cv_cmd) {
      rc = cmd_certify_cv(cv_opts, cv_target, cv_actual, cv_points, cv_shots);
    } else if (*learn_cmd) {
      rc = cmd_learn(learn_opts, learn_n, learn_t, learn_eps, learn_kind,
                     learn_trials);
    } else if (*sample_cmd) {
      rc = cmd_sample_relevance(sample_opts, sample_target, sample_count);
    } else if (*wig_cmd) {
      rc = cmd_repro_wigner(wig_opts, wig_runs, wig_points, wig_shots);
    } else if (*rms_cmd) {
      rc = cmd_repro_rms(rms_opts, rms_min, rms_max, rms_t, rms_eps,
                         rms_trials);
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    std::cerr << "done in " << elapsed.count() << " ms\n";
    return rc;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 3;
  }
}
