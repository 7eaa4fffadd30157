// Command-line front end: run BER sweeps over precoder/bits/SNR grids and
// compare result CSVs against a baseline within tolerances.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>
#include <vector>

#include "cepre/harness.hpp"
#include "cepre/io.hpp"

namespace {

std::vector<double> parse_snr_spec(const std::string& spec) {
  const auto first = spec.find(':');
  if (first == std::string::npos) {
    // single grid point
    std::size_t used = 0;
    const double v = std::stod(spec, &used);
    if (used != spec.size()) throw std::invalid_argument("bad --snr value '" + spec + "'");
    return {v};
  }
  const auto second = spec.find(':', first + 1);
  if (second == std::string::npos)
    throw std::invalid_argument("--snr expects min:step:max, got '" + spec + "'");
  std::size_t used = 0;
  const std::string min_s = spec.substr(0, first);
  const std::string step_s = spec.substr(first + 1, second - first - 1);
  const std::string max_s = spec.substr(second + 1);
  const double min_db = std::stod(min_s, &used);
  if (used != min_s.size()) throw std::invalid_argument("bad --snr min '" + min_s + "'");
  const double step_db = std::stod(step_s, &used);
  if (used != step_s.size()) throw std::invalid_argument("bad --snr step '" + step_s + "'");
  const double max_db = std::stod(max_s, &used);
  if (used != max_s.size()) throw std::invalid_argument("bad --snr max '" + max_s + "'");
  if (step_db <= 0.0) throw std::invalid_argument("--snr step must be positive");
  if (max_db < min_db) throw std::invalid_argument("--snr max must be >= min");
  return cepre::snr_range(min_db, step_db, max_db);
}

int threads_from_env() {
  const char* raw = std::getenv("CE_PRECODE_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(raw).size() || value < 1)
    throw std::invalid_argument(std::string("CE_PRECODE_THREADS must be a positive integer, got '") + raw + "'");
  return value;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constant-envelope PSK precoding: BER sweeps and regression compare"};
  app.require_subcommand(1);

  // --- run ------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run a Monte-Carlo BER sweep");
  int antennas = 32, users = 4, channels = 100, symbols = 1000, max_iter = 500;
  std::vector<std::string> bits{"inf"};
  std::vector<std::string> precoders{"gdm-cec"};
  std::string snr_spec = "-10:2:20";
  std::uint64_t seed = 1;
  double mu0 = 0.0, epsilon = 1e-2, alpha = 0.0;
  std::string out_dir = "results";
  bool full_scale = false;

  run->add_option("--antennas", antennas, "transmit antennas N")->capture_default_str();
  run->add_option("--users", users, "single-antenna users M")->capture_default_str();
  run->add_option("--bits", bits, "DAC resolution(s): 2..8 or 'inf'")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--precoder", precoders,
                  "precoder(s): gdm-cec qgdm-cec gpm-rpc wf wf-ce ml-ce")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--snr", snr_spec, "SNR grid min:step:max in dB")->capture_default_str();
  auto* channels_opt =
      run->add_option("--channels", channels, "channel realizations")->capture_default_str();
  auto* symbols_opt =
      run->add_option("--symbols", symbols, "symbol vectors per channel")->capture_default_str();
  run->add_option("--seed", seed, "master RNG seed")->capture_default_str();
  run->add_option("--mu0", mu0, "initial step size (default: per-algorithm)");
  run->add_option("--epsilon", epsilon, "convergence tolerance")->capture_default_str();
  run->add_option("--alpha", alpha, "scaling factor override (default: sqrt(N(N-M)/M))");
  run->add_option("--max-iter", max_iter, "solver iteration cap")->capture_default_str();
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_flag("--full-scale", full_scale, "preset 500 channels x 10^4 symbols");

  // --- compare --------------------------------------------------------
  auto* compare = app.add_subcommand("compare", "compare a candidate ber.csv to a baseline");
  std::string baseline_csv, candidate_csv;
  cepre::io::CompareTolerances tol;
  compare->add_option("baseline", baseline_csv, "baseline ber.csv")->required();
  compare->add_option("candidate", candidate_csv, "candidate ber.csv")->required();
  compare->add_option("--ber-rtol", tol.ber_rtol, "relative BER tolerance")->capture_default_str();
  compare->add_option("--snr-atol", tol.snr_atol, "snr@1e-3 tolerance in dB")->capture_default_str();
  compare->add_option("--iter-rtol", tol.iter_rtol, "relative iteration tolerance")->capture_default_str();
  compare->add_option("--min-ber", tol.min_ber, "ignore baseline points below this BER")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(compare)) {
      const auto report = cepre::io::compare_ber_csv(baseline_csv, candidate_csv, tol);
      std::cout << report.text;
      return report.pass ? 0 : 3;
    }

    // assemble the config cross product and reject bad combos before any work
    std::vector<cepre::ExperimentConfig> configs;
    try {
      if (full_scale) {
        if (channels_opt->count() == 0) channels = 500;
        if (symbols_opt->count() == 0) symbols = 10000;
      }
      const std::vector<double> grid = parse_snr_spec(snr_spec);
      const int threads = threads_from_env();
      for (const auto& p : precoders) {
        for (const auto& b : bits) {
          cepre::ExperimentConfig cfg;
          cfg.antennas = antennas;
          cfg.users = users;
          cfg.snr_grid_db = grid;
          cfg.order = cepre::order_from_label(b);
          cfg.precoder = cepre::precoder_from_name(p);
          cfg.channels = channels;
          cfg.symbols_per_channel = symbols;
          cfg.master_seed = seed;
          cfg.solver.mu0 = mu0;
          cfg.solver.epsilon = epsilon;
          cfg.solver.alpha = alpha;
          cfg.solver.max_iterations = max_iter;
          cfg.threads = threads;
          cfg = cepre::resolve(cfg);
          cepre::validate(cfg);
          configs.push_back(std::move(cfg));
        }
      }
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }

    cepre::io::RunManifest manifest;
    manifest.master_seed = seed;
    manifest.argv.assign(argv, argv + argc);
    manifest.created_utc = utc_now();

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<cepre::io::ResultSet> results;
    for (const auto& cfg : configs) {
      const auto r0 = std::chrono::steady_clock::now();
      results.push_back({cfg, cepre::run_experiment(cfg)});
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - r0;
      std::cerr << cepre::precoder_name(cfg.precoder) << "/" << cepre::bits_label(cfg.order)
                << ": " << cfg.channels << " channels x " << cfg.symbols_per_channel
                << " symbols in " << dt.count() << " s\n";
    }
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    cepre::io::emit_results(results, manifest, out_dir);
    std::cout << "wrote " << out_dir << "/ber.csv, summary.json, manifest.json\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
