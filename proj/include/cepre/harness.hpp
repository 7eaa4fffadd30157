#ifndef CEPRE_HARNESS_HPP
#define CEPRE_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cepre/solvers.hpp"

// Link-level Monte-Carlo loop: sweep channel realizations, build the active
// precoder once per realization, push random QPSK symbol vectors through the
// noisy chain, and count Gray-mapped bit errors per SNR grid point. Channel
// realizations are independent work units; per-channel symbol and noise
// streams are keyed by (master seed, channel index), so the aggregate is
// bit-identical for any worker count.

namespace cepre {

enum class Precoder { kGdmCec, kQgdmCec, kGpmRpc, kWf, kWfCe, kMlCe };

inline bool is_lut_precoder(Precoder p) {
  return p == Precoder::kGdmCec || p == Precoder::kQgdmCec || p == Precoder::kGpmRpc ||
         p == Precoder::kMlCe;
}

struct ExperimentConfig {
  int antennas = 32;
  int users = 4;
  std::vector<double> snr_grid_db;  // empty == default grid -10:2:20
  PskOrder order = PskOrder::unquantized();
  Precoder precoder = Precoder::kGdmCec;
  int channels = 100;               // full-scale protocol uses 500
  int symbols_per_channel = 1000;   // full-scale protocol uses 10^4
  std::uint64_t master_seed = 1;
  // mu0/alpha <= 0 mean "pick for me"; resolve() fills them in
  SolverParams solver = {.mu0 = 0.0, .epsilon = 1e-2, .alpha = 0.0};
  int threads = 0;  // 0 = hardware concurrency

  bool operator==(const ExperimentConfig&) const = default;
};

inline std::vector<double> snr_range(double min_db, double step_db, double max_db) {
  std::vector<double> grid;
  for (double v = min_db; v <= max_db + 1e-9 * std::max(1.0, std::abs(step_db)); v += step_db)
    grid.push_back(v);
  return grid;
}

inline std::vector<double> default_snr_grid() { return snr_range(-10.0, 2.0, 20.0); }

// per-(precoder, B, SNR) aggregate
struct BerRecord {
  double snr_db = 0.0;
  double ber = 0.0;
  std::int64_t bit_errors = 0;
  std::int64_t bits_total = 0;
  double avg_iterations = 0.0;
  double avg_halvings = 0.0;
  double capped_fraction = 0.0;

  bool operator==(const BerRecord&) const = default;
};

struct SnrAtBer {
  double target_ber = 0.0;
  std::optional<double> snr_db;  // absent when the curve never crosses the target
};

// throws std::invalid_argument describing the first inconsistency
void validate(const ExperimentConfig& cfg);

// fills defaulted fields (SNR grid, solver mu0/alpha/order/constraint)
ExperimentConfig resolve(const ExperimentConfig& cfg);

std::vector<BerRecord> run_experiment(const ExperimentConfig& cfg);

// log-linear interpolation (dB vs log10 BER) of the first downward crossing
SnrAtBer snr_at_ber(const std::vector<BerRecord>& records, double target);

std::pair<double, double> aggregate_solver_stats(const std::vector<SolveResult>& solves);

std::string precoder_name(Precoder p);
Precoder precoder_from_name(const std::string& name);
std::string bits_label(PskOrder order);
PskOrder order_from_label(const std::string& label);

}  // namespace cepre

#endif  // CEPRE_HARNESS_HPP
