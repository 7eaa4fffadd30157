#include "cepre/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cepre {

namespace {

Algorithm algorithm_of(Precoder p) {
  switch (p) {
    case Precoder::kQgdmCec:
      return Algorithm::kQgdm;
    case Precoder::kGpmRpc:
      return Algorithm::kGpm;
    case Precoder::kMlCe:
      return Algorithm::kMlCe;
    default:
      return Algorithm::kGdm;
  }
}

struct ChannelTally {
  std::vector<std::int64_t> bit_errors;  // one counter per SNR point
  std::int64_t solves = 0;
  std::int64_t iterations = 0;
  std::int64_t halvings = 0;
  std::int64_t capped = 0;
};

int count_bit_errors(Complex sample, int digit) {
  const QpskSymbol decided = qpsk_decide(sample);
  return (decided.b0 != (digit >> 1)) + (decided.b1 != (digit & 1));
}

ChannelTally simulate_channel(const ExperimentConfig& cfg, int channel_index) {
  const int n_snr = static_cast<int>(cfg.snr_grid_db.size());
  ChannelTally tally;
  tally.bit_errors.assign(n_snr, 0);

  const ChannelMatrix h = generate_channel(
      cfg.antennas, cfg.users,
      rng::derive_seed(cfg.master_seed, channel_index, rng::StreamKind::kChannel));

  // symbol indices and noise are drawn once per channel and shared by every
  // SNR point: the grid only rescales the noiseless receive vector
  const std::uint32_t universe = symbol_count(cfg.users);
  rng::Stream symbol_stream =
      rng::substream(cfg.master_seed, channel_index, rng::StreamKind::kSymbols);
  rng::Stream noise_stream =
      rng::substream(cfg.master_seed, channel_index, rng::StreamKind::kNoise);

  std::vector<std::uint32_t> drawn(cfg.symbols_per_channel);
  for (auto& idx : drawn) idx = static_cast<std::uint32_t>(symbol_stream.below(universe));
  Eigen::MatrixXcd eta(cfg.users, cfg.symbols_per_channel);
  for (int t = 0; t < cfg.symbols_per_channel; ++t)
    for (int u = 0; u < cfg.users; ++u) eta(u, t) = noise_stream.cn01();

  if (is_lut_precoder(cfg.precoder)) {
    const PrecoderLut lut = build_lut(h, cfg.solver, algorithm_of(cfg.precoder));
    tally.solves = lut.totals.solves;
    tally.iterations = lut.totals.iterations;
    tally.halvings = lut.totals.halvings;
    tally.capped = lut.totals.capped;

    Eigen::MatrixXcd noiseless(cfg.users, universe);
    for (std::uint32_t idx = 0; idx < universe; ++idx)
      noiseless.col(idx) = h * lut.entries[idx];

    for (int e = 0; e < n_snr; ++e) {
      const double amp = LinkScale::from_snr_db(cfg.snr_grid_db[e]).amplitude(cfg.antennas);
      std::int64_t errors = 0;
      for (int t = 0; t < cfg.symbols_per_channel; ++t) {
        const std::uint32_t idx = drawn[t];
        for (int u = 0; u < cfg.users; ++u) {
          const Complex sample = amp * noiseless(u, idx) + eta(u, t);
          errors += count_bit_errors(sample, symbol_digit(idx, cfg.users, u));
        }
      }
      tally.bit_errors[e] = errors;
    }
    return tally;
  }

  // WF family: the precoder depends on E_tx, so rebuild per SNR point
  for (int e = 0; e < n_snr; ++e) {
    const LinkScale scale = LinkScale::from_snr_db(cfg.snr_grid_db[e]);
    const WfPrecoder wf = wf_precoder(h, scale.e_tx, cfg.users);

    Eigen::MatrixXcd noiseless(cfg.users, universe);
    double amp = 1.0;  // x = P_wf*s already carries the power budget
    if (cfg.precoder == Precoder::kWf) {
      const Eigen::MatrixXcd through = h * wf.matrix;
      for (std::uint32_t idx = 0; idx < universe; ++idx)
        noiseless.col(idx) = through * symbols_from_index(idx, cfg.users);
    } else {
      amp = scale.amplitude(cfg.antennas);
      for (std::uint32_t idx = 0; idx < universe; ++idx)
        noiseless.col(idx) = h * wf_ce_transmit(wf, symbols_from_index(idx, cfg.users), cfg.order);
    }

    std::int64_t errors = 0;
    for (int t = 0; t < cfg.symbols_per_channel; ++t) {
      const std::uint32_t idx = drawn[t];
      for (int u = 0; u < cfg.users; ++u) {
        const Complex sample = wf.f_wf * (amp * noiseless(u, idx) + eta(u, t));
        errors += count_bit_errors(sample, symbol_digit(idx, cfg.users, u));
      }
    }
    tally.bit_errors[e] = errors;
  }
  return tally;
}

}  // namespace

ExperimentConfig resolve(const ExperimentConfig& cfg) {
  ExperimentConfig out = cfg;
  if (out.snr_grid_db.empty()) out.snr_grid_db = default_snr_grid();
  out.solver.order = out.order;
  out.solver.constraint =
      out.precoder == Precoder::kGpmRpc ? Constraint::kRpc : Constraint::kCec;
  if (out.solver.mu0 <= 0.0) out.solver.mu0 = default_mu0(algorithm_of(out.precoder));
  if (out.solver.alpha <= 0.0 && out.users > 0 && out.users < out.antennas)
    out.solver.alpha = compute_alpha(out.antennas, out.users);
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.users <= 0 || cfg.users >= cfg.antennas)
    throw std::invalid_argument("config: need 0 < users < antennas");
  if (is_lut_precoder(cfg.precoder) && cfg.users > 8)
    throw std::invalid_argument("config: LUT precoders support at most 8 users");
  if (cfg.channels < 1) throw std::invalid_argument("config: channels must be >= 1");
  if (cfg.symbols_per_channel < 1) throw std::invalid_argument("config: symbols must be >= 1");
  if (cfg.snr_grid_db.empty()) throw std::invalid_argument("config: empty SNR grid");
  for (std::size_t i = 1; i < cfg.snr_grid_db.size(); ++i)
    if (!(cfg.snr_grid_db[i] > cfg.snr_grid_db[i - 1]))
      throw std::invalid_argument("config: SNR grid must be strictly increasing");
  if (cfg.precoder == Precoder::kQgdmCec && !cfg.order.is_finite())
    throw std::invalid_argument("config: qgdm-cec needs a finite --bits value");
  if (cfg.precoder == Precoder::kWf && cfg.order.is_finite())
    throw std::invalid_argument("config: wf is unquantized; use wf-ce for quantized transmit");
  if (cfg.solver.mu0 <= 0.0) throw std::invalid_argument("config: mu0 must be positive");
  if (cfg.solver.epsilon <= 0.0) throw std::invalid_argument("config: epsilon must be positive");
  if (cfg.solver.alpha <= 0.0) throw std::invalid_argument("config: alpha must be positive");
  if (cfg.solver.max_iterations < 1)
    throw std::invalid_argument("config: max-iter must be >= 1");
  if (cfg.threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

std::vector<BerRecord> run_experiment(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve(raw);
  validate(cfg);

  const int n_snr = static_cast<int>(cfg.snr_grid_db.size());
  std::vector<ChannelTally> tallies(cfg.channels);

  int workers = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, cfg.channels);

  if (workers == 1) {
    for (int c = 0; c < cfg.channels; ++c) tallies[c] = simulate_channel(cfg, c);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      try {
        for (int c = next.fetch_add(1); c < cfg.channels; c = next.fetch_add(1))
          tallies[c] = simulate_channel(cfg, c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // merge in channel order; all counters are integers, so the totals are
  // independent of the worker schedule
  const std::int64_t bits_total =
      2LL * cfg.users * cfg.symbols_per_channel * cfg.channels;
  std::vector<std::int64_t> errors(n_snr, 0);
  std::int64_t solves = 0, iterations = 0, halvings = 0, capped = 0;
  for (const auto& tally : tallies) {
    for (int e = 0; e < n_snr; ++e) errors[e] += tally.bit_errors[e];
    solves += tally.solves;
    iterations += tally.iterations;
    halvings += tally.halvings;
    capped += tally.capped;
  }

  std::vector<BerRecord> records(n_snr);
  for (int e = 0; e < n_snr; ++e) {
    BerRecord& rec = records[e];
    rec.snr_db = cfg.snr_grid_db[e];
    rec.bit_errors = errors[e];
    rec.bits_total = bits_total;
    rec.ber = static_cast<double>(errors[e]) / static_cast<double>(bits_total);
    rec.avg_iterations = solves ? static_cast<double>(iterations) / solves : 0.0;
    rec.avg_halvings = solves ? static_cast<double>(halvings) / solves : 0.0;
    rec.capped_fraction = solves ? static_cast<double>(capped) / solves : 0.0;
  }
  return records;
}

SnrAtBer snr_at_ber(const std::vector<BerRecord>& records, double target) {
  if (target <= 0.0) throw std::invalid_argument("snr_at_ber: target must be positive");
  SnrAtBer out;
  out.target_ber = target;
  for (const auto& rec : records)
    if (rec.ber == target) {
      out.snr_db = rec.snr_db;
      return out;
    }
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    const BerRecord& hi = records[i];
    const BerRecord& lo = records[i + 1];
    if (hi.ber > target && lo.ber < target) {
      // a zero estimate only says "below resolution"; pin it to half an error
      double floor_ber = lo.ber;
      if (floor_ber == 0.0) floor_ber = 0.5 / static_cast<double>(std::max<std::int64_t>(lo.bits_total, 1));
      const double span = std::log10(hi.ber) - std::log10(floor_ber);
      const double t = (std::log10(hi.ber) - std::log10(target)) / span;
      out.snr_db = hi.snr_db + (lo.snr_db - hi.snr_db) * t;
      return out;
    }
  }
  return out;
}

std::pair<double, double> aggregate_solver_stats(const std::vector<SolveResult>& solves) {
  if (solves.empty()) throw std::invalid_argument("aggregate_solver_stats: empty stream");
  double iterations = 0.0, halvings = 0.0;
  for (const auto& res : solves) {
    iterations += res.iterations;
    halvings += res.halvings;
  }
  return {iterations / solves.size(), halvings / solves.size()};
}

std::string precoder_name(Precoder p) {
  switch (p) {
    case Precoder::kGdmCec:
      return "gdm-cec";
    case Precoder::kQgdmCec:
      return "qgdm-cec";
    case Precoder::kGpmRpc:
      return "gpm-rpc";
    case Precoder::kWf:
      return "wf";
    case Precoder::kWfCe:
      return "wf-ce";
    case Precoder::kMlCe:
      return "ml-ce";
  }
  throw std::logic_error("precoder_name: unreachable");
}

Precoder precoder_from_name(const std::string& name) {
  if (name == "gdm-cec") return Precoder::kGdmCec;
  if (name == "qgdm-cec") return Precoder::kQgdmCec;
  if (name == "gpm-rpc") return Precoder::kGpmRpc;
  if (name == "wf") return Precoder::kWf;
  if (name == "wf-ce") return Precoder::kWfCe;
  if (name == "ml-ce") return Precoder::kMlCe;
  throw std::invalid_argument("unknown precoder '" + name + "'");
}

std::string bits_label(PskOrder order) {
  return order.is_finite() ? std::to_string(order.bits()) : "inf";
}

PskOrder order_from_label(const std::string& label) {
  if (label == "inf") return PskOrder::unquantized();
  if (label.size() == 1 && label[0] >= '0' && label[0] <= '9')
    return PskOrder::psk(label[0] - '0');
  throw std::invalid_argument("bits must be an integer in [2, 8] or 'inf', got '" + label + "'");
}

}  // namespace cepre
