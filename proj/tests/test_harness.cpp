#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cepre/harness.hpp"

using namespace cepre;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.antennas = 8;
  cfg.users = 2;
  cfg.snr_grid_db = {0.0, 4.0};
  cfg.order = PskOrder::psk(2);
  cfg.precoder = Precoder::kGdmCec;
  cfg.channels = 6;
  cfg.symbols_per_channel = 100;
  cfg.master_seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent combinations") {
  ExperimentConfig cfg = resolve(small_config());
  CHECK_NOTHROW(validate(cfg));

  ExperimentConfig bad = cfg;
  bad.precoder = Precoder::kQgdmCec;
  bad.order = PskOrder::unquantized();
  CHECK_THROWS_AS(validate(resolve(bad)), std::invalid_argument);

  bad = cfg;
  bad.precoder = Precoder::kWf;
  bad.order = PskOrder::psk(2);
  CHECK_THROWS_AS(validate(resolve(bad)), std::invalid_argument);

  bad = cfg;
  bad.users = 8;
  bad.antennas = 8;
  CHECK_THROWS_AS(validate(resolve(bad)), std::invalid_argument);

  bad = cfg;
  bad.snr_grid_db = {4.0, 0.0};
  CHECK_THROWS_AS(validate(resolve(bad)), std::invalid_argument);

  bad = cfg;
  bad.channels = 0;
  CHECK_THROWS_AS(validate(resolve(bad)), std::invalid_argument);
}

TEST_CASE("resolve fills per-algorithm defaults") {
  ExperimentConfig cfg = small_config();
  cfg.precoder = Precoder::kGdmCec;
  CHECK(resolve(cfg).solver.mu0 == 0.25);
  cfg.precoder = Precoder::kQgdmCec;
  CHECK(resolve(cfg).solver.mu0 == 0.5);
  cfg.precoder = Precoder::kGpmRpc;
  CHECK(resolve(cfg).solver.mu0 == 1.0);
  CHECK(resolve(cfg).solver.constraint == Constraint::kRpc);
  CHECK(resolve(cfg).solver.alpha ==
        doctest::Approx(compute_alpha(8, 2)).epsilon(1e-15));
  cfg.solver.mu0 = 0.125;
  cfg.solver.alpha = 3.0;
  CHECK(resolve(cfg).solver.mu0 == 0.125);
  CHECK(resolve(cfg).solver.alpha == 3.0);

  ExperimentConfig grid = small_config();
  grid.snr_grid_db.clear();
  CHECK(resolve(grid).snr_grid_db.size() == 16);  // -10:2:20
}

TEST_CASE("runs are bit-identical across reruns and worker counts") {
  ExperimentConfig cfg = small_config();
  cfg.threads = 1;
  const auto serial = run_experiment(cfg);
  const auto serial_again = run_experiment(cfg);
  CHECK(serial == serial_again);

  cfg.threads = 4;
  const auto parallel = run_experiment(cfg);
  CHECK(serial == parallel);

  ExperimentConfig reseeded = cfg;
  reseeded.master_seed = 12;
  CHECK(run_experiment(reseeded) != serial);
}

TEST_CASE("bit accounting is conserved") {
  const auto records = run_experiment(small_config());
  REQUIRE(records.size() == 2);
  for (const auto& rec : records) {
    CHECK(rec.bits_total == 2LL * 2 * 100 * 6);
    CHECK(rec.bit_errors >= 0);
    CHECK(rec.bit_errors <= rec.bits_total);
    CHECK(rec.ber == static_cast<double>(rec.bit_errors) / rec.bits_total);
    // the LUT is built once per channel: 4^{M-1} solves, so stats match
    CHECK(rec.avg_iterations == records.front().avg_iterations);
    CHECK(rec.capped_fraction <= 1.0);
  }
}

TEST_CASE("noiseless limit drives the BER to zero") {
  ExperimentConfig cfg;
  cfg.antennas = 16;
  cfg.users = 2;
  cfg.snr_grid_db = {120.0};  // E_tx = 1e12
  cfg.order = PskOrder::unquantized();
  cfg.precoder = Precoder::kGdmCec;
  cfg.channels = 10;
  cfg.symbols_per_channel = 200;
  cfg.master_seed = 3;
  const auto records = run_experiment(cfg);
  CHECK(records[0].ber < 1e-4);
}

TEST_CASE("wf baseline BER is non-increasing in SNR at 1e6 bits per point") {
  ExperimentConfig cfg;
  cfg.antennas = 32;
  cfg.users = 4;
  cfg.snr_grid_db = snr_range(-10.0, 2.0, 6.0);
  cfg.order = PskOrder::unquantized();
  cfg.precoder = Precoder::kWf;
  cfg.channels = 125;
  cfg.symbols_per_channel = 1000;  // 2*4*1000*125 = 1e6 bits per point
  cfg.master_seed = 5;
  const auto records = run_experiment(cfg);
  int inversions = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].ber > records[i - 1].ber) {
      ++inversions;
      CHECK(records[i].ber < 1e-5);  // only Monte-Carlo noise may invert
    }
  }
  CHECK(inversions <= 1);
  CHECK(records.front().ber > 0.1);  // sane low-SNR endpoint
}

TEST_CASE("snr_at_ber: exact grid hit, interpolation, no crossing") {
  std::vector<BerRecord> records(3);
  records[0] = {0.0, 1e-2, 100, 10000, 0, 0, 0};
  records[1] = {2.0, 1e-3, 10, 10000, 0, 0, 0};
  records[2] = {4.0, 1e-4, 1, 10000, 0, 0, 0};
  CHECK(snr_at_ber(records, 1e-3).snr_db.value() == 2.0);

  // log-linear midpoint: 10^-2.5 at 2 dB, 10^-3.5 at 4 dB crosses 1e-3 at 3 dB
  records[1].ber = std::pow(10.0, -2.5);
  records[2].ber = std::pow(10.0, -3.5);
  records[2].snr_db = 4.0;
  CHECK(snr_at_ber(records, 1e-3).snr_db.value() == doctest::Approx(3.0).epsilon(1e-12));

  // flat curve never crosses
  for (auto& r : records) r.ber = 0.5;
  CHECK_FALSE(snr_at_ber(records, 1e-3).snr_db.has_value());

  // a zero tail is pinned to half an error before taking logs
  std::vector<BerRecord> tail(2);
  tail[0] = {0.0, 1e-2, 100, 10000, 0, 0, 0};
  tail[1] = {2.0, 0.0, 0, 10000, 0, 0, 0};
  const auto crossed = snr_at_ber(tail, 1e-3);
  REQUIRE(crossed.snr_db.has_value());
  CHECK(*crossed.snr_db > 0.0);
  CHECK(*crossed.snr_db < 2.0);

  CHECK_THROWS_AS(snr_at_ber(records, 0.0), std::invalid_argument);
}

TEST_CASE("aggregate_solver_stats") {
  SolveResult one;
  one.iterations = 5;
  one.halvings = 1;
  const auto [iters, halvings] = aggregate_solver_stats({one});
  CHECK(iters == 5.0);
  CHECK(halvings == 1.0);

  SolveResult two;
  two.iterations = 7;
  two.halvings = 0;
  const auto [i2, h2] = aggregate_solver_stats({one, two});
  CHECK(i2 == 6.0);
  CHECK(h2 == 0.5);

  CHECK_THROWS_AS(aggregate_solver_stats({}), std::invalid_argument);
}

TEST_CASE("precoder and bits labels round-trip") {
  for (const Precoder p : {Precoder::kGdmCec, Precoder::kQgdmCec, Precoder::kGpmRpc,
                           Precoder::kWf, Precoder::kWfCe, Precoder::kMlCe})
    CHECK(precoder_from_name(precoder_name(p)) == p);
  CHECK_THROWS_AS(precoder_from_name("zf"), std::invalid_argument);

  CHECK(order_from_label("inf") == PskOrder::unquantized());
  CHECK(order_from_label("3") == PskOrder::psk(3));
  CHECK_THROWS_AS(order_from_label("1"), std::invalid_argument);
  CHECK_THROWS_AS(order_from_label("9"), std::invalid_argument);
  CHECK_THROWS_AS(order_from_label("three"), std::invalid_argument);
}
