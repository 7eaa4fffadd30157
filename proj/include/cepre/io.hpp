#ifndef CEPRE_IO_HPP
#define CEPRE_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cepre/harness.hpp"

// Result serialization and the regression gate. ber.csv is the plot-ready
// artifact: fixed header, LF line endings, shortest round-trippable decimal
// for every floating-point field, so identical runs produce identical bytes.

namespace cepre::io {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kBerCsvHeader =
    "precoder,bits,snr_db,ber,bit_errors,bits_total,avg_iterations,avg_halvings,capped_fraction";

struct ResultSet {
  ExperimentConfig cfg;
  std::vector<BerRecord> records;
};

struct RunManifest {
  std::string version = kVersion;
  std::uint64_t master_seed = 0;
  std::vector<std::string> argv;
  nlohmann::json config;  // array of resolved run configs
  std::string ber_csv;
  std::string summary_json;
  std::string created_utc;
  double wall_seconds = 0.0;
};

// shortest decimal that parses back to the same double
std::string format_double(double value);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

std::string ber_csv_text(const std::vector<ResultSet>& results);
std::string summary_json_text(const std::vector<ResultSet>& results);

// writes ber.csv, summary.json and manifest.json under out_dir; fills the
// manifest's output paths and config echo
void emit_results(const std::vector<ResultSet>& results, RunManifest& manifest,
                  const std::filesystem::path& out_dir);

struct CsvRow {
  std::string precoder;
  std::string bits;
  BerRecord record;
};

std::vector<CsvRow> read_ber_csv(const std::filesystem::path& path);

struct CompareTolerances {
  double ber_rtol = 0.3;   // per-point relative BER deviation
  double snr_atol = 0.5;   // dB, on the interpolated SNR @ BER = 1e-3
  double iter_rtol = 0.5;  // relative, on per-table average iterations
  double min_ber = 1e-4;   // baseline points below this are Monte-Carlo noise
};

struct CompareReport {
  bool pass = true;
  double max_ber_rel_dev = 0.0;
  double max_snr_dev_db = 0.0;
  double max_iter_rel_dev = 0.0;
  int points_checked = 0;
  std::string text;  // human-readable per-deviation breakdown
};

CompareReport compare_ber_csv(const std::filesystem::path& baseline,
                              const std::filesystem::path& candidate,
                              const CompareTolerances& tol);

}  // namespace cepre::io

#endif  // CEPRE_IO_HPP
