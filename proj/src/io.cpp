#include "cepre/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cepre::io {

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("bad ") + what + " value '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("bad ") + what + " value '" + s + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 40> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return nlohmann::json{{"antennas", cfg.antennas},
                        {"users", cfg.users},
                        {"bits", bits_label(cfg.order)},
                        {"precoder", precoder_name(cfg.precoder)},
                        {"snr_grid_db", cfg.snr_grid_db},
                        {"channels", cfg.channels},
                        {"symbols", cfg.symbols_per_channel},
                        {"seed", cfg.master_seed},
                        {"mu0", cfg.solver.mu0},
                        {"epsilon", cfg.solver.epsilon},
                        {"alpha", cfg.solver.alpha},
                        {"max_iterations", cfg.solver.max_iterations},
                        {"threads", cfg.threads}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.antennas = j.at("antennas").get<int>();
  cfg.users = j.at("users").get<int>();
  cfg.order = order_from_label(j.at("bits").get<std::string>());
  cfg.precoder = precoder_from_name(j.at("precoder").get<std::string>());
  cfg.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
  cfg.channels = j.at("channels").get<int>();
  cfg.symbols_per_channel = j.at("symbols").get<int>();
  cfg.master_seed = j.at("seed").get<std::uint64_t>();
  cfg.solver.mu0 = j.at("mu0").get<double>();
  cfg.solver.epsilon = j.at("epsilon").get<double>();
  cfg.solver.alpha = j.at("alpha").get<double>();
  cfg.solver.max_iterations = j.at("max_iterations").get<int>();
  cfg.threads = j.at("threads").get<int>();
  return resolve(cfg);
}

std::string ber_csv_text(const std::vector<ResultSet>& results) {
  std::string text = kBerCsvHeader;
  text += '\n';
  for (const auto& set : results) {
    const std::string precoder = precoder_name(set.cfg.precoder);
    const std::string bits = bits_label(set.cfg.order);
    for (const auto& rec : set.records) {
      text += precoder;
      text += ',';
      text += bits;
      text += ',';
      text += format_double(rec.snr_db);
      text += ',';
      text += format_double(rec.ber);
      text += ',';
      text += std::to_string(rec.bit_errors);
      text += ',';
      text += std::to_string(rec.bits_total);
      text += ',';
      text += format_double(rec.avg_iterations);
      text += ',';
      text += format_double(rec.avg_halvings);
      text += ',';
      text += format_double(rec.capped_fraction);
      text += '\n';
    }
  }
  return text;
}

std::string summary_json_text(const std::vector<ResultSet>& results) {
  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["results"] = nlohmann::json::array();
  for (const auto& set : results) {
    nlohmann::json entry;
    entry["precoder"] = precoder_name(set.cfg.precoder);
    entry["bits"] = bits_label(set.cfg.order);
    const SnrAtBer crossing = snr_at_ber(set.records, 1e-3);
    entry["snr_at_ber_1e-3"] =
        crossing.snr_db ? nlohmann::json(*crossing.snr_db) : nlohmann::json(nullptr);
    entry["records"] = nlohmann::json::array();
    for (const auto& rec : set.records) {
      entry["records"].push_back({{"snr_db", rec.snr_db},
                                  {"ber", rec.ber},
                                  {"bit_errors", rec.bit_errors},
                                  {"bits_total", rec.bits_total},
                                  {"avg_iterations", rec.avg_iterations},
                                  {"avg_halvings", rec.avg_halvings},
                                  {"capped_fraction", rec.capped_fraction}});
    }
    summary["results"].push_back(std::move(entry));
  }
  return summary.dump(2) + "\n";
}

void emit_results(const std::vector<ResultSet>& results, RunManifest& manifest,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  manifest.ber_csv = "ber.csv";
  manifest.summary_json = "summary.json";
  manifest.config = nlohmann::json::array();
  for (const auto& set : results) manifest.config.push_back(config_to_json(set.cfg));

  write_text_file(out_dir / manifest.ber_csv, ber_csv_text(results));
  write_text_file(out_dir / manifest.summary_json, summary_json_text(results));

  nlohmann::json m;
  m["version"] = manifest.version;
  m["master_seed"] = manifest.master_seed;
  m["argv"] = manifest.argv;
  m["config"] = manifest.config;
  m["outputs"] = {{"ber_csv", manifest.ber_csv}, {"summary_json", manifest.summary_json}};
  m["created_utc"] = manifest.created_utc;
  m["wall_seconds"] = manifest.wall_seconds;
  write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<CsvRow> read_ber_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBerCsvHeader)
    throw std::runtime_error("CSV schema mismatch in " + path.string() + ": unexpected header '" + line + "'");

  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 9)
      throw std::runtime_error("CSV schema mismatch in " + path.string() + ": bad row '" + line + "'");
    CsvRow row;
    row.precoder = fields[0];
    row.bits = fields[1];
    row.record.snr_db = parse_double(fields[2], "snr_db");
    row.record.ber = parse_double(fields[3], "ber");
    row.record.bit_errors = parse_int(fields[4], "bit_errors");
    row.record.bits_total = parse_int(fields[5], "bits_total");
    row.record.avg_iterations = parse_double(fields[6], "avg_iterations");
    row.record.avg_halvings = parse_double(fields[7], "avg_halvings");
    row.record.capped_fraction = parse_double(fields[8], "capped_fraction");
    rows.push_back(std::move(row));
  }
  return rows;
}

CompareReport compare_ber_csv(const std::filesystem::path& baseline,
                              const std::filesystem::path& candidate,
                              const CompareTolerances& tol) {
  const auto base_rows = read_ber_csv(baseline);
  const auto cand_rows = read_ber_csv(candidate);

  using TableKey = std::pair<std::string, std::string>;  // (precoder, bits)
  std::map<TableKey, std::vector<BerRecord>> base_tables, cand_tables;
  std::map<std::string, BerRecord> cand_points;
  for (const auto& row : cand_rows) {
    cand_tables[{row.precoder, row.bits}].push_back(row.record);
    cand_points[row.precoder + "|" + row.bits + "|" + format_double(row.record.snr_db)] =
        row.record;
  }
  for (const auto& row : base_rows) base_tables[{row.precoder, row.bits}].push_back(row.record);

  CompareReport report;
  std::ostringstream text;

  auto fail = [&](const std::string& why) {
    report.pass = false;
    text << "FAIL " << why << "\n";
  };

  for (const auto& row : base_rows) {
    const std::string key =
        row.precoder + "|" + row.bits + "|" + format_double(row.record.snr_db);
    const auto it = cand_points.find(key);
    if (it == cand_points.end()) {
      fail("missing point " + key + " in candidate");
      continue;
    }
    if (row.record.ber < tol.min_ber) continue;  // below the comparison floor
    const double dev = std::abs(it->second.ber - row.record.ber) / row.record.ber;
    report.max_ber_rel_dev = std::max(report.max_ber_rel_dev, dev);
    ++report.points_checked;
    if (dev > tol.ber_rtol)
      fail("ber " + key + ": baseline " + format_double(row.record.ber) + " candidate " +
           format_double(it->second.ber) + " rel dev " + format_double(dev) + " > " +
           format_double(tol.ber_rtol));
  }

  for (const auto& [key, base_records] : base_tables) {
    const auto it = cand_tables.find(key);
    if (it == cand_tables.end()) continue;  // already reported point-by-point
    const std::string label = key.first + "/" + key.second;

    const SnrAtBer base_cross = snr_at_ber(base_records, 1e-3);
    const SnrAtBer cand_cross = snr_at_ber(it->second, 1e-3);
    if (base_cross.snr_db && cand_cross.snr_db) {
      const double dev = std::abs(*cand_cross.snr_db - *base_cross.snr_db);
      report.max_snr_dev_db = std::max(report.max_snr_dev_db, dev);
      if (dev > tol.snr_atol)
        fail("snr@1e-3 " + label + ": baseline " + format_double(*base_cross.snr_db) +
             " dB candidate " + format_double(*cand_cross.snr_db) + " dB dev " +
             format_double(dev) + " > " + format_double(tol.snr_atol));
    } else if (base_cross.snr_db && !cand_cross.snr_db) {
      fail("snr@1e-3 " + label + ": candidate curve never crosses 1e-3");
    }

    double base_iter = 0.0, cand_iter = 0.0;
    for (const auto& r : base_records) base_iter += r.avg_iterations;
    for (const auto& r : it->second) cand_iter += r.avg_iterations;
    base_iter /= base_records.size();
    cand_iter /= it->second.size();
    if (base_iter > 0.0) {
      const double dev = std::abs(cand_iter - base_iter) / base_iter;
      report.max_iter_rel_dev = std::max(report.max_iter_rel_dev, dev);
      if (dev > tol.iter_rtol)
        fail("avg iterations " + label + ": baseline " + format_double(base_iter) +
             " candidate " + format_double(cand_iter) + " rel dev " + format_double(dev) +
             " > " + format_double(tol.iter_rtol));
    }
  }

  text << (report.pass ? "PASS" : "FAIL") << ": " << report.points_checked
       << " BER points checked, max rel dev " << format_double(report.max_ber_rel_dev)
       << ", max snr@1e-3 dev " << format_double(report.max_snr_dev_db) << " dB\n";
  report.text = text.str();
  return report;
}

}  // namespace cepre::io
