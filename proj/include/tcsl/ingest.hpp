#pragma once

// Run-log and hardware-profile readers/writers.
//
// CSV columns: model_id,depth,params_m,budget_min,val_bpb,seed,tokens_per_sec
// (the last two may be empty). JSON: {"dataset_tokens": int?, "runs": [...]}
// with the same field names per record.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "tcsl/domain.hpp"
#include "tcsl/error.hpp"
#include "tcsl/hardware.hpp"

namespace tcsl {

enum class Severity { warning, error };

struct IngestIssue {
  Severity severity = Severity::error;
  std::optional<int> row;  // 1-based data row (header excluded)
  std::string message;
};

enum class RunFormat { csv, json };

struct ParseResult {
  std::optional<RunGrid> grid;  // withheld when any error issue exists
  std::vector<IngestIssue> issues;

  bool ok() const noexcept { return grid.has_value(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

/// Applies the grid invariants to candidate rows, turning violations into
/// issues instead of exceptions.
inline ParseResult finish(std::vector<std::pair<int, RunRecord>> rows, std::optional<std::int64_t> dataset_tokens,
                          std::vector<IngestIssue> issues) {
  std::map<int, std::pair<double, int>> depth_params;
  std::set<std::tuple<std::string, double, std::int64_t, bool>> keys;
  std::vector<RunRecord> accepted;
  for (auto& [row, rec] : rows) {
    const auto key = std::make_tuple(rec.model_id, std::round(rec.budget_min * 1e9) / 1e9, rec.seed.value_or(0), rec.seed.has_value());
    if (!keys.insert(key).second) {
      issues.push_back({Severity::error, row, "duplicate (model_id, budget_min, seed) for " + rec.model_id});
      continue;
    }
    auto [it, inserted] = depth_params.emplace(rec.depth, std::make_pair(rec.params_m, row));
    if (!inserted && it->second.first != rec.params_m) {
      issues.push_back({Severity::error, row,
                        "depth " + std::to_string(rec.depth) + " has params_m " + format_double(rec.params_m) +
                            " but row " + std::to_string(it->second.second) + " gave " + format_double(it->second.first)});
      continue;
    }
    accepted.push_back(std::move(rec));
  }
  if (dataset_tokens && *dataset_tokens <= 0) issues.push_back({Severity::error, std::nullopt, "dataset_tokens must be positive"});

  ParseResult out;
  const bool has_error = std::any_of(issues.begin(), issues.end(), [](const IngestIssue& i) { return i.severity == Severity::error; });
  if (accepted.empty() && !has_error) fail(ErrorKind::empty_input, "no valid run rows");
  if (!has_error) out.grid.emplace(std::move(accepted), dataset_tokens);
  out.issues = std::move(issues);
  return out;
}

/// Field-level checks shared by both formats. Returns an error message or empty.
inline std::string check_record(const RunRecord& r) {
  if (r.model_id.empty()) return "model_id is empty";
  if (r.depth < 1) return "depth must be >= 1";
  if (!(r.params_m > 0.0) || !std::isfinite(r.params_m)) return "params_m must be positive";
  if (!(r.budget_min > 0.0) || !std::isfinite(r.budget_min)) return "budget_min must be positive";
  if (!(r.val_bpb > 0.0) || !std::isfinite(r.val_bpb)) return "val_bpb must be positive";
  if (r.tokens_per_sec && !(*r.tokens_per_sec > 0.0)) return "tokens_per_sec must be positive";
  return {};
}

inline ParseResult parse_runs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) fail(ErrorKind::empty_input, "empty CSV input");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  static const std::vector<std::string> required{"model_id", "depth", "params_m", "budget_min", "val_bpb"};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& r : required) {
    if (!col.count(r)) fail(ErrorKind::invalid_argument, "CSV header is missing column '" + r + "'");
  }

  std::vector<IngestIssue> issues;
  std::vector<std::pair<int, RunRecord>> rows;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      issues.push_back({Severity::error, row, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size())});
      continue;
    }
    auto get = [&](const char* name) -> std::string_view {
      auto it = col.find(name);
      return it == col.end() ? std::string_view{} : std::string_view(f[it->second]);
    };
    RunRecord rec;
    rec.model_id = std::string(get("model_id"));
    const auto depth = parse_number<int>(get("depth"));
    const auto params = parse_number<double>(get("params_m"));
    const auto budget = parse_number<double>(get("budget_min"));
    const auto bpb = parse_number<double>(get("val_bpb"));
    if (!depth || !params || !budget || !bpb) {
      issues.push_back({Severity::error, row, "malformed numeric field"});
      continue;
    }
    rec.depth = *depth;
    rec.params_m = *params;
    rec.budget_min = *budget;
    rec.val_bpb = *bpb;
    if (!trim(get("seed")).empty()) {
      rec.seed = parse_number<std::int64_t>(get("seed"));
      if (!rec.seed) {
        issues.push_back({Severity::error, row, "malformed seed"});
        continue;
      }
    }
    if (!trim(get("tokens_per_sec")).empty()) {
      rec.tokens_per_sec = parse_number<double>(get("tokens_per_sec"));
      if (!rec.tokens_per_sec) {
        issues.push_back({Severity::error, row, "malformed tokens_per_sec"});
        continue;
      }
    }
    if (col.count("architecture") && !get("architecture").empty()) rec.architecture = std::string(get("architecture"));
    if (auto msg = check_record(rec); !msg.empty()) {
      issues.push_back({Severity::error, row, msg});
      continue;
    }
    rows.emplace_back(row, std::move(rec));
  }
  if (row == 0) fail(ErrorKind::empty_input, "CSV has a header but no rows");
  return finish(std::move(rows), std::nullopt, std::move(issues));
}

inline ParseResult parse_runs_json(const std::string& text) {
  if (trim(text).empty()) fail(ErrorKind::empty_input, "empty JSON input");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::invalid_argument, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array()) {
    fail(ErrorKind::invalid_argument, "JSON must be an object with a 'runs' array");
  }
  std::optional<std::int64_t> dataset_tokens;
  if (doc.contains("dataset_tokens") && !doc["dataset_tokens"].is_null()) {
    if (!doc["dataset_tokens"].is_number_integer()) fail(ErrorKind::invalid_argument, "dataset_tokens must be an integer");
    dataset_tokens = doc["dataset_tokens"].get<std::int64_t>();
  }
  if (doc["runs"].empty()) fail(ErrorKind::empty_input, "JSON 'runs' array is empty");

  std::vector<IngestIssue> issues;
  std::vector<std::pair<int, RunRecord>> rows;
  int row = 0;
  for (const auto& j : doc["runs"]) {
    ++row;
    try {
      RunRecord rec;
      rec.model_id = j.at("model_id").get<std::string>();
      rec.depth = j.at("depth").get<int>();
      rec.params_m = j.at("params_m").get<double>();
      rec.budget_min = j.at("budget_min").get<double>();
      rec.val_bpb = j.at("val_bpb").get<double>();
      if (j.contains("seed") && !j["seed"].is_null()) rec.seed = j["seed"].get<std::int64_t>();
      if (j.contains("tokens_per_sec") && !j["tokens_per_sec"].is_null()) rec.tokens_per_sec = j["tokens_per_sec"].get<double>();
      if (j.contains("architecture") && !j["architecture"].is_null()) rec.architecture = j["architecture"].get<std::string>();
      if (auto msg = check_record(rec); !msg.empty()) {
        issues.push_back({Severity::error, row, msg});
        continue;
      }
      rows.emplace_back(row, std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      issues.push_back({Severity::error, row, std::string("malformed record: ") + e.what()});
    }
  }
  return finish(std::move(rows), dataset_tokens, std::move(issues));
}

}  // namespace detail

inline ParseResult parse_runs(const std::string& text, RunFormat format) {
  return format == RunFormat::csv ? detail::parse_runs_csv(text) : detail::parse_runs_json(text);
}

inline ParseResult parse_runs(std::istream& in, RunFormat format) {
  if (!in) fail(ErrorKind::io, "unreadable input stream");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::io, "error while reading input stream");
  return parse_runs(text, format);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::io, "error reading '" + path + "'");
  return text;
}

/// Format from the file extension: .json is JSON, anything else CSV.
inline RunFormat format_for_path(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0 ? RunFormat::json : RunFormat::csv;
}

inline std::string serialize_runs(const RunGrid& grid, RunFormat format) {
  using detail::format_double;
  if (format == RunFormat::csv) {
    std::string out = "model_id,depth,params_m,budget_min,val_bpb,seed,tokens_per_sec\n";
    for (const auto& r : grid.records()) {
      out += detail::csv_escape(r.model_id) + "," + std::to_string(r.depth) + "," + format_double(r.params_m) + "," +
             format_double(r.budget_min) + "," + format_double(r.val_bpb) + "," +
             (r.seed ? std::to_string(*r.seed) : std::string{}) + "," +
             (r.tokens_per_sec ? format_double(*r.tokens_per_sec) : std::string{}) + "\n";
    }
    return out;
  }
  nlohmann::ordered_json doc;
  doc["dataset_tokens"] = grid.dataset_tokens() ? nlohmann::ordered_json(*grid.dataset_tokens()) : nlohmann::ordered_json(nullptr);
  doc["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : grid.records()) {
    nlohmann::ordered_json j;
    j["model_id"] = r.model_id;
    j["depth"] = r.depth;
    j["params_m"] = r.params_m;
    j["budget_min"] = r.budget_min;
    j["val_bpb"] = r.val_bpb;
    j["seed"] = r.seed ? nlohmann::ordered_json(*r.seed) : nlohmann::ordered_json(nullptr);
    j["tokens_per_sec"] = r.tokens_per_sec ? nlohmann::ordered_json(*r.tokens_per_sec) : nlohmann::ordered_json(nullptr);
    j["architecture"] = r.architecture;
    doc["runs"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

/// Hardware profile JSON: {"name", "vram_gb"?, "points": [[params_m, tokens_per_sec, exact?], ...]}.
/// A CSV body with a params_m,tokens_per_sec header is also accepted.
inline HardwareProfile parse_hardware_profile(const std::string& text) {
  HardwareProfile p;
  const auto body = detail::trim(text);
  if (body.empty()) fail(ErrorKind::insufficient_data, "empty hardware profile");
  if (body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
      p.name = doc.value("name", std::string("custom"));
      if (doc.contains("vram_gb") && !doc["vram_gb"].is_null()) p.vram_gb = doc["vram_gb"].get<double>();
      for (const auto& pt : doc.at("points")) {
        if (!pt.is_array() || pt.size() < 2) fail(ErrorKind::invalid_argument, "profile point must be [params_m, tokens_per_sec]");
        p.points.push_back({pt[0].get<double>(), pt[1].get<double>(), pt.size() < 3 || pt[2].get<bool>()});
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::invalid_argument, std::string("malformed hardware profile: ") + e.what());
    }
  } else {
    p.name = "custom";
    std::istringstream in{std::string(body)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (detail::trim(line).empty()) continue;
      const auto f = detail::split_csv_line(line);
      if (header) {
        header = false;
        if (!detail::parse_number<double>(f[0])) continue;
      }
      if (f.size() < 2) fail(ErrorKind::invalid_argument, "profile row needs params_m,tokens_per_sec");
      const auto n = detail::parse_number<double>(f[0]);
      const auto t = detail::parse_number<double>(f[1]);
      if (!n || !t) fail(ErrorKind::invalid_argument, "malformed profile row '" + line + "'");
      const bool exact = f.size() < 3 || f[2].empty() || f[2] == "true" || f[2] == "1";
      p.points.push_back({*n, *t, exact});
    }
  }
  if (p.points.size() < 2) fail(ErrorKind::insufficient_data, "hardware profile needs >= 2 points");
  return normalize_profile(std::move(p));
}

inline std::string serialize_hardware_profile(const HardwareProfile& p) {
  nlohmann::ordered_json doc;
  doc["name"] = p.name;
  doc["vram_gb"] = p.vram_gb ? nlohmann::ordered_json(*p.vram_gb) : nlohmann::ordered_json(nullptr);
  doc["points"] = nlohmann::ordered_json::array();
  for (const auto& pt : p.points) doc["points"].push_back({pt.params_m, pt.tokens_per_sec, pt.exact});
  return doc.dump(2) + "\n";
}

}  // namespace tcsl
