// Command-line front end for the detection pipeline: corpus generation,
// training, per-window classification, telemetry attribution, and the
// evaluation reports. Every command is a deterministic function of
// (inputs, effective config); each output file embeds the config hash and
// seed so a rerun can be verified byte for byte.
//
// Exit codes: 0 success, 1 usage, 2 io, 3 schema, 4 training, 5 internal.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcdetect/classifiers.hpp"
#include "rcdetect/csv.hpp"
#include "rcdetect/errors.hpp"
#include "rcdetect/evaluate.hpp"
#include "rcdetect/features.hpp"
#include "rcdetect/ingest.hpp"
#include "rcdetect/metrics.hpp"
#include "rcdetect/model_io.hpp"
#include "rcdetect/synthgen.hpp"
#include "rcdetect/telemetry.hpp"
#include "rcdetect/traffic.hpp"

namespace rc = rcdetect;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Effective run configuration. Defaults < config file < command-line flags.

struct PathSet {
  std::optional<std::string> packets;     // input capture (.pcap or packet CSV)
  std::optional<std::string> telemetry;   // input telemetry CSV
  std::optional<std::string> truth;       // input ground-truth CSV
  std::optional<std::string> model;       // input model bundle
  std::optional<std::string> verdicts;    // input stage-1 verdict CSV
  std::optional<std::string> model_out;   // output model bundle
  std::optional<std::string> report_out;  // output training report
  std::optional<std::string> out;         // single output file
  std::optional<std::string> out_prefix;  // output file prefix
  std::optional<std::string> out_dir;     // output directory
};

struct RunConfig {
  uint64_t seed = 42;
  uint32_t window_secs = 2;  // window length; 2, 3, 5, or 10

  // Scenario used by `generate`.
  uint32_t devices = 5;
  uint32_t duration_secs = 600;
  double normal_rate_pps = 50.0;
  double attack_rate_pps = 400.0;
  double telemetry_period_secs = 0.5;
  double energy_mean_mw = 100.0;
  double energy_stddev_mw = 5.0;
  double memory_mean_kib = 2048.0;
  double memory_stddev_kib = 40.0;
  std::optional<std::vector<rc::AttackSpan>> schedule;  // absent = built-in default

  // Model selection and hyperparameters.
  std::string protocol = "general";  // tcp | udp | general
  std::string classifier = "rf";     // rf | svm | dt | knn | nb | auto
  uint32_t n_trees = 25;
  uint32_t max_depth = 12;
  uint32_t min_leaf = 1;
  uint32_t feature_subsample = 0;  // 0 = all features at every split
  double svm_c = 1.0;
  uint32_t svm_epochs = 50;
  uint32_t knn_k = 5;
  std::vector<std::string> evaluate_kinds = {"rf", "svm"};

  // Splits and sweeps.
  double train_fraction = 0.7;
  uint32_t folds = 5;
  uint32_t sweep_points = 20;

  // Attribution thresholds.
  double tau_energy = 3.0;
  double tau_memory = 3.0;

  // Reporting.
  bool paper_literal = false;

  PathSet paths;
};

// Flags staged separately so only explicitly given ones override the file.
struct FlagOverrides {
  std::optional<std::string> config_path;
  std::optional<uint64_t> seed;
  std::optional<uint32_t> window_secs;
  std::optional<std::string> protocol;
  std::optional<std::string> classifier;
  bool paper_literal = false;
  std::optional<double> tau_energy;
  std::optional<double> tau_memory;
  std::optional<uint32_t> folds;
  PathSet paths;
};

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

// ---------------------------------------------------------------------------
// JSON <-> RunConfig. Unknown keys are rejected so typos cannot silently
// fall back to defaults.

uint64_t get_json_u64(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0)
    return static_cast<uint64_t>(v.get<int64_t>());
  throw rc::ConfigError("config key \"" + key + "\" must be a non-negative integer");
}

uint32_t get_json_u32(const json& v, const std::string& key) {
  uint64_t n = get_json_u64(v, key);
  if (n > 0xffffffffull)
    throw rc::ConfigError("config key \"" + key + "\" exceeds the 32-bit range");
  return static_cast<uint32_t>(n);
}

double get_json_num(const json& v, const std::string& key) {
  if (!v.is_number()) throw rc::ConfigError("config key \"" + key + "\" must be a number");
  return v.get<double>();
}

std::string get_json_str(const json& v, const std::string& key) {
  if (!v.is_string()) throw rc::ConfigError("config key \"" + key + "\" must be a string");
  return v.get<std::string>();
}

bool get_json_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw rc::ConfigError("config key \"" + key + "\" must be a boolean");
  return v.get<bool>();
}

std::vector<rc::AttackSpan> parse_schedule_json(const json& arr) {
  if (!arr.is_array()) throw rc::ConfigError("config key \"schedule\" must be an array or null");
  std::vector<rc::AttackSpan> spans;
  spans.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_object()) throw rc::ConfigError("schedule entries must be objects");
    rc::AttackSpan span;
    bool have_kind = false, have_start = false, have_end = false, have_device = false;
    for (const auto& [key, val] : e.items()) {
      if (key == "kind") {
        span.kind = rc::attack_kind_from_string(get_json_str(val, "schedule.kind"));
        have_kind = true;
      } else if (key == "start_secs") {
        span.start_s = get_json_u32(val, "schedule.start_secs");
        have_start = true;
      } else if (key == "end_secs") {
        span.end_s = get_json_u32(val, "schedule.end_secs");
        have_end = true;
      } else if (key == "device") {
        span.device = get_json_u32(val, "schedule.device");
        have_device = true;
      } else {
        throw rc::ConfigError("unknown schedule key \"" + key + "\"");
      }
    }
    if (!have_kind || !have_start || !have_end || !have_device)
      throw rc::ConfigError("schedule entries need kind, start_secs, end_secs, and device");
    spans.push_back(span);
  }
  return spans;
}

void merge_paths_json(PathSet& paths, const json& obj) {
  if (!obj.is_object()) throw rc::ConfigError("config key \"paths\" must be an object");
  for (const auto& [key, val] : obj.items()) {
    std::string v = get_json_str(val, "paths." + key);
    if (key == "packets")
      paths.packets = v;
    else if (key == "telemetry")
      paths.telemetry = v;
    else if (key == "truth")
      paths.truth = v;
    else if (key == "model")
      paths.model = v;
    else if (key == "verdicts")
      paths.verdicts = v;
    else if (key == "model_out")
      paths.model_out = v;
    else if (key == "report_out")
      paths.report_out = v;
    else if (key == "out")
      paths.out = v;
    else if (key == "out_prefix")
      paths.out_prefix = v;
    else if (key == "out_dir")
      paths.out_dir = v;
    else
      throw rc::ConfigError("unknown config key \"paths." + key + "\"");
  }
}

void merge_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw rc::ConfigError("config root must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    if (key == "seed")
      cfg.seed = get_json_u64(val, key);
    else if (key == "window_secs")
      cfg.window_secs = get_json_u32(val, key);
    else if (key == "devices")
      cfg.devices = get_json_u32(val, key);
    else if (key == "duration_secs")
      cfg.duration_secs = get_json_u32(val, key);
    else if (key == "normal_rate_pps")
      cfg.normal_rate_pps = get_json_num(val, key);
    else if (key == "attack_rate_pps")
      cfg.attack_rate_pps = get_json_num(val, key);
    else if (key == "telemetry_period_secs")
      cfg.telemetry_period_secs = get_json_num(val, key);
    else if (key == "energy_mean_mw")
      cfg.energy_mean_mw = get_json_num(val, key);
    else if (key == "energy_stddev_mw")
      cfg.energy_stddev_mw = get_json_num(val, key);
    else if (key == "memory_mean_kib")
      cfg.memory_mean_kib = get_json_num(val, key);
    else if (key == "memory_stddev_kib")
      cfg.memory_stddev_kib = get_json_num(val, key);
    else if (key == "schedule")
      cfg.schedule = val.is_null() ? std::nullopt
                                   : std::optional<std::vector<rc::AttackSpan>>(
                                         parse_schedule_json(val));
    else if (key == "protocol")
      cfg.protocol = get_json_str(val, key);
    else if (key == "classifier")
      cfg.classifier = get_json_str(val, key);
    else if (key == "n_trees")
      cfg.n_trees = get_json_u32(val, key);
    else if (key == "max_depth")
      cfg.max_depth = get_json_u32(val, key);
    else if (key == "min_leaf")
      cfg.min_leaf = get_json_u32(val, key);
    else if (key == "feature_subsample")
      cfg.feature_subsample = get_json_u32(val, key);
    else if (key == "svm_c")
      cfg.svm_c = get_json_num(val, key);
    else if (key == "svm_epochs")
      cfg.svm_epochs = get_json_u32(val, key);
    else if (key == "knn_k")
      cfg.knn_k = get_json_u32(val, key);
    else if (key == "evaluate_kinds") {
      if (!val.is_array() || val.empty())
        throw rc::ConfigError("config key \"evaluate_kinds\" must be a non-empty array");
      cfg.evaluate_kinds.clear();
      for (const auto& e : val) cfg.evaluate_kinds.push_back(get_json_str(e, key));
    } else if (key == "train_fraction")
      cfg.train_fraction = get_json_num(val, key);
    else if (key == "folds")
      cfg.folds = get_json_u32(val, key);
    else if (key == "sweep_points")
      cfg.sweep_points = get_json_u32(val, key);
    else if (key == "tau_energy")
      cfg.tau_energy = get_json_num(val, key);
    else if (key == "tau_memory")
      cfg.tau_memory = get_json_num(val, key);
    else if (key == "paper_literal")
      cfg.paper_literal = get_json_bool(val, key);
    else if (key == "paths")
      merge_paths_json(cfg.paths, val);
    else
      throw rc::ConfigError("unknown config key \"" + key + "\"");
  }
}

json paths_to_json(const PathSet& p) {
  json out = json::object();
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) out[key] = *v;
  };
  put("packets", p.packets);
  put("telemetry", p.telemetry);
  put("truth", p.truth);
  put("model", p.model);
  put("verdicts", p.verdicts);
  put("model_out", p.model_out);
  put("report_out", p.report_out);
  put("out", p.out);
  put("out_prefix", p.out_prefix);
  put("out_dir", p.out_dir);
  return out;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["window_secs"] = cfg.window_secs;
  j["devices"] = cfg.devices;
  j["duration_secs"] = cfg.duration_secs;
  j["normal_rate_pps"] = cfg.normal_rate_pps;
  j["attack_rate_pps"] = cfg.attack_rate_pps;
  j["telemetry_period_secs"] = cfg.telemetry_period_secs;
  j["energy_mean_mw"] = cfg.energy_mean_mw;
  j["energy_stddev_mw"] = cfg.energy_stddev_mw;
  j["memory_mean_kib"] = cfg.memory_mean_kib;
  j["memory_stddev_kib"] = cfg.memory_stddev_kib;
  if (cfg.schedule) {
    json arr = json::array();
    for (const auto& s : *cfg.schedule) {
      json e;
      e["kind"] = rc::to_string(s.kind);
      e["start_secs"] = s.start_s;
      e["end_secs"] = s.end_s;
      e["device"] = s.device;
      arr.push_back(std::move(e));
    }
    j["schedule"] = std::move(arr);
  } else {
    j["schedule"] = nullptr;
  }
  j["protocol"] = cfg.protocol;
  j["classifier"] = cfg.classifier;
  j["n_trees"] = cfg.n_trees;
  j["max_depth"] = cfg.max_depth;
  j["min_leaf"] = cfg.min_leaf;
  j["feature_subsample"] = cfg.feature_subsample;
  j["svm_c"] = cfg.svm_c;
  j["svm_epochs"] = cfg.svm_epochs;
  j["knn_k"] = cfg.knn_k;
  j["evaluate_kinds"] = cfg.evaluate_kinds;
  j["train_fraction"] = cfg.train_fraction;
  j["folds"] = cfg.folds;
  j["sweep_points"] = cfg.sweep_points;
  j["tau_energy"] = cfg.tau_energy;
  j["tau_memory"] = cfg.tau_memory;
  j["paper_literal"] = cfg.paper_literal;
  j["paths"] = paths_to_json(cfg.paths);
  return j;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.window_secs != 2 && cfg.window_secs != 3 && cfg.window_secs != 5 &&
      cfg.window_secs != 10)
    throw rc::ConfigError("window_secs must be one of 2, 3, 5, 10");
  if (cfg.protocol != "tcp" && cfg.protocol != "udp" && cfg.protocol != "general")
    throw rc::ConfigError("protocol must be tcp, udp, or general");
  static const std::vector<std::string> kinds = {"rf", "svm", "dt", "knn", "nb", "auto"};
  if (std::find(kinds.begin(), kinds.end(), cfg.classifier) == kinds.end())
    throw rc::ConfigError("classifier must be rf, svm, dt, knn, nb, or auto");
  for (const auto& k : cfg.evaluate_kinds)
    if (k == "auto" || std::find(kinds.begin(), kinds.end(), k) == kinds.end())
      throw rc::ConfigError("evaluate_kinds entries must be concrete classifiers (rf, svm, dt, knn, nb)");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw rc::ConfigError("train_fraction must lie strictly between 0 and 1");
  if (cfg.folds < 2) throw rc::ConfigError("folds must be at least 2");
  if (cfg.sweep_points < 1) throw rc::ConfigError("sweep_points must be at least 1");
  if (!(cfg.tau_energy > 0.0) || !(cfg.tau_memory > 0.0))
    throw rc::ConfigError("attribution thresholds must be positive");
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rc::IoError("cannot open config file \"" + path + "\"");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw rc::ConfigError("config file \"" + path + "\": " + one_line(e.what()));
  }
}

// Resolution order: defaults, then the config file, then explicit flags.
RunConfig resolve_config(const FlagOverrides& flags) {
  RunConfig cfg;
  if (flags.config_path) merge_config_json(cfg, load_json_file(*flags.config_path));
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.window_secs) cfg.window_secs = *flags.window_secs;
  if (flags.protocol) cfg.protocol = *flags.protocol;
  if (flags.classifier) cfg.classifier = *flags.classifier;
  if (flags.paper_literal) cfg.paper_literal = true;
  if (flags.tau_energy) cfg.tau_energy = *flags.tau_energy;
  if (flags.tau_memory) cfg.tau_memory = *flags.tau_memory;
  if (flags.folds) cfg.folds = *flags.folds;
  auto take = [](std::optional<std::string>& dst, const std::optional<std::string>& src) {
    if (src) dst = src;
  };
  take(cfg.paths.packets, flags.paths.packets);
  take(cfg.paths.telemetry, flags.paths.telemetry);
  take(cfg.paths.truth, flags.paths.truth);
  take(cfg.paths.model, flags.paths.model);
  take(cfg.paths.verdicts, flags.paths.verdicts);
  take(cfg.paths.model_out, flags.paths.model_out);
  take(cfg.paths.report_out, flags.paths.report_out);
  take(cfg.paths.out, flags.paths.out);
  take(cfg.paths.out_prefix, flags.paths.out_prefix);
  take(cfg.paths.out_dir, flags.paths.out_dir);
  validate_config(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Config hash + output provenance.

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(cfg).dump())));
  return buf;
}

std::string provenance_line(const RunConfig& cfg) {
  return "cfg_hash=" + config_hash(cfg) + " seed=" + std::to_string(cfg.seed);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw rc::IoError("cannot open \"" + path + "\" for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw rc::IoError("short write to \"" + path + "\"");
}

void write_csv_file(const std::string& path, const rc::CsvTable& table, const RunConfig& cfg) {
  std::ostringstream buf;
  rc::write_csv(buf, table, {provenance_line(cfg)});
  write_text_file(path, buf.str());
}

// Every command leaves a snapshot of the exact configuration it ran with.
void write_config_snapshot(const std::string& path, const std::string& command,
                           const RunConfig& cfg) {
  json j;
  j["cfg_hash"] = config_hash(cfg);
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["config"] = config_to_json(cfg);
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared plumbing.

const std::string& require_path(const std::optional<std::string>& p, const char* flag,
                                const char* key, const char* command) {
  if (!p)
    throw rc::UsageError(std::string(command) + " needs " + flag +
                         " (or config key \"paths." + key + "\")");
  return *p;
}

std::string norm_path(const std::string& p) {
  return std::filesystem::absolute(std::filesystem::path(p)).lexically_normal().string();
}

// Commands never mutate their inputs, so writing over one is refused.
void refuse_overwriting_inputs(const std::vector<std::string>& inputs,
                               const std::vector<std::string>& outputs) {
  for (const auto& o : outputs)
    for (const auto& i : inputs)
      if (norm_path(o) == norm_path(i))
        throw rc::UsageError("output path \"" + o + "\" would overwrite input \"" + i + "\"");
}

bool looks_like_pcap(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4) return false;
  const uint8_t a = bytes[0], b = bytes[1], c = bytes[2], d = bytes[3];
  if (a == 0xa1 && b == 0xb2 && c == 0xc3 && d == 0xd4) return true;
  if (a == 0xd4 && b == 0xc3 && c == 0xb2 && d == 0xa1) return true;
  if (a == 0x0a && b == 0x0d && c == 0x0d && d == 0x0a) return true;  // pcapng: rejected later
  return false;
}

// Capture ingest: pcap by magic, packet CSV otherwise; then noise removal.
rc::RawDataset load_capture(const std::string& path) {
  auto bytes = rc::read_binary_file(path);
  rc::RawDataset raw;
  if (looks_like_pcap(bytes)) {
    raw = rc::parse_pcap(bytes, path);
  } else {
    std::string text(bytes.begin(), bytes.end());
    std::istringstream in(text);
    raw = rc::parse_packet_csv(in, {}, path);
  }
  return rc::clean_dataset(raw);
}

// Windows are aligned to absolute multiples of the window length, so every
// run over the same capture lands on the same grid regardless of which
// packet happens to come first.
uint64_t grid_epoch(const std::vector<rc::PacketRecord>& rows, uint64_t window_us) {
  if (rows.empty()) throw rc::EmptyInputError("capture contains no usable packets");
  uint64_t min_ts = rows.front().timestamp_us;
  for (const auto& r : rows) min_ts = std::min(min_ts, r.timestamp_us);
  return (min_ts / window_us) * window_us;
}

struct WindowedCapture {
  std::vector<rc::WindowSample> samples;
  uint64_t epoch_us = 0;
  uint64_t window_us = 0;
  std::size_t packet_count = 0;
  uint64_t dropped = 0;
};

WindowedCapture windowed_capture(const RunConfig& cfg, const std::string& path) {
  rc::RawDataset ds = load_capture(path);
  WindowedCapture wc;
  wc.window_us = static_cast<uint64_t>(cfg.window_secs) * 1'000'000ull;
  wc.epoch_us = grid_epoch(ds.rows, wc.window_us);
  wc.samples = rc::corpus_window_samples(ds.rows, wc.window_us, wc.epoch_us);
  wc.packet_count = ds.rows.size();
  wc.dropped = ds.total_dropped();
  return wc;
}

rc::Label parse_label(const std::string& s) {
  if (s == "normal") return rc::Label::NORMAL;
  if (s == "attacked") return rc::Label::ATTACKED;
  throw rc::ParseError("unknown label \"" + s + "\" (expected normal or attacked)");
}

// Ground truth keyed by (device, window start): one per-protocol label pair.
struct TruthEntry {
  rc::Label tcp = rc::Label::NORMAL;
  rc::Label udp = rc::Label::NORMAL;
};
using TruthMap = std::map<std::pair<std::string, uint64_t>, TruthEntry>;

TruthMap load_truth(const std::string& path) {
  auto bytes = rc::read_binary_file(path);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  rc::CsvTable t = rc::read_csv(in);
  auto require = [&](const char* name) {
    int idx = t.column(name);
    if (idx < 0)
      throw rc::SchemaError("truth CSV \"" + path + "\" lacks column \"" + name + "\"");
    return idx;
  };
  int c_dev = require("device_id");
  int c_start = require("window_start_us");
  int c_tcp = require("tcp_label");
  int c_udp = require("udp_label");
  std::size_t need = static_cast<std::size_t>(std::max({c_dev, c_start, c_tcp, c_udp})) + 1;

  TruthMap truth;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    if (row.size() < need)
      throw rc::ParseError("truth row " + std::to_string(i) + " has " +
                           std::to_string(row.size()) + " fields, needs " +
                           std::to_string(need));
    std::pair<std::string, uint64_t> key{row[c_dev],
                                         rc::parse_u64_field(row[c_start], "window_start_us")};
    TruthEntry entry{parse_label(row[c_tcp]), parse_label(row[c_udp])};
    if (!truth.emplace(key, entry).second)
      throw rc::SchemaError("truth CSV repeats device \"" + key.first + "\" window " +
                            std::to_string(key.second));
  }
  if (truth.empty()) throw rc::EmptyInputError("truth CSV \"" + path + "\" has no rows");
  return truth;
}

// Labeled table for one model slot, labels joined from the truth file.
rc::AssembledData assemble_with_truth(const std::vector<rc::WindowSample>& samples,
                                      const TruthMap& truth, rc::ModelProtocol slot) {
  rc::AssembledData out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const rc::WindowSample& s = samples[i];
    if (slot == rc::ModelProtocol::TCP && s.protocol != rc::Protocol::TCP) continue;
    if (slot == rc::ModelProtocol::UDP && s.protocol != rc::Protocol::UDP) continue;
    auto it = truth.find({s.window.device_id, s.window.start_us});
    if (it == truth.end())
      throw rc::SchemaError("no ground-truth row for device \"" + s.window.device_id +
                            "\" window starting at " + std::to_string(s.window.start_us));
    out.data.x.push_back(slot == rc::ModelProtocol::GENERAL
                             ? rc::combined_row(s.features, s.protocol)
                             : s.features.to_row());
    out.data.y.push_back(s.protocol == rc::Protocol::TCP ? it->second.tcp : it->second.udp);
    out.sample_index.push_back(i);
  }
  return out;
}

rc::ScenarioConfig scenario_of(const RunConfig& cfg) {
  rc::ScenarioConfig sc;
  sc.seed = cfg.seed;
  sc.devices = cfg.devices;
  sc.duration_s = cfg.duration_secs;
  sc.window_s = cfg.window_secs;
  sc.normal_rate_pps = cfg.normal_rate_pps;
  sc.attack_rate_pps = cfg.attack_rate_pps;
  sc.telemetry_period_s = cfg.telemetry_period_secs;
  sc.energy_mean_mw = cfg.energy_mean_mw;
  sc.energy_stddev_mw = cfg.energy_stddev_mw;
  sc.memory_mean_kib = cfg.memory_mean_kib;
  sc.memory_stddev_kib = cfg.memory_stddev_kib;
  sc.schedule = cfg.schedule;
  return sc;
}

rc::ModelSpec spec_of(const RunConfig& cfg, rc::ModelKind kind) {
  rc::ModelSpec s;
  s.kind = kind;
  s.n_trees = cfg.n_trees;
  s.max_depth = cfg.max_depth;
  s.min_leaf = cfg.min_leaf;
  s.feature_subsample = cfg.feature_subsample;
  s.C = cfg.svm_c;
  s.epochs = cfg.svm_epochs;
  s.k = cfg.knn_k;
  return s;
}

rc::ModelKind concrete_classifier(const RunConfig& cfg, const char* command) {
  if (cfg.classifier == "auto")
    throw rc::ConfigError(std::string(command) +
                          " needs a concrete classifier (rf, svm, dt, knn, or nb), not auto");
  return rc::model_kind_from_string(cfg.classifier);
}

constexpr std::array<rc::ModelKind, 5> kAllKinds = {rc::ModelKind::RF, rc::ModelKind::SVM,
                                                    rc::ModelKind::DT, rc::ModelKind::KNN,
                                                    rc::ModelKind::NB};

// Trains the configured classifier; "auto" trains every kind on a holdout
// split and keeps the most accurate candidate on the held-out part.
rc::TrainedModel train_configured(const RunConfig& cfg, const rc::LabeledDataset& data,
                                  rc::ModelProtocol slot, std::string* selection_note) {
  if (cfg.classifier != "auto")
    return rc::train_model(data, spec_of(cfg, rc::model_kind_from_string(cfg.classifier)),
                           slot, cfg.seed);

  auto split = rc::holdout_split(data.size(), cfg.train_fraction, cfg.seed);
  rc::LabeledDataset train_side = rc::subset(data, split.train);
  rc::LabeledDataset valid_side = rc::subset(data, split.test);
  std::vector<rc::TrainedModel> candidates;
  std::vector<std::string> names;
  for (rc::ModelKind kind : kAllKinds) {
    try {
      candidates.push_back(rc::train_model(train_side, spec_of(cfg, kind), slot, cfg.seed));
      names.push_back(rc::to_string(kind));
    } catch (const rc::TrainingError&) {
      // A kind that cannot train on this data simply leaves the contest.
    }
  }
  if (candidates.empty())
    throw rc::EmptyTrainingError("no classifier kind could be trained on this data");
  std::size_t best = rc::select_best_model(candidates, valid_side, "accuracy");
  if (selection_note)
    *selection_note = "selected " + names[best] + " by accuracy on the " +
                      rc::format_rate_4dp(1.0 - cfg.train_fraction) + " holdout";
  return candidates[best];
}

rc::ModelProtocol slot_of(const RunConfig& cfg) {
  return rc::model_protocol_from_string(cfg.protocol);
}

// ---------------------------------------------------------------------------
// generate: synthetic corpus to disk.

void cmd_generate(const RunConfig& cfg) {
  const std::string out_dir =
      require_path(cfg.paths.out_dir, "--out", "out_dir", "generate");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw rc::IoError("cannot create output directory \"" + out_dir + "\": " +
                            ec.message());

  rc::SyntheticCorpus corpus = rc::build_corpus(scenario_of(cfg));

  const std::string pcap_path = out_dir + "/capture.pcap";
  const std::string packets_path = out_dir + "/packets.csv";
  const std::string telemetry_path = out_dir + "/telemetry.csv";
  const std::string truth_path = out_dir + "/truth.csv";

  auto pcap_bytes = rc::write_pcap(corpus.packets);
  rc::write_binary_file(pcap_path, pcap_bytes);
  write_csv_file(packets_path, rc::packets_to_csv(corpus.packets), cfg);
  write_csv_file(telemetry_path, rc::telemetry_to_csv(corpus.telemetry), cfg);

  rc::CsvTable truth;
  truth.header = {"device_id", "window_index", "window_start_us", "tcp_label",
                  "udp_label", "label",        "intended_verdict"};
  truth.rows.reserve(corpus.truth.size());
  for (const auto& t : corpus.truth) {
    uint32_t device = (rc::ip_to_numeric(t.device_id) & 0xFF) - 1;
    rc::Label tcp = rc::training_label(corpus.schedule, device, t.window_index,
                                       corpus.window_us, rc::Protocol::TCP);
    rc::Label udp = rc::training_label(corpus.schedule, device, t.window_index,
                                       corpus.window_us, rc::Protocol::UDP);
    truth.rows.push_back({t.device_id, std::to_string(t.window_index),
                          std::to_string(corpus.epoch_us + t.window_index * corpus.window_us),
                          rc::to_string(tcp), rc::to_string(udp), rc::to_string(t.label),
                          t.intended ? rc::to_string(*t.intended) : ""});
  }
  write_csv_file(truth_path, truth, cfg);
  write_config_snapshot(out_dir + "/config.json", "generate", cfg);

  std::cout << "generated corpus: " << cfg.devices << " devices, " << cfg.duration_secs
            << " s, " << corpus.packets.size() << " packets, " << corpus.telemetry.size()
            << " telemetry samples, " << corpus.truth.size() << " truth windows -> "
            << out_dir << "\n";
}

// ---------------------------------------------------------------------------
// train: labeled capture -> model bundle + training report.

void cmd_train(const RunConfig& cfg) {
  const std::string packets_path =
      require_path(cfg.paths.packets, "--packets", "packets", "train");
  const std::string truth_path = require_path(cfg.paths.truth, "--truth", "truth", "train");
  const std::string model_path =
      require_path(cfg.paths.model_out, "--model-out", "model_out", "train");
  const std::string report_path =
      cfg.paths.report_out ? *cfg.paths.report_out : model_path + ".report.txt";
  refuse_overwriting_inputs({packets_path, truth_path},
                            {model_path, report_path, model_path + ".config.json"});

  WindowedCapture wc = windowed_capture(cfg, packets_path);
  TruthMap truth = load_truth(truth_path);
  rc::ModelProtocol slot = slot_of(cfg);
  rc::AssembledData assembled = assemble_with_truth(wc.samples, truth, slot);

  std::string selection_note;
  rc::TrainedModel model = train_configured(cfg, assembled.data, slot, &selection_note);

  std::string text = "# " + provenance_line(cfg) + "\n" + rc::serialize_models({model});
  write_text_file(model_path, text);

  // The report states the shipped model's confusion over the full table it
  // was given, so a later detect run over the same capture must reproduce
  // these counts exactly.
  rc::ConfusionMatrix cm = rc::confusion(model.predict_all(assembled.data.x),
                                         assembled.data.y);
  double duration_s =
      static_cast<double>(assembled.data.size()) * static_cast<double>(cfg.window_secs);
  rc::ReportRow row = rc::make_report_row(rc::to_string(model.kind),
                                          rc::to_string(model.protocol), cm,
                                          cfg.paper_literal, duration_s);
  std::vector<std::string> header = {provenance_line(cfg), "command=train",
                                     "windows=" + std::to_string(assembled.data.size()) +
                                         " window_secs=" + std::to_string(cfg.window_secs)};
  if (!selection_note.empty()) header.push_back(selection_note);
  write_text_file(report_path, rc::render_report_text({row}, header));
  write_config_snapshot(model_path + ".config.json", "train", cfg);

  std::cout << "trained " << rc::to_string(model.kind) << "/" << rc::to_string(model.protocol)
            << " on " << assembled.data.size() << " windows (" << wc.packet_count
            << " packets, " << wc.dropped << " dropped) -> " << model_path << ", "
            << report_path << "\n";
}

// ---------------------------------------------------------------------------
// detect: capture + model bundle -> per-window verdict CSV (stage 1).

const rc::TrainedModel* pick_model(const std::vector<rc::TrainedModel>& bundle,
                                   rc::Protocol p) {
  rc::ModelProtocol want =
      p == rc::Protocol::TCP ? rc::ModelProtocol::TCP : rc::ModelProtocol::UDP;
  for (const auto& m : bundle)
    if (m.protocol == want) return &m;
  for (const auto& m : bundle)
    if (m.protocol == rc::ModelProtocol::GENERAL) return &m;
  return nullptr;
}

void cmd_detect(const RunConfig& cfg) {
  const std::string packets_path =
      require_path(cfg.paths.packets, "--packets", "packets", "detect");
  const std::string model_path = require_path(cfg.paths.model, "--model", "model", "detect");
  const std::string out_path = require_path(cfg.paths.out, "--out", "out", "detect");
  refuse_overwriting_inputs({packets_path, model_path}, {out_path, out_path + ".config.json"});

  std::vector<rc::TrainedModel> bundle = rc::load_models_file(model_path);
  if (bundle.empty()) throw rc::SchemaError("model file \"" + model_path + "\" holds no models");
  WindowedCapture wc = windowed_capture(cfg, packets_path);

  rc::CsvTable out;
  out.header = {"device_id", "window_start_us", "window_us", "window_index",
                "protocol",  "prediction",      "score"};
  out.rows.reserve(wc.samples.size());
  std::size_t attacked = 0;
  for (const auto& s : wc.samples) {
    const rc::TrainedModel* m = pick_model(bundle, s.protocol);
    if (!m)
      throw rc::SchemaError(std::string("model bundle covers no slot applicable to ") +
                            rc::to_string(s.protocol) + " windows");
    rc::FeatureRow x = m->protocol == rc::ModelProtocol::GENERAL
                           ? rc::combined_row(s.features, s.protocol)
                           : s.features.to_row();
    rc::Label pred = m->predict(x);
    attacked += pred == rc::Label::ATTACKED ? 1 : 0;
    out.rows.push_back({s.window.device_id, std::to_string(s.window.start_us),
                        std::to_string(s.window.duration_us),
                        std::to_string((s.window.start_us - wc.epoch_us) / wc.window_us),
                        rc::to_string(s.protocol), rc::to_string(pred),
                        rc::format_double_field(m->score(x))});
  }
  write_csv_file(out_path, out, cfg);
  write_config_snapshot(out_path + ".config.json", "detect", cfg);

  std::cout << "classified " << wc.samples.size() << " windows: " << attacked
            << " attacked, " << (wc.samples.size() - attacked) << " normal -> " << out_path
            << "\n";
}

// ---------------------------------------------------------------------------
// attribute: stage-1 verdicts + telemetry -> stage-2 attribution CSV.
// Only windows stage 1 flagged as attacked are examined at all.

void cmd_attribute(const RunConfig& cfg) {
  const std::string verdicts_path =
      require_path(cfg.paths.verdicts, "--verdicts", "verdicts", "attribute");
  const std::string telemetry_path =
      require_path(cfg.paths.telemetry, "--telemetry", "telemetry", "attribute");
  const std::string out_path = require_path(cfg.paths.out, "--out", "out", "attribute");
  refuse_overwriting_inputs({verdicts_path, telemetry_path},
                            {out_path, out_path + ".config.json"});

  auto vbytes = rc::read_binary_file(verdicts_path);
  std::string vtext(vbytes.begin(), vbytes.end());
  std::istringstream vin(vtext);
  rc::CsvTable vt = rc::read_csv(vin);
  auto require = [&](const char* name) {
    int idx = vt.column(name);
    if (idx < 0)
      throw rc::SchemaError("verdict CSV \"" + verdicts_path + "\" lacks column \"" + name +
                            "\"");
    return idx;
  };
  int c_dev = require("device_id");
  int c_start = require("window_start_us");
  int c_win = require("window_us");
  int c_pred = require("prediction");
  std::size_t need = static_cast<std::size_t>(std::max({c_dev, c_start, c_win, c_pred})) + 1;

  // One stage-2 decision per (device, window); a window counts as attacked
  // when any of its per-protocol rows says so.
  std::map<std::tuple<std::string, uint64_t, uint64_t>, bool> windows;
  for (std::size_t i = 0; i < vt.rows.size(); ++i) {
    const auto& row = vt.rows[i];
    if (row.size() < need)
      throw rc::ParseError("verdict row " + std::to_string(i) + " has " +
                           std::to_string(row.size()) + " fields, needs " +
                           std::to_string(need));
    auto key = std::make_tuple(row[c_dev], rc::parse_u64_field(row[c_start], "window_start_us"),
                               rc::parse_u64_field(row[c_win], "window_us"));
    bool att = parse_label(row[c_pred]) == rc::Label::ATTACKED;
    auto [it, inserted] = windows.emplace(key, att);
    if (!inserted) it->second = it->second || att;
  }

  auto tbytes = rc::read_binary_file(telemetry_path);
  std::string ttext(tbytes.begin(), tbytes.end());
  std::istringstream tin(ttext);
  std::vector<rc::TelemetrySample> telemetry = rc::parse_telemetry_csv(rc::read_csv(tin));

  std::map<std::string, rc::BaselineProfile> baselines;
  auto baseline_for = [&](const std::string& dev) -> const rc::BaselineProfile& {
    auto it = baselines.find(dev);
    if (it == baselines.end())
      it = baselines.emplace(dev, rc::build_baseline(telemetry, dev)).first;
    return it->second;
  };

  rc::CsvTable out;
  out.header = {"device_id", "window_start_us", "window_us",
                "verdict",   "energy_z",        "memory_z",
                "missing_telemetry"};
  std::map<std::string, std::size_t> verdict_counts;
  std::size_t examined = 0;
  for (const auto& [key, attacked] : windows) {
    if (!attacked) continue;  // normal windows never reach stage 2
    ++examined;
    const auto& [dev, start, win_us] = key;
    rc::TimeWindow w{start, win_us, dev};
    rc::AttributionResult r =
        rc::attribute(w, baseline_for(dev), telemetry, cfg.tau_energy, cfg.tau_memory);
    ++verdict_counts[rc::to_string(r.verdict)];
    out.rows.push_back({dev, std::to_string(start), std::to_string(win_us),
                        rc::to_string(r.verdict),
                        r.missing_telemetry ? "" : rc::format_double_field(r.energy_z),
                        r.missing_telemetry ? "" : rc::format_double_field(r.memory_z),
                        r.missing_telemetry ? "1" : "0"});
  }
  write_csv_file(out_path, out, cfg);
  write_config_snapshot(out_path + ".config.json", "attribute", cfg);

  std::cout << "attributed " << examined << " attacked windows (of " << windows.size()
            << "):";
  for (const auto& [name, count] : verdict_counts) std::cout << " " << name << "=" << count;
  std::cout << " -> " << out_path << "\n";
}

// ---------------------------------------------------------------------------
// evaluate: metric table per algorithm x protocol.

std::vector<rc::ModelKind> evaluation_kinds(const RunConfig& cfg,
                                            const FlagOverrides& flags) {
  if (flags.classifier) {
    if (*flags.classifier == "auto")
      return std::vector<rc::ModelKind>(kAllKinds.begin(), kAllKinds.end());
    return {rc::model_kind_from_string(*flags.classifier)};
  }
  std::vector<rc::ModelKind> kinds;
  kinds.reserve(cfg.evaluate_kinds.size());
  for (const auto& k : cfg.evaluate_kinds) kinds.push_back(rc::model_kind_from_string(k));
  return kinds;
}

void cmd_evaluate(const RunConfig& cfg, const FlagOverrides& flags) {
  const std::string packets_path =
      require_path(cfg.paths.packets, "--packets", "packets", "evaluate");
  const std::string truth_path =
      require_path(cfg.paths.truth, "--truth", "truth", "evaluate");
  const std::string prefix =
      require_path(cfg.paths.out_prefix, "--out-prefix", "out_prefix", "evaluate");
  std::vector<std::string> inputs = {packets_path, truth_path};
  if (cfg.paths.model) inputs.push_back(*cfg.paths.model);
  refuse_overwriting_inputs(inputs,
                            {prefix + ".csv", prefix + ".txt", prefix + ".config.json"});

  WindowedCapture wc = windowed_capture(cfg, packets_path);
  TruthMap truth = load_truth(truth_path);

  std::vector<rc::ReportRow> rows;
  std::vector<std::string> header = {provenance_line(cfg), "command=evaluate"};

  if (cfg.paths.model) {
    // Apply an existing bundle to every window of each model's own slot.
    std::vector<rc::TrainedModel> bundle = rc::load_models_file(*cfg.paths.model);
    if (bundle.empty())
      throw rc::SchemaError("model file \"" + *cfg.paths.model + "\" holds no models");
    header.push_back("mode=pre-trained bundle over all windows");
    for (const auto& m : bundle) {
      rc::AssembledData a = assemble_with_truth(wc.samples, truth, m.protocol);
      if (a.data.size() == 0)
        throw rc::EmptyInputError(std::string("capture has no ") + rc::to_string(m.protocol) +
                                  " windows to evaluate");
      rc::ConfusionMatrix cm = rc::confusion(m.predict_all(a.data.x), a.data.y);
      double duration_s =
          static_cast<double>(a.data.size()) * static_cast<double>(cfg.window_secs);
      rows.push_back(rc::make_report_row(rc::to_string(m.kind), rc::to_string(m.protocol), cm,
                                         cfg.paper_literal, duration_s));
    }
  } else {
    // Train-and-test table: per protocol slot, one holdout split shared by
    // every classifier kind so their rows are directly comparable.
    std::vector<rc::ModelProtocol> slots;
    if (cfg.protocol == "general")
      slots = {rc::ModelProtocol::TCP, rc::ModelProtocol::UDP};
    else
      slots = {slot_of(cfg)};
    std::vector<rc::ModelKind> kinds = evaluation_kinds(cfg, flags);
    header.push_back("mode=holdout train_fraction=" +
                     rc::format_rate_4dp(cfg.train_fraction));
    for (rc::ModelKind kind : kinds) {
      for (rc::ModelProtocol slot : slots) {
        rc::AssembledData a = assemble_with_truth(wc.samples, truth, slot);
        if (a.data.size() < 2)
          throw rc::EmptyInputError(std::string("capture has too few ") +
                                    rc::to_string(slot) + " windows to split");
        auto split = rc::holdout_split(a.data.size(), cfg.train_fraction, cfg.seed);
        rc::LabeledDataset train_side = rc::subset(a.data, split.train);
        rc::LabeledDataset test_side = rc::subset(a.data, split.test);
        rc::TrainedModel m = rc::train_model(train_side, spec_of(cfg, kind), slot, cfg.seed);
        rc::ConfusionMatrix cm = rc::confusion(m.predict_all(test_side.x), test_side.y);
        double duration_s =
            static_cast<double>(test_side.size()) * static_cast<double>(cfg.window_secs);
        rows.push_back(rc::make_report_row(rc::to_string(kind), rc::to_string(slot), cm,
                                           cfg.paper_literal, duration_s));
      }
    }
  }

  rc::CsvTable csv;
  csv.header = rc::report_csv_header();
  for (const auto& r : rows) csv.rows.push_back(rc::report_csv_row(r));
  write_csv_file(prefix + ".csv", csv, cfg);
  write_text_file(prefix + ".txt", rc::render_report_text(rows, header));
  write_config_snapshot(prefix + ".config.json", "evaluate", cfg);

  std::cout << "evaluated " << rows.size() << " model rows over " << wc.samples.size()
            << " windows -> " << prefix << ".csv, " << prefix << ".txt\n";
}

// ---------------------------------------------------------------------------
// crossval: per-fold accuracy report.

void cmd_crossval(const RunConfig& cfg) {
  const std::string packets_path =
      require_path(cfg.paths.packets, "--packets", "packets", "crossval");
  const std::string truth_path =
      require_path(cfg.paths.truth, "--truth", "truth", "crossval");
  const std::string out_path = require_path(cfg.paths.out, "--out", "out", "crossval");
  refuse_overwriting_inputs({packets_path, truth_path}, {out_path, out_path + ".config.json"});

  WindowedCapture wc = windowed_capture(cfg, packets_path);
  TruthMap truth = load_truth(truth_path);
  rc::ModelProtocol slot = slot_of(cfg);
  rc::AssembledData assembled = assemble_with_truth(wc.samples, truth, slot);
  rc::ModelSpec spec = spec_of(cfg, concrete_classifier(cfg, "crossval"));

  rc::CrossvalReport report =
      rc::crossval_report(assembled.data, spec, slot, cfg.folds, cfg.seed);

  rc::CsvTable out;
  out.header = {"fold", "accuracy"};
  for (std::size_t f = 0; f < report.fold_accuracy.size(); ++f)
    out.rows.push_back({std::to_string(f + 1), rc::format_ratio_4dp(report.fold_accuracy[f])});
  out.rows.push_back({"mean", rc::format_rate_4dp(report.mean_accuracy)});
  write_csv_file(out_path, out, cfg);
  write_config_snapshot(out_path + ".config.json", "crossval", cfg);

  std::cout << cfg.folds << "-fold cross-validation of " << rc::to_string(spec.kind) << "/"
            << rc::to_string(slot) << " on " << assembled.data.size()
            << " windows: mean accuracy " << rc::format_rate_4dp(report.mean_accuracy)
            << " -> " << out_path << "\n";
}

// ---------------------------------------------------------------------------
// sweep: decision-threshold sweep CSV (threshold, fpr, detection_rate).

void cmd_sweep(const RunConfig& cfg) {
  const std::string packets_path =
      require_path(cfg.paths.packets, "--packets", "packets", "sweep");
  const std::string truth_path = require_path(cfg.paths.truth, "--truth", "truth", "sweep");
  const std::string out_path = require_path(cfg.paths.out, "--out", "out", "sweep");
  refuse_overwriting_inputs({packets_path, truth_path}, {out_path, out_path + ".config.json"});

  WindowedCapture wc = windowed_capture(cfg, packets_path);
  TruthMap truth = load_truth(truth_path);
  rc::ModelProtocol slot = slot_of(cfg);
  rc::AssembledData assembled = assemble_with_truth(wc.samples, truth, slot);
  rc::ModelSpec spec = spec_of(cfg, concrete_classifier(cfg, "sweep"));

  if (assembled.data.size() < 2)
    throw rc::EmptyInputError("capture has too few windows to split for the sweep");
  auto split = rc::holdout_split(assembled.data.size(), cfg.train_fraction, cfg.seed);
  rc::LabeledDataset train_side = rc::subset(assembled.data, split.train);
  rc::LabeledDataset test_side = rc::subset(assembled.data, split.test);
  rc::TrainedModel model = rc::train_model(train_side, spec, slot, cfg.seed);

  std::vector<double> scores;
  scores.reserve(test_side.size());
  for (const auto& x : test_side.x) scores.push_back(model.score(x));

  double lo = scores[0], hi = scores[0];
  for (double s : scores) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  std::vector<double> thresholds;
  if (cfg.sweep_points == 1 || !(hi > lo)) {
    thresholds.push_back(lo);
  } else {
    thresholds.reserve(cfg.sweep_points);
    for (uint32_t i = 0; i < cfg.sweep_points; ++i)
      thresholds.push_back(lo + (hi - lo) * (static_cast<double>(i) /
                                             static_cast<double>(cfg.sweep_points - 1)));
  }

  std::vector<rc::SweepPoint> points = rc::threshold_sweep(scores, test_side.y, thresholds);

  rc::CsvTable out;
  out.header = {"threshold", "fpr", "detection_rate"};
  for (const auto& p : points)
    out.rows.push_back({rc::format_double_field(p.threshold), rc::format_ratio_4dp(p.fpr),
                        rc::format_ratio_4dp(p.detection_rate)});
  write_csv_file(out_path, out, cfg);
  write_config_snapshot(out_path + ".config.json", "sweep", cfg);

  std::cout << "swept " << points.size() << " thresholds of " << rc::to_string(spec.kind)
            << "/" << rc::to_string(slot) << " scores over " << test_side.size()
            << " held-out windows -> " << out_path << "\n";
}

void report_error(const char* category, const std::exception& e) {
  std::cerr << "rcdetect: " << category << ": " << one_line(e.what()) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resource-constraint attack detection pipeline"};
  app.require_subcommand(1);

  FlagOverrides flags;
  app.add_option("--config", flags.config_path,
                 "JSON config file; flags override its values");
  app.add_option("--seed", flags.seed, "base seed for every random draw");
  app.add_option("--window-secs", flags.window_secs, "window length in seconds")
      ->check(CLI::IsMember({2, 3, 5, 10}));
  app.add_option("--protocol", flags.protocol, "model slot: tcp, udp, or general")
      ->check(CLI::IsMember({"tcp", "udp", "general"}));
  app.add_option("--classifier", flags.classifier,
                 "classifier kind: rf, svm, dt, knn, nb, or auto")
      ->check(CLI::IsMember({"rf", "svm", "dt", "knn", "nb", "auto"}));
  app.add_flag("--paper-literal", flags.paper_literal,
               "report the literal-reading variants of the probability metrics");

  auto* generate = app.add_subcommand("generate", "write a synthetic labeled corpus");
  generate->add_option("--out", flags.paths.out_dir, "output directory");

  auto* train = app.add_subcommand("train", "train a model from a labeled capture");
  train->add_option("--packets", flags.paths.packets, "input capture (.pcap or packet CSV)");
  train->add_option("--truth", flags.paths.truth, "ground-truth window labels CSV");
  train->add_option("--model-out", flags.paths.model_out, "output model file");
  train->add_option("--report-out", flags.paths.report_out,
                    "training report path (default: <model>.report.txt)");

  auto* detect = app.add_subcommand("detect", "classify capture windows with a saved model");
  detect->add_option("--packets", flags.paths.packets, "input capture (.pcap or packet CSV)");
  detect->add_option("--model", flags.paths.model, "model file from train");
  detect->add_option("--out", flags.paths.out, "output verdict CSV");

  auto* attribute =
      app.add_subcommand("attribute", "attribute attacked windows using telemetry");
  attribute->add_option("--verdicts", flags.paths.verdicts, "stage-1 verdict CSV from detect");
  attribute->add_option("--telemetry", flags.paths.telemetry, "device telemetry CSV");
  attribute->add_option("--out", flags.paths.out, "output attribution CSV");
  attribute->add_option("--tau-energy", flags.tau_energy, "energy deviation threshold");
  attribute->add_option("--tau-memory", flags.tau_memory, "memory deviation threshold");

  auto* evaluate = app.add_subcommand("evaluate", "metric table per algorithm and protocol");
  evaluate->add_option("--packets", flags.paths.packets, "input capture (.pcap or packet CSV)");
  evaluate->add_option("--truth", flags.paths.truth, "ground-truth window labels CSV");
  evaluate->add_option("--model", flags.paths.model,
                       "evaluate this saved bundle instead of training fresh models");
  evaluate->add_option("--out-prefix", flags.paths.out_prefix,
                       "output prefix (writes <prefix>.csv and <prefix>.txt)");

  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation report");
  crossval->add_option("--packets", flags.paths.packets, "input capture (.pcap or packet CSV)");
  crossval->add_option("--truth", flags.paths.truth, "ground-truth window labels CSV");
  crossval->add_option("--out", flags.paths.out, "output per-fold CSV");
  crossval->add_option("--folds", flags.folds, "fold count");

  auto* sweep = app.add_subcommand("sweep", "decision-threshold sweep CSV");
  sweep->add_option("--packets", flags.paths.packets, "input capture (.pcap or packet CSV)");
  sweep->add_option("--truth", flags.paths.truth, "ground-truth window labels CSV");
  sweep->add_option("--out", flags.paths.out, "output sweep CSV");

  for (auto* sub : {generate, train, detect, attribute, evaluate, crossval, sweep})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
    RunConfig cfg = resolve_config(flags);
    if (generate->parsed())
      cmd_generate(cfg);
    else if (train->parsed())
      cmd_train(cfg);
    else if (detect->parsed())
      cmd_detect(cfg);
    else if (attribute->parsed())
      cmd_attribute(cfg);
    else if (evaluate->parsed())
      cmd_evaluate(cfg, flags);
    else if (crossval->parsed())
      cmd_crossval(cfg);
    else if (sweep->parsed())
      cmd_sweep(cfg);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "rcdetect: usage: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const rc::UsageError& e) {
    report_error("usage", e);
    return 1;
  } catch (const rc::IoError& e) {
    report_error("io", e);
    return 2;
  } catch (const rc::SchemaError& e) {
    report_error("schema", e);
    return 3;
  } catch (const rc::TrainingError& e) {
    report_error("training", e);
    return 4;
  } catch (const std::exception& e) {
    report_error("internal", e);
    return 5;
  }
}
