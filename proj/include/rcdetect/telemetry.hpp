#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcdetect/classifiers.hpp"
#include "rcdetect/csv.hpp"
#include "rcdetect/errors.hpp"
#include "rcdetect/features.hpp"
#include "rcdetect/rng.hpp"
#include "rcdetect/traffic.hpp"

namespace rcdetect {

// ---------------------------------------------------------------------------
// Telemetry readings.

enum class DeviceState : uint8_t { IDLE, NORMAL, ABNORMAL, UNKNOWN };

inline const char* to_string(DeviceState s) {
  switch (s) {
    case DeviceState::IDLE: return "idle";
    case DeviceState::NORMAL: return "normal";
    case DeviceState::ABNORMAL: return "abnormal";
    default: return "unknown";
  }
}

inline DeviceState device_state_from_string(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "idle") return DeviceState::IDLE;
  if (s == "normal") return DeviceState::NORMAL;
  if (s == "abnormal") return DeviceState::ABNORMAL;
  if (s == "unknown") return DeviceState::UNKNOWN;
  throw ParseError("unknown device state \"" + s + "\"");
}

struct TelemetrySample {
  uint64_t timestamp_us = 0;
  std::string device_id;
  double energy_mw = 0.0;
  double memory_kib = 0.0;
  DeviceState state = DeviceState::UNKNOWN;

  bool operator==(const TelemetrySample&) const = default;
};

// Columns: timestamp_us, device_id, energy_mw, memory_kib, state.
inline const std::vector<std::string>& telemetry_csv_header() {
  static const std::vector<std::string> h = {"timestamp_us", "device_id", "energy_mw",
                                             "memory_kib", "state"};
  return h;
}

// Strict: any malformed row aborts the parse. Rows come back stably sorted by
// timestamp so per-device sequences are non-decreasing regardless of file
// order.
inline std::vector<TelemetrySample> parse_telemetry_csv(const CsvTable& table) {
  int c_ts = table.column("timestamp_us");
  int c_dev = table.column("device_id");
  int c_e = table.column("energy_mw");
  int c_m = table.column("memory_kib");
  int c_st = table.column("state");
  for (auto [col, name] : {std::pair{c_ts, "timestamp_us"}, {c_dev, "device_id"},
                           {c_e, "energy_mw"}, {c_m, "memory_kib"}, {c_st, "state"}})
    if (col < 0) throw SchemaError(std::string("telemetry CSV lacks column \"") + name + "\"");

  std::vector<TelemetrySample> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::size_t need = static_cast<std::size_t>(std::max({c_ts, c_dev, c_e, c_m, c_st})) + 1;
    if (row.size() < need)
      throw ParseError("telemetry row " + std::to_string(i) + " has " +
                       std::to_string(row.size()) + " fields, needs " + std::to_string(need));
    TelemetrySample s;
    s.timestamp_us = parse_u64_field(row[c_ts], "timestamp_us");
    s.device_id = row[c_dev];
    s.energy_mw = parse_double_field(row[c_e], "energy_mw");
    s.memory_kib = parse_double_field(row[c_m], "memory_kib");
    s.state = device_state_from_string(row[c_st]);
    if (s.device_id.empty())
      throw ParseError("telemetry row " + std::to_string(i) + " has an empty device_id");
    if (!std::isfinite(s.energy_mw) || s.energy_mw < 0.0)
      throw ParseError("telemetry row " + std::to_string(i) + " energy_mw out of domain");
    if (!std::isfinite(s.memory_kib) || s.memory_kib < 0.0)
      throw ParseError("telemetry row " + std::to_string(i) + " memory_kib out of domain");
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.timestamp_us < b.timestamp_us;
  });
  return out;
}

inline CsvTable telemetry_to_csv(const std::vector<TelemetrySample>& samples) {
  CsvTable t;
  t.header = telemetry_csv_header();
  t.rows.reserve(samples.size());
  for (const auto& s : samples)
    t.rows.push_back({std::to_string(s.timestamp_us), s.device_id,
                      format_double_field(s.energy_mw), format_double_field(s.memory_kib),
                      to_string(s.state)});
  return t;
}

// ---------------------------------------------------------------------------
// Per-device normal-state baselines.

struct BaselineProfile {
  std::string device_id;
  double energy_mean = 0.0;
  double energy_stddev = 1.0;
  double memory_mean = 0.0;
  double memory_stddev = 1.0;
  uint64_t sample_count = 0;

  bool operator==(const BaselineProfile&) const = default;
};

inline constexpr double kBaselineStddevFloor = 1e-6;
inline constexpr uint64_t kDefaultBaselineMinCount = 30;

// Mean/stddev of energy and memory over this device's NORMAL-state samples.
// ABNORMAL, IDLE, and UNKNOWN readings never reach the baseline pool.
inline BaselineProfile build_baseline(const std::vector<TelemetrySample>& samples,
                                      const std::string& device_id,
                                      uint64_t min_count = kDefaultBaselineMinCount) {
  double e_sum = 0.0, m_sum = 0.0;
  uint64_t n = 0;
  for (const auto& s : samples) {
    if (s.device_id != device_id || s.state != DeviceState::NORMAL) continue;
    e_sum += s.energy_mw;
    m_sum += s.memory_kib;
    ++n;
  }
  if (n < min_count)
    throw InsufficientBaselineError(
        "device \"" + device_id + "\" has " + std::to_string(n) +
            " normal-state samples, needs " + std::to_string(min_count),
        min_count);

  BaselineProfile p;
  p.device_id = device_id;
  p.sample_count = n;
  p.energy_mean = e_sum / static_cast<double>(n);
  p.memory_mean = m_sum / static_cast<double>(n);
  double e_var = 0.0, m_var = 0.0;
  for (const auto& s : samples) {
    if (s.device_id != device_id || s.state != DeviceState::NORMAL) continue;
    double de = s.energy_mw - p.energy_mean;
    double dm = s.memory_kib - p.memory_mean;
    e_var += de * de;
    m_var += dm * dm;
  }
  p.energy_stddev = std::max(std::sqrt(e_var / static_cast<double>(n)), kBaselineStddevFloor);
  p.memory_stddev = std::max(std::sqrt(m_var / static_cast<double>(n)), kBaselineStddevFloor);
  return p;
}

// ---------------------------------------------------------------------------
// Window deviation scores.

struct DeviationScores {
  double energy_z = 0.0;
  double memory_z = 0.0;
};

// z = (mean of in-window readings - baseline mean) / baseline stddev. The
// window is half-open [start, end). All states count here: during an attack
// the device is not in NORMAL state, and those are exactly the readings the
// scores must reflect.
inline DeviationScores deviation_scores(const BaselineProfile& profile,
                                        const TimeWindow& window,
                                        const std::vector<TelemetrySample>& samples) {
  if (!window.device_id.empty() && window.device_id != profile.device_id)
    throw ParamError("window belongs to device \"" + window.device_id +
                     "\" but the profile describes \"" + profile.device_id + "\"");
  double e_sum = 0.0, m_sum = 0.0;
  uint64_t n = 0;
  for (const auto& s : samples) {
    if (s.device_id != profile.device_id || !window.contains(s.timestamp_us)) continue;
    e_sum += s.energy_mw;
    m_sum += s.memory_kib;
    ++n;
  }
  if (n == 0)
    throw MissingTelemetryError("no telemetry for device \"" + profile.device_id +
                                "\" inside the window starting at " +
                                std::to_string(window.start_us));
  DeviationScores z;
  z.energy_z = (e_sum / static_cast<double>(n) - profile.energy_mean) / profile.energy_stddev;
  z.memory_z = (m_sum / static_cast<double>(n) - profile.memory_mean) / profile.memory_stddev;
  return z;
}

// ---------------------------------------------------------------------------
// Attribution.

enum class Verdict : uint8_t { ENERGY_ATTACK, MEMORY_ATTACK, BOTH, OTHER };
inline constexpr std::size_t kVerdictCount = 4;

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ENERGY_ATTACK: return "ENERGY_ATTACK";
    case Verdict::MEMORY_ATTACK: return "MEMORY_ATTACK";
    case Verdict::BOTH: return "BOTH";
    default: return "OTHER";
  }
}

inline Verdict verdict_from_string(const std::string& s) {
  if (s == "ENERGY_ATTACK") return Verdict::ENERGY_ATTACK;
  if (s == "MEMORY_ATTACK") return Verdict::MEMORY_ATTACK;
  if (s == "BOTH") return Verdict::BOTH;
  if (s == "OTHER") return Verdict::OTHER;
  throw ParseError("unknown verdict \"" + s + "\"");
}

// Four-way pattern matcher over (window features, energy_z, memory_z): one
// one-vs-rest binary forest per verdict class; a class's score is its
// forest's vote fraction.
struct PatternModel {
  std::array<TrainedModel, kVerdictCount> per_class;

  std::array<double, kVerdictCount> scores(const FeatureRow& row) const {
    std::array<double, kVerdictCount> out{};
    for (std::size_t c = 0; c < kVerdictCount; ++c) out[c] = per_class[c].score(row);
    return out;
  }

  // Highest-scoring class; earlier enum value wins exact ties.
  std::pair<Verdict, double> best(const FeatureRow& row) const {
    auto s = scores(row);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < kVerdictCount; ++c)
      if (s[c] > s[arg]) arg = c;
    return {static_cast<Verdict>(arg), s[arg]};
  }
};

inline FeatureRow pattern_row(const FeatureVector& features, const DeviationScores& z) {
  FeatureRow row = features.to_row();
  row.push_back(z.energy_z);
  row.push_back(z.memory_z);
  return row;
}

inline PatternModel train_pattern_model(const std::vector<FeatureRow>& rows,
                                        const std::vector<Verdict>& verdicts,
                                        const ModelSpec& spec, uint64_t seed) {
  if (rows.size() != verdicts.size())
    throw ShapeError("pattern training has " + std::to_string(rows.size()) + " rows but " +
                     std::to_string(verdicts.size()) + " verdicts");
  if (rows.size() < 2) throw EmptyTrainingError("pattern training needs at least 2 samples");
  if (spec.kind != ModelKind::RF)
    throw ParamError("the pattern matcher is forest-based; model kind must be rf");
  PatternModel pm;
  for (std::size_t c = 0; c < kVerdictCount; ++c) {
    LabeledDataset ds;
    ds.x = rows;
    ds.y.reserve(rows.size());
    for (Verdict v : verdicts)
      ds.y.push_back(v == static_cast<Verdict>(c) ? Label::ATTACKED : Label::NORMAL);
    pm.per_class[c] = train_model(ds, spec, ModelProtocol::GENERAL, Rng::derive(seed, 0xa77, c));
  }
  return pm;
}

inline constexpr double kDefaultPatternCutoff = 0.8;

struct AttributionResult {
  TimeWindow window;
  Verdict verdict = Verdict::OTHER;
  double energy_z = 0.0;
  double memory_z = 0.0;
  std::optional<std::pair<Verdict, double>> pattern_match;
  bool missing_telemetry = false;
};

// Threshold rule with strict inequalities: boundary equality does not
// attribute. A supplied pattern model's label is recorded and replaces the
// threshold verdict only when its score reaches the confidence cutoff.
// Missing telemetry inside the window yields OTHER with the flag set.
inline AttributionResult attribute(const TimeWindow& window, const BaselineProfile& profile,
                                   const std::vector<TelemetrySample>& samples, double tau_e,
                                   double tau_m, const PatternModel* pattern_model = nullptr,
                                   const FeatureVector* features = nullptr,
                                   double cutoff = kDefaultPatternCutoff) {
  AttributionResult r;
  r.window = window;
  DeviationScores z;
  try {
    z = deviation_scores(profile, window, samples);
  } catch (const MissingTelemetryError&) {
    r.verdict = Verdict::OTHER;
    r.missing_telemetry = true;
    return r;
  }
  r.energy_z = z.energy_z;
  r.memory_z = z.memory_z;

  bool e = z.energy_z > tau_e;
  bool m = z.memory_z > tau_m;
  if (e && m)
    r.verdict = Verdict::BOTH;
  else if (e)
    r.verdict = Verdict::ENERGY_ATTACK;
  else if (m)
    r.verdict = Verdict::MEMORY_ATTACK;
  else
    r.verdict = Verdict::OTHER;

  if (pattern_model != nullptr && features != nullptr) {
    auto [label, score] = pattern_model->best(pattern_row(*features, z));
    r.pattern_match = {label, score};
    if (score >= cutoff) r.verdict = label;
  }
  return r;
}

}  // namespace rcdetect
