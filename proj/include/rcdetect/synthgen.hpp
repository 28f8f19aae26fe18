#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcdetect/errors.hpp"
#include "rcdetect/features.hpp"
#include "rcdetect/rng.hpp"
#include "rcdetect/telemetry.hpp"
#include "rcdetect/traffic.hpp"

namespace rcdetect {

// ---------------------------------------------------------------------------
// Scenario description
// ---------------------------------------------------------------------------

enum class AttackKind : uint8_t { DDOS, EC_DDOS, MEMORY_EXHAUST };

inline const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::DDOS: return "ddos";
    case AttackKind::EC_DDOS: return "ec_ddos";
    default: return "memory_exhaust";
  }
}

inline AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "ddos") return AttackKind::DDOS;
  if (s == "ec_ddos") return AttackKind::EC_DDOS;
  if (s == "memory_exhaust") return AttackKind::MEMORY_EXHAUST;
  throw ParseError("unknown attack kind \"" + s + "\"");
}

// The protocol an attack kind floods with; the flooded protocol determines
// which per-protocol training stream a window of that kind poisons.
inline Protocol attack_protocol(AttackKind k) {
  return k == AttackKind::EC_DDOS ? Protocol::UDP : Protocol::TCP;
}

// Half-open [start_s, end_s) attack against one device, in seconds from the
// corpus epoch.
struct AttackSpan {
  AttackKind kind = AttackKind::DDOS;
  uint32_t start_s = 0;
  uint32_t end_s = 0;
  uint32_t device = 0;

  bool operator==(const AttackSpan&) const = default;
};

struct ScenarioConfig {
  uint64_t seed = 42;
  uint32_t devices = 5;
  uint32_t duration_s = 600;
  uint32_t window_s = 2;  // supported sizes: 2, 3, 5, 10

  // Per-device normal rate, split evenly between one TCP and one UDP stream.
  double normal_rate_pps = 50.0;
  // Per-span flood rate (memory floods run at 40% of it).
  double attack_rate_pps = 400.0;

  double telemetry_period_s = 0.5;
  double energy_mean_mw = 100.0;
  double energy_stddev_mw = 5.0;
  double memory_mean_kib = 2048.0;
  double memory_stddev_kib = 40.0;

  // Unset -> the default schedule below; an explicit empty vector means a
  // corpus with no attacks at all.
  std::optional<std::vector<AttackSpan>> schedule;

  bool operator==(const ScenarioConfig&) const = default;
};

// All generated timestamps count up from this epoch. Its second value is
// divisible by 30, so window grids of every supported size (2, 3, 5, 10 s)
// tile the default attack-span boundaries exactly.
inline constexpr uint64_t kCorpusEpochUs = 1'600'000'020'000'000ull;

// Devices are addressed 10.0.0.1, 10.0.0.2, ... inside the 10/8 site block.
inline uint32_t device_ip_numeric(uint32_t device) {
  return (10u << 24) | (device + 1);
}

inline std::string device_ip(uint32_t device) { return numeric_to_ip(device_ip_numeric(device)); }

// The device a packet belongs to: the 10/8 endpoint, preferring the
// destination (floods point at the victim). Packets touching no 10/8 address
// belong to no device and are skipped by window grouping.
inline std::optional<uint32_t> packet_device_ip(const PacketRecord& p) {
  if ((p.dst_ip >> 24) == 10u) return p.dst_ip;
  if ((p.src_ip >> 24) == 10u) return p.src_ip;
  return std::nullopt;
}

// One flood of each kind against every device, in quiet-separated slots.
inline std::vector<AttackSpan> default_schedule(uint32_t devices) {
  std::vector<AttackSpan> out;
  out.reserve(static_cast<std::size_t>(devices) * 3);
  for (uint32_t d = 0; d < devices; ++d) {
    out.push_back({AttackKind::DDOS, 120, 180, d});
    out.push_back({AttackKind::EC_DDOS, 300, 360, d});
    out.push_back({AttackKind::MEMORY_EXHAUST, 450, 510, d});
  }
  return out;
}

inline std::vector<AttackSpan> resolved_schedule(const ScenarioConfig& cfg) {
  return cfg.schedule ? *cfg.schedule : default_schedule(cfg.devices);
}

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.devices == 0) throw ConfigError("scenario needs at least one device");
  if (cfg.devices > 250)
    throw ConfigError("device addressing supports at most 250 devices");
  if (cfg.duration_s == 0) throw ConfigError("scenario duration must be positive");
  if (cfg.window_s != 2 && cfg.window_s != 3 && cfg.window_s != 5 && cfg.window_s != 10)
    throw ConfigError("window duration must be one of 2, 3, 5, 10 seconds");
  if (!(cfg.normal_rate_pps > 0.0) || !(cfg.attack_rate_pps > 0.0))
    throw ConfigError("traffic rates must be positive");
  if (!(cfg.telemetry_period_s > 0.0))
    throw ConfigError("telemetry period must be positive");
  if (!(cfg.energy_stddev_mw > 0.0) || !(cfg.memory_stddev_kib > 0.0))
    throw ConfigError("telemetry noise levels must be positive");

  std::vector<AttackSpan> spans = resolved_schedule(cfg);
  for (const auto& s : spans) {
    if (s.device >= cfg.devices)
      throw ConfigError("attack span targets device " + std::to_string(s.device) +
                        " but the scenario has " + std::to_string(cfg.devices));
    if (s.start_s >= s.end_s)
      throw ConfigError("attack span is empty or inverted");
    if (s.end_s > cfg.duration_s)
      throw ConfigError("attack span ends after the scenario");
  }
  std::stable_sort(spans.begin(), spans.end(), [](const AttackSpan& a, const AttackSpan& b) {
    return a.device != b.device ? a.device < b.device : a.start_s < b.start_s;
  });
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i].device == spans[i - 1].device && spans[i].start_s < spans[i - 1].end_s)
      throw ConfigError("attack spans overlap on device " + std::to_string(spans[i].device));
}

// ---------------------------------------------------------------------------
// Ground truth from the schedule
// ---------------------------------------------------------------------------

// First span (in schedule order) of an allowed kind whose [start, end)
// intersects window k of the given device; nullopt when the window is clean.
inline std::optional<AttackSpan> covering_span(const std::vector<AttackSpan>& schedule,
                                               uint32_t device, uint64_t window_index,
                                               uint64_t window_us,
                                               std::optional<Protocol> protocol = std::nullopt) {
  const uint64_t ws = window_index * window_us;
  const uint64_t we = ws + window_us;
  for (const auto& s : schedule) {
    if (s.device != device) continue;
    if (protocol && attack_protocol(s.kind) != *protocol) continue;
    const uint64_t span_start = static_cast<uint64_t>(s.start_s) * 1'000'000ull;
    const uint64_t span_end = static_cast<uint64_t>(s.end_s) * 1'000'000ull;
    if (ws < span_end && span_start < we) return s;
  }
  return std::nullopt;
}

// Stage-1 truth: a window is ATTACKED when any flood of any kind touches it.
inline Label window_label(const std::vector<AttackSpan>& schedule, uint32_t device,
                          uint64_t window_index, uint64_t window_us) {
  return covering_span(schedule, device, window_index, window_us) ? Label::ATTACKED
                                                                  : Label::NORMAL;
}

// Per-protocol training truth: a protocol's sample is ATTACKED only when a
// flood of that protocol touches the window. A TCP flood leaves the victim's
// UDP traffic statistically normal (and vice versa), so labeling the other
// protocol's sample ATTACKED would poison its training stream.
inline Label training_label(const std::vector<AttackSpan>& schedule, uint32_t device,
                            uint64_t window_index, uint64_t window_us, Protocol protocol) {
  return covering_span(schedule, device, window_index, window_us, protocol)
             ? Label::ATTACKED
             : Label::NORMAL;
}

// Stage-2 truth: what a correct attribution of the window should conclude.
inline std::optional<Verdict> intended_verdict(const std::vector<AttackSpan>& schedule,
                                               uint32_t device, uint64_t window_index,
                                               uint64_t window_us) {
  auto span = covering_span(schedule, device, window_index, window_us);
  if (!span) return std::nullopt;
  return span->kind == AttackKind::MEMORY_EXHAUST ? Verdict::MEMORY_ATTACK
                                                  : Verdict::ENERGY_ATTACK;
}

struct WindowTruth {
  std::string device_id;
  uint64_t window_index = 0;
  Label label = Label::NORMAL;
  std::optional<Verdict> intended;  // set iff label == ATTACKED

  bool operator==(const WindowTruth&) const = default;
};

struct SyntheticCorpus {
  std::vector<PacketRecord> packets;      // merged, sorted by timestamp
  std::vector<TelemetrySample> telemetry;  // merged, sorted by timestamp
  std::vector<WindowTruth> truth;          // device-major grid
  std::vector<AttackSpan> schedule;        // resolved (defaults expanded)
  uint64_t epoch_us = kCorpusEpochUs;
  uint64_t window_us = 0;
};

// ---------------------------------------------------------------------------
// Traffic
// ---------------------------------------------------------------------------

namespace detail {

// Trimodal frame-length mixture: small control frames, mid-size payloads,
// near-MTU bulk. High spread is itself a normal-traffic signature.
inline uint32_t normal_frame_length(Rng& rng) {
  double u = rng.next_double();
  if (u < 0.5) return 60 + static_cast<uint32_t>(rng.next_below(40));
  if (u < 0.8) return 576 + static_cast<uint32_t>(rng.next_below(200));
  return 1400 + static_cast<uint32_t>(rng.next_below(101));
}

}  // namespace detail

// Benign device chatter over the full scenario: one TCP stream rotating
// through six service endpoints with an arithmetically advancing sequence
// number and uniformly random ip_id, then one UDP stream to a single service
// port. Rates are Poisson at half the device rate each.
inline std::vector<PacketRecord> generate_normal_traffic(const ScenarioConfig& cfg,
                                                         uint32_t device) {
  Rng rng(Rng::derive(cfg.seed, 1000 + device));
  // Below 2^31 so desk-scale arithmetic progressions never wrap uint32.
  const uint64_t seq_base = rng.next_u64() >> 33;
  const double rate = cfg.normal_rate_pps / 2.0;
  const double duration = static_cast<double>(cfg.duration_s);
  const uint32_t dev_ip = device_ip_numeric(device);

  std::vector<PacketRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.normal_rate_pps * duration * 0.6));

  double t = 0.0;
  uint64_t k = 0;
  for (;;) {
    t += rng.exponential(rate);
    if (t >= duration) break;
    uint32_t length = detail::normal_frame_length(rng);
    uint16_t ip_id = static_cast<uint16_t>(rng.next_u64() & 0xFFFF);
    uint32_t r = static_cast<uint32_t>(k % 6);
    PacketRecord p;
    p.timestamp_us = kCorpusEpochUs + static_cast<uint64_t>(t * 1e6);
    p.src_ip = dev_ip;
    p.dst_ip = (172u << 24) | (16u << 16) | (device << 8) | (10u + r);
    p.src_port = static_cast<uint16_t>(40000 + r);
    p.dst_port = (r % 3 == 0) ? 443 : (r % 3 == 1) ? 8883 : 80;
    p.protocol = Protocol::TCP;
    p.length = length;
    p.ip_id = ip_id;
    p.tcp_seq = static_cast<uint32_t>((seq_base + 1448 * k) & 0xFFFFFFFFull);
    out.push_back(p);
    ++k;
  }

  t = 0.0;
  k = 0;
  for (;;) {
    t += rng.exponential(rate);
    if (t >= duration) break;
    uint32_t length = detail::normal_frame_length(rng);
    uint16_t ip_id = static_cast<uint16_t>(rng.next_u64() & 0xFFFF);
    uint32_t r = static_cast<uint32_t>(k % 6);
    PacketRecord p;
    p.timestamp_us = kCorpusEpochUs + static_cast<uint64_t>(t * 1e6);
    p.src_ip = dev_ip;
    p.dst_ip = (172u << 24) | (16u << 16) | (device << 8) | (10u + r);
    p.src_port = 40100;
    p.dst_port = 53;
    p.protocol = Protocol::UDP;
    p.length = length;
    p.ip_id = ip_id;
    out.push_back(p);
    ++k;
  }
  return out;
}

// One flood. The stream is seeded by (scenario seed, victim device,
// span index), so every span is independently reproducible.
//   DDOS            spoofed-source TCP SYN-style flood: random sources from a
//                   bench block, random sport/seq, tiny constant frames, one
//                   constant ip_id (one attack tool, one counter).
//   EC_DDOS         spoofed-source UDP scan-style flood: uniformly random
//                   destination ports, constant mid-size frames.
//   MEMORY_EXHAUST  single-source TCP session flood at 40% rate with large
//                   constant frames against the device's service port.
inline std::vector<PacketRecord> generate_attack_traffic(const ScenarioConfig& cfg,
                                                         const AttackSpan& span,
                                                         std::size_t span_index) {
  Rng rng(Rng::derive(cfg.seed, 2000 + span.device, span_index));
  const uint16_t ip_id = static_cast<uint16_t>(rng.next_u64() & 0xFFFF);
  const double rate =
      cfg.attack_rate_pps * (span.kind == AttackKind::MEMORY_EXHAUST ? 0.4 : 1.0);
  const uint32_t dev_ip = device_ip_numeric(span.device);
  const double end = static_cast<double>(span.end_s);

  std::vector<PacketRecord> out;
  out.reserve(static_cast<std::size_t>(rate * (span.end_s - span.start_s) * 1.2));

  double t = static_cast<double>(span.start_s);
  for (;;) {
    t += rng.exponential(rate);
    if (t >= end) break;
    PacketRecord p;
    p.timestamp_us = kCorpusEpochUs + static_cast<uint64_t>(t * 1e6);
    p.dst_ip = dev_ip;
    p.ip_id = ip_id;
    switch (span.kind) {
      case AttackKind::DDOS: {
        uint32_t x = static_cast<uint32_t>(rng.next_below(256));
        uint32_t y = static_cast<uint32_t>(rng.next_below(256));
        p.src_ip = (198u << 24) | (18u << 16) | (x << 8) | y;
        p.src_port = static_cast<uint16_t>(1024 + rng.next_below(64512));
        p.dst_port = 80;
        p.protocol = Protocol::TCP;
        p.length = 60;
        p.tcp_seq = static_cast<uint32_t>(rng.next_u64() & 0xFFFFFFFFull);
        break;
      }
      case AttackKind::EC_DDOS: {
        uint32_t x = static_cast<uint32_t>(rng.next_below(256));
        uint32_t y = static_cast<uint32_t>(rng.next_below(256));
        p.src_ip = (198u << 24) | (18u << 16) | (x << 8) | y;
        p.src_port = static_cast<uint16_t>(1024 + rng.next_below(64512));
        p.dst_port = static_cast<uint16_t>(rng.next_below(65536));
        p.protocol = Protocol::UDP;
        p.length = 512;
        break;
      }
      case AttackKind::MEMORY_EXHAUST: {
        p.src_ip = (198u << 24) | (18u << 16) | (99u << 8) | 1u;
        p.src_port = static_cast<uint16_t>(1024 + rng.next_below(64512));
        p.dst_port = 8883;
        p.protocol = Protocol::TCP;
        p.length = 1400;
        p.tcp_seq = static_cast<uint32_t>(rng.next_u64() & 0xFFFFFFFFull);
        break;
      }
      default:
        throw ParamError("unknown attack kind");
    }
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Telemetry
// ---------------------------------------------------------------------------

// Periodic energy/memory readings for one device. Gaussian around the
// configured baseline; floods shift the means:
//   DDOS, EC_DDOS   energy +10 sigma (the radio never sleeps)
//   EC_DDOS         memory +2 sigma as well (socket churn; deliberately
//                   below any 3-sigma rule, so attribution must not fire on it)
//   MEMORY_EXHAUST  memory ramps +5 sigma -> +10 sigma across the span
//                   (allocations accumulate), ending at mean + 10 sigma
// State tags mirror the schedule: abnormal inside any span, normal outside.
inline std::vector<TelemetrySample> generate_device_telemetry(const ScenarioConfig& cfg,
                                                              uint32_t device) {
  Rng rng(Rng::derive(cfg.seed, 3000 + device));
  const uint64_t period_us = static_cast<uint64_t>(std::llround(cfg.telemetry_period_s * 1e6));
  if (period_us == 0) throw ConfigError("telemetry period rounds to zero microseconds");
  const uint64_t duration_us = static_cast<uint64_t>(cfg.duration_s) * 1'000'000ull;

  std::vector<AttackSpan> spans;
  for (const auto& s : resolved_schedule(cfg))
    if (s.device == device) spans.push_back(s);

  std::vector<TelemetrySample> out;
  out.reserve(static_cast<std::size_t>(duration_us / period_us) + 1);
  for (uint64_t k = 0; k * period_us < duration_us; ++k) {
    const uint64_t t_us = k * period_us;
    const AttackSpan* active = nullptr;
    for (const auto& s : spans) {
      if (static_cast<uint64_t>(s.start_s) * 1'000'000ull <= t_us &&
          t_us < static_cast<uint64_t>(s.end_s) * 1'000'000ull) {
        active = &s;
        break;
      }
    }

    double energy;
    if (active && active->kind != AttackKind::MEMORY_EXHAUST)
      energy = rng.normal(cfg.energy_mean_mw + 10.0 * cfg.energy_stddev_mw, cfg.energy_stddev_mw);
    else
      energy = rng.normal(cfg.energy_mean_mw, cfg.energy_stddev_mw);

    double memory;
    if (active && active->kind == AttackKind::EC_DDOS) {
      memory = rng.normal(cfg.memory_mean_kib + 2.0 * cfg.memory_stddev_kib,
                          cfg.memory_stddev_kib);
    } else if (active && active->kind == AttackKind::MEMORY_EXHAUST) {
      double f = static_cast<double>(t_us - static_cast<uint64_t>(active->start_s) * 1'000'000ull) /
                 static_cast<double>((static_cast<uint64_t>(active->end_s) -
                                      active->start_s) * 1'000'000ull);
      memory = rng.normal(cfg.memory_mean_kib + (5.0 + 5.0 * f) * cfg.memory_stddev_kib,
                          cfg.memory_stddev_kib);
    } else {
      memory = rng.normal(cfg.memory_mean_kib, cfg.memory_stddev_kib);
    }

    TelemetrySample s;
    s.timestamp_us = kCorpusEpochUs + t_us;
    s.device_id = device_ip(device);
    s.energy_mw = energy;
    s.memory_kib = memory;
    s.state = active ? DeviceState::ABNORMAL : DeviceState::NORMAL;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Window grouping over a merged capture
// ---------------------------------------------------------------------------

// Splits a capture into per-device streams (10/8 endpoint, destination
// preferred), buckets each into epoch-aligned windows split by protocol, and
// extracts one sample per non-empty group. Output order: device id
// (lexicographic), then window start, then protocol. Packets touching no
// device are ignored.
inline std::vector<WindowSample> corpus_window_samples(const std::vector<PacketRecord>& packets,
                                                       uint64_t window_us, uint64_t epoch_us) {
  if (window_us == 0) throw ParamError("window duration must be positive");
  std::map<std::string, std::vector<PacketRecord>> per_device;
  for (const auto& p : packets) {
    auto dev = packet_device_ip(p);
    if (!dev) continue;
    per_device[numeric_to_ip(*dev)].push_back(p);
  }
  std::vector<WindowSample> out;
  for (auto& [device_id, rows] : per_device) {
    auto samples = build_samples(rows, window_us, epoch_us, device_id);
    for (auto& s : samples) out.push_back(std::move(s));
  }
  return out;
}

inline uint64_t window_index_of(const WindowSample& s, uint64_t epoch_us) {
  return (s.window.start_us - epoch_us) / s.window.duration_us;
}

// ---------------------------------------------------------------------------
// Separation audit
// ---------------------------------------------------------------------------

namespace detail {

// Shared-range histogram overlap: the mass a single threshold cannot split.
inline double overlap_mass(const std::vector<double>& a, const std::vector<double>& b,
                           int bins = 64) {
  double lo = a[0], hi = a[0];
  for (double v : a) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : b) { lo = std::min(lo, v); hi = std::max(hi, v); }
  if (hi == lo) return 1.0;
  std::vector<uint64_t> ha(bins, 0), hb(bins, 0);
  auto bucket = [&](double v) {
    int i = static_cast<int>((v - lo) / (hi - lo) * bins);
    return std::min(i, bins - 1);
  };
  for (double v : a) ++ha[static_cast<std::size_t>(bucket(v))];
  for (double v : b) ++hb[static_cast<std::size_t>(bucket(v))];
  double mass = 0.0;
  for (int i = 0; i < bins; ++i)
    mass += std::min(static_cast<double>(ha[static_cast<std::size_t>(i)]) /
                         static_cast<double>(a.size()),
                     static_cast<double>(hb[static_cast<std::size_t>(i)]) /
                         static_cast<double>(b.size()));
  return mass;
}

}  // namespace detail

struct SeparationReport {
  // Overlap mass per audited feature, in this order:
  // num_packet, len_stddev, iden_entropy, dst_port_entropy.
  static constexpr std::size_t kAuditedCount = 4;
  static constexpr std::array<std::size_t, kAuditedCount> kAuditedFeatures{0, 2, 3, 5};
  std::array<double, kAuditedCount> overlap{};
  std::size_t normal_windows = 0;
  std::size_t attacked_windows = 0;
  bool checked = false;  // false when either population is empty
};

inline constexpr double kSeparationLimit = 0.05;

// Audits whether the generated populations are learnable: for each
// single-threshold signature feature, the normal and attacked window
// populations (labeled per protocol) must overlap in less than 5% of mass.
// Windows of both protocols pool into one population per side.
inline SeparationReport audit_separation(const ScenarioConfig& cfg,
                                         const std::vector<PacketRecord>& packets,
                                         const std::vector<AttackSpan>& schedule) {
  const uint64_t window_us = static_cast<uint64_t>(cfg.window_s) * 1'000'000ull;
  auto samples = corpus_window_samples(packets, window_us, kCorpusEpochUs);

  SeparationReport rep;
  std::array<std::vector<double>, SeparationReport::kAuditedCount> normal_vals, attack_vals;
  for (const auto& s : samples) {
    uint32_t device = (ip_to_numeric(s.window.device_id) & 0xFF) - 1;
    Label lbl = training_label(schedule, device, window_index_of(s, kCorpusEpochUs), window_us,
                               s.protocol);
    auto row = s.features.to_array();
    auto& target = lbl == Label::ATTACKED ? attack_vals : normal_vals;
    (lbl == Label::ATTACKED ? rep.attacked_windows : rep.normal_windows) += 1;
    for (std::size_t j = 0; j < SeparationReport::kAuditedCount; ++j)
      target[j].push_back(row[SeparationReport::kAuditedFeatures[j]]);
  }
  if (rep.normal_windows == 0 || rep.attacked_windows == 0) return rep;
  rep.checked = true;
  for (std::size_t j = 0; j < SeparationReport::kAuditedCount; ++j)
    rep.overlap[j] = detail::overlap_mass(normal_vals[j], attack_vals[j]);
  return rep;
}

// ---------------------------------------------------------------------------
// Corpus assembly
// ---------------------------------------------------------------------------

inline SyntheticCorpus build_corpus(const ScenarioConfig& cfg) {
  validate(cfg);
  SyntheticCorpus corpus;
  corpus.schedule = resolved_schedule(cfg);
  corpus.window_us = static_cast<uint64_t>(cfg.window_s) * 1'000'000ull;

  for (uint32_t d = 0; d < cfg.devices; ++d) {
    auto normal = generate_normal_traffic(cfg, d);
    corpus.packets.insert(corpus.packets.end(), normal.begin(), normal.end());
  }
  for (std::size_t i = 0; i < corpus.schedule.size(); ++i) {
    auto attack = generate_attack_traffic(cfg, corpus.schedule[i], i);
    corpus.packets.insert(corpus.packets.end(), attack.begin(), attack.end());
  }
  std::stable_sort(corpus.packets.begin(), corpus.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_us < b.timestamp_us;
                   });

  for (uint32_t d = 0; d < cfg.devices; ++d) {
    auto rows = generate_device_telemetry(cfg, d);
    corpus.telemetry.insert(corpus.telemetry.end(), rows.begin(), rows.end());
  }
  std::stable_sort(corpus.telemetry.begin(), corpus.telemetry.end(),
                   [](const TelemetrySample& a, const TelemetrySample& b) {
                     return a.timestamp_us < b.timestamp_us;
                   });

  const uint64_t windows_per_device =
      (static_cast<uint64_t>(cfg.duration_s) + cfg.window_s - 1) / cfg.window_s;
  corpus.truth.reserve(cfg.devices * windows_per_device);
  for (uint32_t d = 0; d < cfg.devices; ++d) {
    for (uint64_t k = 0; k < windows_per_device; ++k) {
      WindowTruth t;
      t.device_id = device_ip(d);
      t.window_index = k;
      t.label = window_label(corpus.schedule, d, k, corpus.window_us);
      t.intended = intended_verdict(corpus.schedule, d, k, corpus.window_us);
      corpus.truth.push_back(std::move(t));
    }
  }

  SeparationReport rep = audit_separation(cfg, corpus.packets, corpus.schedule);
  if (rep.checked) {
    for (std::size_t j = 0; j < SeparationReport::kAuditedCount; ++j) {
      if (!(rep.overlap[j] < kSeparationLimit)) {
        static const char* names[] = {"num_packet", "len_stddev", "iden_entropy",
                                      "dst_port_entropy"};
        throw ConfigError(std::string("signature separation failed: ") + names[j] +
                          " normal/attacked overlap " + std::to_string(rep.overlap[j]) +
                          " (limit " + std::to_string(kSeparationLimit) + ")");
      }
    }
  }
  return corpus;
}

}  // namespace rcdetect
