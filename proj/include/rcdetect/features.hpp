#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rcdetect/errors.hpp"
#include "rcdetect/traffic.hpp"

namespace rcdetect {

// Per-(device, window, protocol) traffic descriptors. Counts are carried as
// doubles so a sample is directly usable as a model input row.
struct FeatureVector {
  double num_packet = 0;
  double mean_len = 0;
  double len_stddev = 0;
  double iden_entropy = 0;           // bits over ip_id values
  double seq_irregularity = 0;       // TCP only; 0 for UDP
  double dst_port_entropy = 0;       // bits over destination ports
  double dominant_port_fraction = 0; // share of the most common destination port
  double dst_ip_count = 0;
  double src_ip_count = 0;

  static constexpr std::size_t kCount = 9;

  static const std::array<std::string, kCount>& names() {
    static const std::array<std::string, kCount> n = {
        "num_packet",       "mean_len",        "len_stddev",
        "iden_entropy",     "seq_irregularity", "dst_port_entropy",
        "dominant_port_fraction", "dst_ip_count", "src_ip_count"};
    return n;
  }

  std::array<double, kCount> to_array() const {
    return {num_packet,       mean_len,         len_stddev,
            iden_entropy,     seq_irregularity, dst_port_entropy,
            dominant_port_fraction, dst_ip_count, src_ip_count};
  }

  std::vector<double> to_row() const {
    auto a = to_array();
    return std::vector<double>(a.begin(), a.end());
  }

  static FeatureVector from_array(const std::array<double, kCount>& a) {
    FeatureVector f;
    f.num_packet = a[0];
    f.mean_len = a[1];
    f.len_stddev = a[2];
    f.iden_entropy = a[3];
    f.seq_irregularity = a[4];
    f.dst_port_entropy = a[5];
    f.dominant_port_fraction = a[6];
    f.dst_ip_count = a[7];
    f.src_ip_count = a[8];
    return f;
  }

  bool operator==(const FeatureVector&) const = default;
};

struct WindowSample {
  TimeWindow window;
  Protocol protocol = Protocol::OTHER;
  FeatureVector features;
};

namespace detail {

// Shannon entropy in bits of a value multiset, computed as
// log2(n) - (1/n) * sum(c * log2(c)). This form is exact for the two cases
// the detectors key on: all-distinct (-> log2 n) and all-equal (-> 0).
template <class Map>
double entropy_bits(const Map& counts, std::size_t n) {
  if (n <= 1) return 0.0;
  double acc = 0.0;
  for (const auto& [_, c] : counts)
    if (c > 1) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
  return std::log2(static_cast<double>(n)) - acc / static_cast<double>(n);
}

inline double population_stddev(const std::vector<double>& xs) {
  if (xs.size() <= 1) return 0.0;
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace detail

// Computes the descriptor for one already-grouped set of packets. Packets
// are ordered by timestamp internally (stably), so callers may pass them in
// any order. All statistics are population statistics.
inline FeatureVector extract_features(std::vector<PacketRecord> packets, Protocol protocol) {
  if (packets.empty()) throw EmptyWindowError("cannot extract features from an empty group");
  std::stable_sort(packets.begin(), packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_us < b.timestamp_us;
                   });
  const std::size_t n = packets.size();

  FeatureVector f;
  f.num_packet = static_cast<double>(n);

  std::vector<double> lens;
  lens.reserve(n);
  std::unordered_map<uint16_t, uint64_t> id_counts;
  std::unordered_map<uint16_t, uint64_t> port_counts;
  std::unordered_set<uint32_t> dsts, srcs;
  double len_sum = 0;
  for (const auto& p : packets) {
    lens.push_back(p.length);
    len_sum += p.length;
    ++id_counts[p.ip_id];
    ++port_counts[p.dst_port];
    dsts.insert(p.dst_ip);
    srcs.insert(p.src_ip);
  }
  f.mean_len = len_sum / static_cast<double>(n);
  f.len_stddev = detail::population_stddev(lens);
  f.iden_entropy = detail::entropy_bits(id_counts, n);
  f.dst_port_entropy = detail::entropy_bits(port_counts, n);
  uint64_t dominant = 0;
  for (const auto& [_, c] : port_counts) dominant = std::max(dominant, c);
  f.dominant_port_fraction = static_cast<double>(dominant) / static_cast<double>(n);
  f.dst_ip_count = static_cast<double>(dsts.size());
  f.src_ip_count = static_cast<double>(srcs.size());

  if (protocol == Protocol::TCP && n >= 2) {
    // Dispersion of first differences of the sequence numbers, normalized by
    // their magnitude: a steady sender progresses arithmetically (-> 0),
    // forged floods jump around (-> about 1).
    std::vector<double> diffs;
    diffs.reserve(n - 1);
    double abs_sum = 0;
    for (std::size_t i = 1; i < n; ++i) {
      double d = static_cast<double>(static_cast<int64_t>(packets[i].tcp_seq.value_or(0)) -
                                     static_cast<int64_t>(packets[i - 1].tcp_seq.value_or(0)));
      diffs.push_back(d);
      abs_sum += std::abs(d);
    }
    double mean_abs = abs_sum / static_cast<double>(diffs.size());
    f.seq_irregularity = detail::population_stddev(diffs) / (1.0 + mean_abs);
  }
  return f;
}

using FeatureRow = std::vector<double>;

// Per-feature affine transform learned on training data. Distance- and
// margin-based models need commensurate scales; trees are unaffected but
// trained on the same representation for uniformity.
struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> stddev;          // constant features get 1 and a flag
  std::vector<bool> constant_feature;

  std::size_t dim() const { return mean.size(); }

  FeatureRow apply(const FeatureRow& x) const {
    if (x.size() != mean.size())
      throw ShapeError("feature row has " + std::to_string(x.size()) +
                       " values, standardization expects " + std::to_string(mean.size()));
    FeatureRow out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / stddev[j];
    return out;
  }

  bool operator==(const StandardizationParams&) const = default;
};

inline StandardizationParams learn_standardization(const std::vector<FeatureRow>& rows) {
  if (rows.size() < 2)
    throw ParamError("standardization needs at least 2 samples, got " +
                     std::to_string(rows.size()));
  const std::size_t d = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != d) throw ShapeError("inconsistent feature dimensions");
    for (double v : r)
      if (!std::isfinite(v)) throw ShapeError("non-finite feature value");
  }
  StandardizationParams p;
  p.mean.assign(d, 0.0);
  p.stddev.assign(d, 0.0);
  p.constant_feature.assign(d, false);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) p.mean[j] += r[j];
  for (std::size_t j = 0; j < d; ++j) p.mean[j] /= n;
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) {
      double dv = r[j] - p.mean[j];
      p.stddev[j] += dv * dv;
    }
  for (std::size_t j = 0; j < d; ++j) {
    p.stddev[j] = std::sqrt(p.stddev[j] / n);
    if (p.stddev[j] == 0.0) {
      p.stddev[j] = 1.0;
      p.constant_feature[j] = true;
    }
  }
  return p;
}

inline std::vector<FeatureRow> apply_standardization(const StandardizationParams& p,
                                                     const std::vector<FeatureRow>& rows) {
  std::vector<FeatureRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(p.apply(r));
  return out;
}

// Buckets a capture into epoch-aligned windows split by protocol and extracts
// one sample per non-empty (window, protocol) group. Samples come out sorted
// by (window start, protocol); records with protocols other than tcp/udp are
// ignored.
inline std::vector<WindowSample> build_samples(const std::vector<PacketRecord>& packets,
                                               uint64_t duration_us, uint64_t epoch_us,
                                               const std::string& device_id) {
  if (duration_us == 0) throw ParamError("window duration must be positive");
  std::map<std::pair<uint64_t, Protocol>, std::vector<PacketRecord>> groups;
  for (const auto& p : packets) {
    if (p.protocol == Protocol::OTHER) continue;
    TimeWindow w = assign_window(p, duration_us, epoch_us);
    groups[{w.start_us, p.protocol}].push_back(p);
  }
  std::vector<WindowSample> out;
  out.reserve(groups.size());
  for (auto& [key, group] : groups) {
    WindowSample s;
    s.window = TimeWindow{key.first, duration_us, device_id};
    s.protocol = key.second;
    s.features = extract_features(std::move(group), key.second);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rcdetect
