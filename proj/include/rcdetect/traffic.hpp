#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "rcdetect/errors.hpp"

namespace rcdetect {

enum class Protocol : uint8_t { TCP, UDP, OTHER };

enum class Label : uint8_t { NORMAL, ATTACKED };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::TCP: return "tcp";
    case Protocol::UDP: return "udp";
    default: return "other";
  }
}

inline const char* to_string(Label l) { return l == Label::ATTACKED ? "attacked" : "normal"; }

// One parsed packet. Timestamps are integer microseconds since epoch; float
// time would drift under window arithmetic. IPv4 only.
struct PacketRecord {
  uint64_t timestamp_us = 0;
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint16_t src_port = 0;  // 0 only when protocol == OTHER
  uint16_t dst_port = 0;
  Protocol protocol = Protocol::OTHER;
  uint32_t length = 0;  // captured frame length in bytes
  uint16_t ip_id = 0;
  std::optional<uint32_t> tcp_seq;  // present iff protocol == TCP

  bool operator==(const PacketRecord&) const = default;
};

// Direction is significant (attacker -> victim), so no canonicalization.
struct FlowKey {
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  Protocol protocol = Protocol::OTHER;

  bool operator==(const FlowKey&) const = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const {
    std::size_t h = std::hash<uint64_t>{}(
        (static_cast<uint64_t>(k.src_ip) << 32) | k.dst_ip);
    uint64_t rest = (static_cast<uint64_t>(k.src_port) << 24) |
                    (static_cast<uint64_t>(k.dst_port) << 8) |
                    static_cast<uint64_t>(k.protocol);
    return h ^ (std::hash<uint64_t>{}(rest) + 0x9e3779b9 + (h << 6) + (h >> 2));
  }
};

// Fixed-duration per-device bucket. Windows are aligned to
// epoch + k * duration and treated as half-open [start, start + duration).
struct TimeWindow {
  uint64_t start_us = 0;
  uint64_t duration_us = 0;
  std::string device_id;

  uint64_t end_us() const { return start_us + duration_us; }
  bool contains(uint64_t ts_us) const { return ts_us >= start_us && ts_us < end_us(); }

  bool operator==(const TimeWindow&) const = default;
};

// Dotted-quad IPv4 to its numeric value (a*2^24 + b*2^16 + c*2^8 + d).
// Rejects anything else, IPv6 included.
inline uint32_t ip_to_numeric(std::string_view dotted) {
  uint32_t value = 0;
  std::size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    std::size_t start = pos;
    uint32_t v = 0;
    std::size_t digits = 0;
    while (pos < dotted.size() && dotted[pos] >= '0' && dotted[pos] <= '9') {
      v = v * 10 + static_cast<uint32_t>(dotted[pos] - '0');
      ++digits;
      ++pos;
      if (digits > 3) break;
    }
    if (digits == 0 || digits > 3 || v > 255) {
      std::size_t end = dotted.find('.', start);
      std::string bad(dotted.substr(start, end == std::string_view::npos ? dotted.size() - start
                                                                         : end - start));
      throw ParseError("invalid IPv4 octet \"" + bad + "\" in \"" + std::string(dotted) + "\"");
    }
    value = (value << 8) | v;
    if (octet < 3) {
      if (pos >= dotted.size() || dotted[pos] != '.')
        throw ParseError("malformed IPv4 address \"" + std::string(dotted) + "\"");
      ++pos;
    }
  }
  if (pos != dotted.size())
    throw ParseError("malformed IPv4 address \"" + std::string(dotted) + "\"");
  return value;
}

inline std::string numeric_to_ip(uint32_t v) {
  return std::to_string(v >> 24) + "." + std::to_string((v >> 16) & 0xff) + "." +
         std::to_string((v >> 8) & 0xff) + "." + std::to_string(v & 0xff);
}

// Buckets a packet into its window: start <= timestamp < start + duration and
// (start - epoch) divisible by duration.
inline TimeWindow assign_window(const PacketRecord& pkt, uint64_t duration_us,
                                uint64_t epoch_us, std::string device_id = {}) {
  if (duration_us == 0) throw ParamError("window duration must be positive");
  if (pkt.timestamp_us < epoch_us)
    throw ParamError("packet timestamp " + std::to_string(pkt.timestamp_us) +
                     " precedes window epoch " + std::to_string(epoch_us));
  uint64_t k = (pkt.timestamp_us - epoch_us) / duration_us;
  return TimeWindow{epoch_us + k * duration_us, duration_us, std::move(device_id)};
}

}  // namespace rcdetect
