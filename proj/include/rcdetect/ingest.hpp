#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "rcdetect/csv.hpp"
#include "rcdetect/errors.hpp"
#include "rcdetect/traffic.hpp"

namespace rcdetect {

// Parsed capture plus an audit trail: every input record is either in `rows`
// or accounted for in `dropped`, so rows + total drops = input records.
struct RawDataset {
  std::vector<PacketRecord> rows;
  std::string source;
  std::string format;                       // "pcap" or "csv"
  std::map<std::string, uint64_t> dropped;  // reason -> count

  uint64_t total_dropped() const {
    uint64_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
  }
  uint64_t input_count() const { return rows.size() + total_dropped(); }
};

namespace detail {

inline uint16_t read_be16(const uint8_t* p) {
  return static_cast<uint16_t>((p[0] << 8) | p[1]);
}

inline uint32_t read_be32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

inline uint32_t read_u32(const uint8_t* p, bool big_endian) {
  return big_endian ? read_be32(p)
                    : (static_cast<uint32_t>(p[3]) << 24) | (static_cast<uint32_t>(p[2]) << 16) |
                          (static_cast<uint32_t>(p[1]) << 8) | p[0];
}

inline void put_be16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

inline void put_be32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

inline void put_le32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

inline void put_le16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

inline uint16_t ipv4_header_checksum(const uint8_t* hdr, std::size_t len) {
  uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2) sum += read_be16(hdr + i);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<uint16_t>(~sum);
}

}  // namespace detail

// Classic pcap (not pcapng), Ethernet link type only. Header fields follow
// the file's magic byte order; packet contents are network order regardless.
inline RawDataset parse_pcap(std::span<const uint8_t> bytes, std::string source = "<memory>") {
  RawDataset ds;
  ds.source = std::move(source);
  ds.format = "pcap";

  if (bytes.size() >= 4 && bytes[0] == 0x0a && bytes[1] == 0x0d && bytes[2] == 0x0d &&
      bytes[3] == 0x0a)
    throw FormatError("pcapng input is not supported; supply a classic pcap capture");
  if (bytes.size() < 24) throw FormatError("pcap global header truncated");

  bool big_endian;
  if (bytes[0] == 0xa1 && bytes[1] == 0xb2 && bytes[2] == 0xc3 && bytes[3] == 0xd4) {
    big_endian = true;
  } else if (bytes[0] == 0xd4 && bytes[1] == 0xc3 && bytes[2] == 0xb2 && bytes[3] == 0xa1) {
    big_endian = false;
  } else {
    throw FormatError("bad pcap magic");
  }

  uint32_t link_type = detail::read_u32(bytes.data() + 20, big_endian);
  if (link_type != 1)
    throw UnsupportedLinkTypeError("unsupported pcap link type " + std::to_string(link_type) +
                                   " (only Ethernet is handled)");

  std::size_t pos = 24;
  std::size_t index = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 16)
      throw TruncationError("truncated pcap record header at packet " + std::to_string(index),
                            index);
    uint32_t ts_sec = detail::read_u32(bytes.data() + pos, big_endian);
    uint32_t ts_usec = detail::read_u32(bytes.data() + pos + 4, big_endian);
    uint32_t incl_len = detail::read_u32(bytes.data() + pos + 8, big_endian);
    pos += 16;
    if (bytes.size() - pos < incl_len)
      throw TruncationError("pcap record " + std::to_string(index) + " declares " +
                                std::to_string(incl_len) + " captured bytes but only " +
                                std::to_string(bytes.size() - pos) + " remain",
                            index);
    const uint8_t* frame = bytes.data() + pos;
    pos += incl_len;
    ++index;

    if (incl_len < 14) {
      ++ds.dropped["malformed"];
      continue;
    }
    uint16_t ethertype = detail::read_be16(frame + 12);
    if (ethertype != 0x0800) {
      ++ds.dropped["non-IPv4"];
      continue;
    }
    const uint8_t* ip = frame + 14;
    std::size_t ip_avail = incl_len - 14;
    if (ip_avail < 20 || (ip[0] >> 4) != 4) {
      ++ds.dropped[(ip_avail >= 1 && (ip[0] >> 4) != 4) ? "non-IPv4" : "malformed"];
      continue;
    }
    std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    if (ihl < 20 || ip_avail < ihl) {
      ++ds.dropped["malformed"];
      continue;
    }

    PacketRecord rec;
    rec.timestamp_us = static_cast<uint64_t>(ts_sec) * 1'000'000ull + ts_usec;
    rec.length = incl_len;
    rec.ip_id = detail::read_be16(ip + 4);
    rec.src_ip = detail::read_be32(ip + 12);
    rec.dst_ip = detail::read_be32(ip + 16);

    uint8_t proto = ip[9];
    const uint8_t* transport = ip + ihl;
    std::size_t t_avail = ip_avail - ihl;
    if (proto == 6) {
      if (t_avail < 8) {
        ++ds.dropped["malformed"];
        continue;
      }
      rec.protocol = Protocol::TCP;
      rec.src_port = detail::read_be16(transport);
      rec.dst_port = detail::read_be16(transport + 2);
      rec.tcp_seq = detail::read_be32(transport + 4);
    } else if (proto == 17) {
      if (t_avail < 4) {
        ++ds.dropped["malformed"];
        continue;
      }
      rec.protocol = Protocol::UDP;
      rec.src_port = detail::read_be16(transport);
      rec.dst_port = detail::read_be16(transport + 2);
    } else {
      ++ds.dropped["other-proto"];
      continue;
    }
    ds.rows.push_back(std::move(rec));
  }
  return ds;
}

// Serializes records back to a little-endian classic pcap with synthesized
// Ethernet framing. parse_pcap(write_pcap(rows)) reproduces rows field-exact,
// which is what the generator and the fixtures rely on.
inline std::vector<uint8_t> write_pcap(const std::vector<PacketRecord>& records) {
  std::vector<uint8_t> out;
  detail::put_le32(out, 0xa1b2c3d4u);
  detail::put_le16(out, 2);
  detail::put_le16(out, 4);
  detail::put_le32(out, 0);       // thiszone
  detail::put_le32(out, 0);       // sigfigs
  detail::put_le32(out, 65535);   // snaplen
  detail::put_le32(out, 1);       // Ethernet

  for (const auto& rec : records) {
    if (rec.protocol == Protocol::OTHER)
      throw ParamError("cannot serialize OTHER-protocol records to pcap");
    std::size_t transport_len = rec.protocol == Protocol::TCP ? 20 : 8;
    std::size_t min_len = 14 + 20 + transport_len;
    if (rec.length < min_len)
      throw ParamError("record length " + std::to_string(rec.length) +
                       " below minimum frame size " + std::to_string(min_len));
    if (rec.length > 65535 + 14)
      throw ParamError("record length exceeds maximum IPv4 frame");

    detail::put_le32(out, static_cast<uint32_t>(rec.timestamp_us / 1'000'000ull));
    detail::put_le32(out, static_cast<uint32_t>(rec.timestamp_us % 1'000'000ull));
    detail::put_le32(out, rec.length);
    detail::put_le32(out, rec.length);

    // Ethernet: locally-administered MACs derived from the addresses.
    std::vector<uint8_t> frame;
    frame.reserve(rec.length);
    frame.push_back(0x02);
    frame.push_back(0x00);
    detail::put_be32(frame, rec.dst_ip);
    frame.push_back(0x02);
    frame.push_back(0x00);
    detail::put_be32(frame, rec.src_ip);
    detail::put_be16(frame, 0x0800);

    uint16_t ip_total = static_cast<uint16_t>(rec.length - 14);
    std::size_t ip_start = frame.size();
    frame.push_back(0x45);  // version 4, ihl 5
    frame.push_back(0x00);
    detail::put_be16(frame, ip_total);
    detail::put_be16(frame, rec.ip_id);
    detail::put_be16(frame, 0x0000);  // flags/fragment
    frame.push_back(64);              // ttl
    frame.push_back(rec.protocol == Protocol::TCP ? 6 : 17);
    detail::put_be16(frame, 0x0000);  // checksum, patched below
    detail::put_be32(frame, rec.src_ip);
    detail::put_be32(frame, rec.dst_ip);
    uint16_t csum = detail::ipv4_header_checksum(frame.data() + ip_start, 20);
    frame[ip_start + 10] = static_cast<uint8_t>(csum >> 8);
    frame[ip_start + 11] = static_cast<uint8_t>(csum & 0xff);

    if (rec.protocol == Protocol::TCP) {
      detail::put_be16(frame, rec.src_port);
      detail::put_be16(frame, rec.dst_port);
      detail::put_be32(frame, rec.tcp_seq.value_or(0));
      detail::put_be32(frame, 0);       // ack
      detail::put_be16(frame, 0x5010);  // data offset 5, ACK
      detail::put_be16(frame, 0x0400);  // window
      detail::put_be16(frame, 0x0000);  // checksum (not validated on read)
      detail::put_be16(frame, 0x0000);  // urgent
    } else {
      detail::put_be16(frame, rec.src_port);
      detail::put_be16(frame, rec.dst_port);
      detail::put_be16(frame, static_cast<uint16_t>(ip_total - 20));
      detail::put_be16(frame, 0x0000);
    }
    frame.resize(rec.length, 0x00);  // payload padding
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

inline std::vector<uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_binary_file(const std::filesystem::path& path,
                              std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline RawDataset parse_pcap_file(const std::filesystem::path& path) {
  auto bytes = read_binary_file(path);
  return parse_pcap(bytes, path.string());
}

// Logical column -> header name. tcp_seq is optional: without it TCP rows
// get sequence 0.
struct CsvSchema {
  std::string timestamp = "timestamp_us";
  std::string src_ip = "src_ip";
  std::string dst_ip = "dst_ip";
  std::string src_port = "src_port";
  std::string dst_port = "dst_port";
  std::string protocol = "protocol";
  std::string bytes = "bytes";
  std::string ip_id = "ip_id";
  std::string tcp_seq = "tcp_seq";
};

inline RawDataset parse_packet_csv(std::istream& in, const CsvSchema& schema = {},
                                   std::string source = "<memory>") {
  CsvTable table = read_csv(in);
  RawDataset ds;
  ds.source = std::move(source);
  ds.format = "csv";

  auto require = [&](const std::string& name) {
    int idx = table.column(name);
    if (idx < 0) throw SchemaError("missing required CSV column \"" + name + "\"");
    return idx;
  };
  int c_ts = require(schema.timestamp);
  int c_src = require(schema.src_ip);
  int c_dst = require(schema.dst_ip);
  int c_sport = require(schema.src_port);
  int c_dport = require(schema.dst_port);
  int c_proto = require(schema.protocol);
  int c_bytes = require(schema.bytes);
  int c_ipid = require(schema.ip_id);
  int c_seq = table.column(schema.tcp_seq);  // optional

  for (const auto& row : table.rows) {
    auto field = [&](int idx) -> const std::string& {
      static const std::string empty;
      return idx >= 0 && static_cast<std::size_t>(idx) < row.size() ? row[idx] : empty;
    };
    std::string proto_text = field(c_proto);
    std::transform(proto_text.begin(), proto_text.end(), proto_text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    Protocol proto;
    if (proto_text == "tcp" || proto_text == "6") {
      proto = Protocol::TCP;
    } else if (proto_text == "udp" || proto_text == "17") {
      proto = Protocol::UDP;
    } else {
      ++ds.dropped["other-proto"];
      continue;
    }
    try {
      PacketRecord rec;
      rec.timestamp_us = parse_u64_field(field(c_ts), "timestamp");
      rec.src_ip = ip_to_numeric(field(c_src));
      rec.dst_ip = ip_to_numeric(field(c_dst));
      uint64_t sport = parse_u64_field(field(c_sport), "src_port");
      uint64_t dport = parse_u64_field(field(c_dport), "dst_port");
      uint64_t len = parse_u64_field(field(c_bytes), "bytes");
      uint64_t ipid = parse_u64_field(field(c_ipid), "ip_id");
      if (sport > 0xffff || dport > 0xffff || ipid > 0xffff || len > 0xffffffffull)
        throw ParseError("field out of range");
      rec.src_port = static_cast<uint16_t>(sport);
      rec.dst_port = static_cast<uint16_t>(dport);
      rec.length = static_cast<uint32_t>(len);
      rec.ip_id = static_cast<uint16_t>(ipid);
      rec.protocol = proto;
      if (proto == Protocol::TCP) {
        const std::string& seq = field(c_seq);
        uint64_t s = seq.empty() ? 0 : parse_u64_field(seq, "tcp_seq");
        if (s > 0xffffffffull) throw ParseError("tcp_seq out of range");
        rec.tcp_seq = static_cast<uint32_t>(s);
      }
      ds.rows.push_back(std::move(rec));
    } catch (const ParseError&) {
      ++ds.dropped["malformed"];
    }
  }
  return ds;
}

// Default column order for packet CSV output; matches the CsvSchema default
// names, so parse_packet_csv reads the writer's output back unchanged.
inline const std::vector<std::string>& packet_csv_header() {
  static const std::vector<std::string> h = {"timestamp_us", "src_ip",   "dst_ip",
                                             "src_port",     "dst_port", "protocol",
                                             "bytes",        "ip_id",    "tcp_seq"};
  return h;
}

inline CsvTable packets_to_csv(const std::vector<PacketRecord>& records) {
  CsvTable t;
  t.header = packet_csv_header();
  t.rows.reserve(records.size());
  for (const auto& r : records) {
    if (r.protocol == Protocol::OTHER)
      throw ParamError("cannot serialize OTHER-protocol records to packet CSV");
    t.rows.push_back({std::to_string(r.timestamp_us), numeric_to_ip(r.src_ip),
                      numeric_to_ip(r.dst_ip), std::to_string(r.src_port),
                      std::to_string(r.dst_port), to_string(r.protocol),
                      std::to_string(r.length), std::to_string(r.ip_id),
                      r.tcp_seq ? std::to_string(*r.tcp_seq) : std::string()});
  }
  return t;
}

namespace detail {

struct PacketRecordHash {
  std::size_t operator()(const PacketRecord& r) const {
    auto mix = [](uint64_t z) {
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      return z ^ (z >> 31);
    };
    uint64_t h = mix(r.timestamp_us);
    h = mix(h ^ ((static_cast<uint64_t>(r.src_ip) << 32) | r.dst_ip));
    h = mix(h ^ ((static_cast<uint64_t>(r.src_port) << 48) |
                 (static_cast<uint64_t>(r.dst_port) << 32) | r.length));
    h = mix(h ^ ((static_cast<uint64_t>(r.ip_id) << 40) |
                 (static_cast<uint64_t>(r.protocol) << 36) |
                 static_cast<uint64_t>(r.tcp_seq.value_or(0))));
    return static_cast<std::size_t>(h);
  }
};

inline bool is_noisy(const PacketRecord& r) {
  // Sentinel rule: zero length, zero timestamp, or zero port on TCP/UDP.
  if (r.length == 0 || r.timestamp_us == 0) return true;
  if (r.protocol != Protocol::OTHER && (r.src_port == 0 || r.dst_port == 0)) return true;
  return false;
}

}  // namespace detail

// Removes field-wise duplicates (first occurrence wins) and sentinel-valued
// records, preserving order. Idempotent; drop counts accumulate onto the
// input's counts so conservation holds end to end.
inline RawDataset clean_dataset(const RawDataset& raw) {
  RawDataset out;
  out.source = raw.source;
  out.format = raw.format;
  out.dropped = raw.dropped;
  std::unordered_set<PacketRecord, detail::PacketRecordHash> seen;
  seen.reserve(raw.rows.size());
  for (const auto& rec : raw.rows) {
    if (detail::is_noisy(rec)) {
      ++out.dropped["missing-field"];
      continue;
    }
    if (!seen.insert(rec).second) {
      ++out.dropped["duplicate"];
      continue;
    }
    out.rows.push_back(rec);
  }
  return out;
}

// Half-open attack span for one device.
struct AttackInterval {
  uint64_t start_us = 0;
  uint64_t end_us = 0;
  std::string device_id;
};

// A window is ATTACKED iff it intersects an interval for its device.
// Intervals must be non-overlapping per device.
inline std::vector<Label> join_labels(const std::vector<TimeWindow>& windows,
                                      std::vector<AttackInterval> intervals) {
  for (const auto& iv : intervals)
    if (iv.end_us <= iv.start_us)
      throw ConfigError("attack interval for device \"" + iv.device_id +
                        "\" is empty or inverted");
  std::sort(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) {
    return a.device_id != b.device_id ? a.device_id < b.device_id : a.start_us < b.start_us;
  });
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].device_id == intervals[i - 1].device_id &&
        intervals[i].start_us < intervals[i - 1].end_us)
      throw ConfigError("overlapping attack intervals for device \"" +
                        intervals[i].device_id + "\"");
  }

  std::vector<Label> labels;
  labels.reserve(windows.size());
  for (const auto& w : windows) {
    bool attacked = false;
    for (const auto& iv : intervals) {
      if (iv.device_id == w.device_id && w.start_us < iv.end_us && iv.start_us < w.end_us()) {
        attacked = true;
        break;
      }
    }
    labels.push_back(attacked ? Label::ATTACKED : Label::NORMAL);
  }
  return labels;
}

}  // namespace rcdetect
