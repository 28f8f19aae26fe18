#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "rcdetect/features.hpp"

using namespace rcdetect;

namespace {

PacketRecord make_udp(uint64_t ts_us, uint32_t len, uint16_t ip_id, uint16_t dst_port = 53,
                      uint32_t src_ip = 0x0a000001, uint32_t dst_ip = 0x0a000002) {
  PacketRecord p;
  p.timestamp_us = ts_us;
  p.src_ip = src_ip;
  p.dst_ip = dst_ip;
  p.src_port = 5000;
  p.dst_port = dst_port;
  p.protocol = Protocol::UDP;
  p.length = len;
  p.ip_id = ip_id;
  return p;
}

PacketRecord make_tcp(uint64_t ts_us, uint32_t seq, uint16_t ip_id = 1) {
  PacketRecord p = make_udp(ts_us, 60, ip_id, 80);
  p.protocol = Protocol::TCP;
  p.tcp_seq = seq;
  return p;
}

}  // namespace

TEST_CASE("length statistics are the population mean and stddev") {
  std::vector<PacketRecord> pkts;
  int i = 0;
  for (uint32_t len : {60u, 60u, 60u, 60u, 1500u}) pkts.push_back(make_udp(1000 + i++, len, 1));
  FeatureVector f = extract_features(pkts, Protocol::UDP);
  CHECK(f.num_packet == 5.0);
  CHECK(f.mean_len == 348.0);
  CHECK(f.len_stddev == 576.0);
}

TEST_CASE("identifier entropy hits the exact endpoints") {
  SECTION("all-distinct identifiers give log2(n) bits") {
    std::vector<PacketRecord> pkts;
    for (uint16_t id : {10, 20, 30, 40}) pkts.push_back(make_udp(id, 60, id));
    CHECK(extract_features(pkts, Protocol::UDP).iden_entropy == 2.0);
  }
  SECTION("a constant identifier gives zero bits") {
    std::vector<PacketRecord> pkts;
    for (int t = 0; t < 4; ++t) pkts.push_back(make_udp(1000 + t, 60, 0x7777));
    CHECK(extract_features(pkts, Protocol::UDP).iden_entropy == 0.0);
  }
  SECTION("two values twice each give one bit") {
    std::vector<PacketRecord> pkts = {make_udp(1, 60, 5), make_udp(2, 60, 5),
                                      make_udp(3, 60, 9), make_udp(4, 60, 9)};
    CHECK(extract_features(pkts, Protocol::UDP).iden_entropy == 1.0);
  }
  SECTION("a three-one split matches the closed form") {
    std::vector<PacketRecord> pkts = {make_udp(1, 60, 5), make_udp(2, 60, 5),
                                      make_udp(3, 60, 5), make_udp(4, 60, 9)};
    CHECK(extract_features(pkts, Protocol::UDP).iden_entropy ==
          Catch::Approx(0.8112781244591329).epsilon(1e-12));
  }
  SECTION("a single packet carries no entropy") {
    std::vector<PacketRecord> pkts = {make_udp(1, 60, 5)};
    CHECK(extract_features(pkts, Protocol::UDP).iden_entropy == 0.0);
  }
}

TEST_CASE("sequence irregularity separates steady from erratic progressions") {
  SECTION("an arithmetic progression is perfectly regular") {
    std::vector<PacketRecord> pkts = {make_tcp(1, 1000), make_tcp(2, 1100), make_tcp(3, 1200),
                                      make_tcp(4, 1300)};
    CHECK(extract_features(pkts, Protocol::TCP).seq_irregularity == 0.0);
  }
  SECTION("erratic jumps match the frozen reference value") {
    std::vector<PacketRecord> pkts = {make_tcp(1, 0), make_tcp(2, 1000), make_tcp(3, 1100),
                                      make_tcp(4, 4000)};
    CHECK(extract_features(pkts, Protocol::TCP).seq_irregularity ==
          Catch::Approx(0.8747010442174168).epsilon(1e-12));
  }
  SECTION("differences follow timestamp order, not input order") {
    std::vector<PacketRecord> pkts = {make_tcp(4, 4000), make_tcp(1, 0), make_tcp(3, 1100),
                                      make_tcp(2, 1000)};
    CHECK(extract_features(pkts, Protocol::TCP).seq_irregularity ==
          Catch::Approx(0.8747010442174168).epsilon(1e-12));
  }
  SECTION("it is pinned to zero for non-TCP groups and singletons") {
    std::vector<PacketRecord> udp = {make_udp(1, 60, 1), make_udp(2, 61, 2)};
    CHECK(extract_features(udp, Protocol::UDP).seq_irregularity == 0.0);
    std::vector<PacketRecord> one = {make_tcp(1, 12345)};
    CHECK(extract_features(one, Protocol::TCP).seq_irregularity == 0.0);
  }
}

TEST_CASE("destination port spread and dominance") {
  std::vector<PacketRecord> pkts = {make_udp(1, 60, 1, 53), make_udp(2, 60, 2, 53),
                                    make_udp(3, 60, 3, 80), make_udp(4, 60, 4, 443)};
  FeatureVector f = extract_features(pkts, Protocol::UDP);
  CHECK(f.dst_port_entropy == 1.5);
  CHECK(f.dominant_port_fraction == 0.5);
}

TEST_CASE("address diversity counts distinct endpoints") {
  std::vector<PacketRecord> pkts = {make_udp(1, 60, 1, 53, 0x01, 0x10),
                                    make_udp(2, 60, 2, 53, 0x01, 0x11),
                                    make_udp(3, 60, 3, 53, 0x02, 0x10)};
  FeatureVector f = extract_features(pkts, Protocol::UDP);
  CHECK(f.src_ip_count == 2.0);
  CHECK(f.dst_ip_count == 2.0);
}

TEST_CASE("an empty group cannot be summarized") {
  CHECK_THROWS_AS(extract_features({}, Protocol::UDP), EmptyWindowError);
}

TEST_CASE("feature vectors round-trip through their array form") {
  FeatureVector f;
  f.num_packet = 12;
  f.mean_len = 3.5;
  f.seq_irregularity = 0.25;
  f.src_ip_count = 4;
  CHECK(FeatureVector::from_array(f.to_array()) == f);
  CHECK(FeatureVector::names().size() == FeatureVector::kCount);
  CHECK(f.to_row().size() == FeatureVector::kCount);
}

TEST_CASE("a capture splits into per-window per-protocol samples in order") {
  std::vector<PacketRecord> pkts;
  auto s = [](uint64_t sec) { return sec * 1'000'000ull; };
  // Window [0,2): 3 udp + 2 tcp. Window [2,4): 1 udp. Window [4,6): 2 tcp.
  pkts.push_back(make_udp(s(0), 60, 1));
  pkts.push_back(make_udp(s(1), 60, 2));
  pkts.push_back(make_udp(s(1) + 1, 60, 3));
  pkts.push_back(make_tcp(s(1), 100));
  pkts.push_back(make_tcp(s(1) + 5, 200));
  pkts.push_back(make_udp(s(2), 60, 4));
  pkts.push_back(make_tcp(s(4), 300));
  pkts.push_back(make_tcp(s(5), 400));
  PacketRecord other = make_udp(s(0), 60, 9);
  other.protocol = Protocol::OTHER;
  pkts.push_back(other);

  auto samples = build_samples(pkts, s(2), 0, "cam-1");
  REQUIRE(samples.size() == 4);
  CHECK(samples[0].window.start_us == 0);
  CHECK(samples[0].protocol == Protocol::TCP);
  CHECK(samples[0].features.num_packet == 2.0);
  CHECK(samples[1].window.start_us == 0);
  CHECK(samples[1].protocol == Protocol::UDP);
  CHECK(samples[1].features.num_packet == 3.0);
  CHECK(samples[2].window.start_us == s(2));
  CHECK(samples[2].protocol == Protocol::UDP);
  CHECK(samples[3].window.start_us == s(4));
  CHECK(samples[3].protocol == Protocol::TCP);
  for (const auto& smp : samples) {
    CHECK(smp.window.device_id == "cam-1");
    CHECK(smp.window.duration_us == s(2));
  }
  CHECK_THROWS_AS(build_samples(pkts, 0, 0, "d"), ParamError);
}
