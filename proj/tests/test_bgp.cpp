#include <gtest/gtest.h>

#include <sstream>

#include "sicn/bgp/mrt.hpp"
#include "sicn/bgp/text_format.hpp"
#include "support.hpp"

using namespace sicn;
using namespace sicn::bgp;
using namespace sicn::test;

namespace {

BgpUpdateRecord announce(std::int64_t t, const char* prefix, std::vector<AsNumber> path, Origin o = Origin::igp) {
  BgpUpdateRecord r;
  r.timestamp.seconds = t;
  r.peer_address = Ipv4Address::parse("10.0.0.1");
  r.peer_as = 65001;
  r.announced.push_back({Ipv4Prefix::parse(prefix), std::move(path), o});
  return r;
}

}  // namespace

TEST(Mrt, EmptyInputYieldsNothing) {
  const auto r = parse_mrt(std::span<const std::uint8_t>{});
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.stats, ParseStats{});
  EXPECT_FALSE(r.error);
}

TEST(Mrt, SingleRecordRoundTrip) {
  const auto rec = announce(1000, "10.0.0.0/8", {65001, 65002});
  const auto parsed = parse_mrt(serialize_mrt(rec));
  ASSERT_EQ(parsed.records.size(), 1u);
  EXPECT_EQ(parsed.records[0], rec);
  EXPECT_EQ(parsed.stats.records_emitted, 1u);
}

TEST(Mrt, HeaderTimestampIsBigEndian) {
  auto rec = announce(1, "10.0.0.0/8", {65001});
  const auto bytes = serialize_mrt(rec);
  EXPECT_EQ((Bytes{bytes.begin(), bytes.begin() + 4}), (Bytes{0, 0, 0, 1}));
}

TEST(Mrt, WithdrawalOnlyRecordMatchesHandEncoding) {
  BgpUpdateRecord rec;
  rec.timestamp.seconds = 0x01020304;
  rec.peer_address = Ipv4Address::parse("192.0.2.7");
  rec.peer_as = 0x0000fde9;  // 65001
  rec.withdrawn.push_back(Ipv4Prefix::parse("10.0.0.0/8"));
  // clang-format off
  const Bytes expected = {
      0x01, 0x02, 0x03, 0x04,  0x00, 0x10,  0x00, 0x04,  0x00, 0x00, 0x00, 0x2d,  // MRT header, length 45
      0x00, 0x00, 0xfd, 0xe9,  0x00, 0x00, 0x00, 0x00,  0x00, 0x00,  0x00, 0x01,   // peer AS, local AS, ifindex, AFI
      0xc0, 0x00, 0x02, 0x07,  0x00, 0x00, 0x00, 0x00,                             // peer and local address
      0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff,
      0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff,                              // marker
      0x00, 0x19,  0x02,                                                           // length 25, UPDATE
      0x00, 0x02,  0x08, 0x0a,                                                     // withdrawn 10/8
      0x00, 0x00,                                                                  // no path attributes
  };
  // clang-format on
  EXPECT_EQ(serialize_mrt(rec), expected);
  const std::size_t attr_len_at = 12 + 20 + 19 + 2 + 2;
  EXPECT_EQ(expected[attr_len_at], 0);
  EXPECT_EQ(expected[attr_len_at + 1], 0);
}

TEST(Mrt, MicrosecondsUseExtendedTimestampType) {
  auto rec = announce(77, "10.1.0.0/16", {1, 2, 3});
  rec.timestamp.microseconds = 123456;
  const auto bytes = serialize_mrt(rec);
  EXPECT_EQ(bytes[4], 0);
  EXPECT_EQ(bytes[5], mrt::kTypeBgp4mpEt);
  const auto parsed = parse_mrt(bytes);
  ASSERT_EQ(parsed.records.size(), 1u);
  EXPECT_EQ(parsed.records[0], rec);
}

TEST(Mrt, TableDumpIsSkippedAndNextRecordEmitted) {
  Bytes stream = frame(5, 13, 2, Bytes(40, 0xab));
  const auto good = serialize_mrt(announce(6, "10.2.0.0/16", {65001}));
  stream.insert(stream.end(), good.begin(), good.end());
  const auto r = parse_mrt(stream);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.stats.records_emitted, 1u);
  EXPECT_EQ(r.stats.records_skipped, 1u);
  EXPECT_EQ(r.stats.malformed, 0u);
}

TEST(Mrt, KeepaliveAndIpv6AreSkipped) {
  Bytes stream = frame(1, 16, 1, bgp4mp_message(65001, 0x0a000001, {4}));
  Bytes v6;
  put16(v6, 65001);
  put16(v6, 0);
  put16(v6, 0);
  put16(v6, 2);
  v6.resize(v6.size() + 32);
  const auto f = frame(2, 16, 1, v6);
  stream.insert(stream.end(), f.begin(), f.end());
  const auto r = parse_mrt(stream);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.stats.records_skipped, 2u);
  EXPECT_EQ(r.stats.total(), 2u);
}

TEST(Mrt, MalformedPayloadIsCountedAndParsingResumes) {
  Bytes bad = bgp4mp_message(65001, 0x0a000001, {2, 0x00, 0x05, 0x21});  // withdrawn length runs past the end
  Bytes stream = frame(1, 16, 1, bad);
  const auto good = serialize_mrt(announce(2, "10.3.0.0/16", {65001, 7}));
  stream.insert(stream.end(), good.begin(), good.end());
  const auto r = parse_mrt(stream);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.stats.malformed, 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].offset, 0u);
  EXPECT_FALSE(r.error);
}

TEST(Mrt, CorruptedLengthAbortsWithOffset) {
  auto stream = serialize_mrt(announce(1, "10.0.0.0/8", {1}));
  const std::size_t second = stream.size();
  auto tail = serialize_mrt(announce(2, "10.0.0.0/8", {1}));
  tail[11] = 0xff;  // declared length far beyond the input
  stream.insert(stream.end(), tail.begin(), tail.end());
  const auto r = parse_mrt(stream);
  EXPECT_EQ(r.records.size(), 1u);
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.error->offset, second);
  EXPECT_NE(r.error->message.find(std::to_string(second)), std::string::npos);
  EXPECT_EQ(r.stats.total(), 2u);
}

TEST(Mrt, TruncatedHeaderAborts) {
  auto stream = serialize_mrt(announce(1, "10.0.0.0/8", {1}));
  stream.push_back(0);
  stream.push_back(0);
  const auto r = parse_mrt(stream);
  EXPECT_EQ(r.records.size(), 1u);
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.stats.malformed, 1u);
}

TEST(Mrt, AsSetIsFlattenedAndAs4PathPreferred) {
  // 2-byte AS message: ORIGIN EGP, AS_PATH [SEQ 100 23456][SET 300 200], AS4_PATH [SEQ 100 70000][SET 300 200]
  Bytes body = {2, 0, 0};
  Bytes attrs = {0x40, 1, 1, 1};
  Bytes as_path = {2, 2};
  put16(as_path, 100);
  put16(as_path, 23456);
  as_path.push_back(1);
  as_path.push_back(2);
  put16(as_path, 300);
  put16(as_path, 200);
  attrs.push_back(0x40);
  attrs.push_back(2);
  attrs.push_back(static_cast<std::uint8_t>(as_path.size()));
  attrs.insert(attrs.end(), as_path.begin(), as_path.end());
  Bytes as4 = {2, 2};
  put32(as4, 100);
  put32(as4, 70000);
  as4.push_back(1);
  as4.push_back(2);
  put32(as4, 300);
  put32(as4, 200);
  attrs.push_back(0xc0);
  attrs.push_back(17);
  attrs.push_back(static_cast<std::uint8_t>(as4.size()));
  attrs.insert(attrs.end(), as4.begin(), as4.end());
  attrs.insert(attrs.end(), {0x40, 99, 2, 0xde, 0xad});  // unknown attribute, ignored
  put16(body, static_cast<std::uint16_t>(attrs.size()));
  body.insert(body.end(), attrs.begin(), attrs.end());
  body.insert(body.end(), {24, 192, 0, 2});

  const auto r = parse_mrt(frame(9, 16, 1, bgp4mp_message(64512, 0x0a000009, body)));
  ASSERT_EQ(r.records.size(), 1u);
  const auto& a = r.records[0].announced.at(0);
  EXPECT_EQ(a.as_path, (std::vector<AsNumber>{100, 70000, 300, 200}));
  EXPECT_EQ(a.origin, Origin::egp);
  EXPECT_EQ(a.prefix.to_string(), "192.0.2.0/24");
  EXPECT_EQ(r.records[0].peer_as, 64512u);
}

TEST(Mrt, SerializeRejectsInvalidRecords) {
  BgpUpdateRecord empty;
  try {
    serialize_mrt(empty);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "announced");
  }
  auto zero_as = announce(1, "10.0.0.0/8", {1, 0});
  EXPECT_THROW(serialize_mrt(zero_as), ValidationError);
  auto mixed = announce(1, "10.0.0.0/8", {1});
  mixed.announced.push_back({Ipv4Prefix::parse("10.1.0.0/16"), {2}, Origin::igp});
  EXPECT_THROW(serialize_mrt(mixed), ValidationError);
}

TEST(MrtProperty, RandomRecordsRoundTripAndConcatenate) {
  Rng rng(derive_seed(11, "mrt-roundtrip"));
  std::vector<BgpUpdateRecord> records;
  Bytes stream;
  for (int i = 0; i < 1000; ++i) {
    records.push_back(test::random_record(rng));
    const auto bytes = serialize_mrt(records.back());
    const auto single = parse_mrt(bytes);
    ASSERT_EQ(single.records.size(), 1u) << i;
    ASSERT_EQ(single.records[0], records.back()) << i;
    stream.insert(stream.end(), bytes.begin(), bytes.end());
  }
  const auto all = parse_mrt(stream);
  EXPECT_EQ(all.records, records);
  std::istringstream is(std::string(stream.begin(), stream.end()));
  EXPECT_EQ(parse_mrt(is).records, records);
}

TEST(MrtProperty, StatsReconcileWithRecordCount) {
  Rng rng(derive_seed(12, "mrt-stats"));
  for (int trial = 0; trial < 50; ++trial) {
    Bytes stream;
    std::size_t total = 0, good = 0;
    const auto n = 1 + rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i, ++total) {
      switch (rng.below(4)) {
        case 0: {
          const auto f = frame(1, static_cast<std::uint16_t>(rng.bernoulli(0.5) ? 13 : 12), 1, Bytes(rng.below(20), 1));
          stream.insert(stream.end(), f.begin(), f.end());
          break;
        }
        case 1: {
          const auto f = frame(1, 16, 1, bgp4mp_message(1, 1, {2, 0, 9}));
          stream.insert(stream.end(), f.begin(), f.end());
          break;
        }
        default: {
          const auto b = serialize_mrt(test::random_record(rng));
          stream.insert(stream.end(), b.begin(), b.end());
          ++good;
        }
      }
    }
    const auto r = parse_mrt(stream);
    EXPECT_EQ(r.stats.total(), total);
    EXPECT_EQ(r.stats.records_emitted, good);
    EXPECT_EQ(r.records.size(), good);
  }
}

TEST(TextFormat, AnnouncementLine) {
  const auto r = parse_update_line("100|10.0.0.1|65001|A|10.1.0.0/16|65001 65002|IGP");
  EXPECT_EQ(r.timestamp.seconds, 100);
  EXPECT_EQ(r.peer_as, 65001u);
  ASSERT_EQ(r.announced.size(), 1u);
  EXPECT_EQ(r.announced[0].as_path.size(), 2u);
  EXPECT_EQ(r.announced[0].origin, Origin::igp);
  EXPECT_TRUE(r.withdrawn.empty());
}

TEST(TextFormat, WithdrawalLineAndWhitespace) {
  const auto r = parse_update_line(" 100 | 10.0.0.1 |65001| W | 10.1.0.0/16 ");
  EXPECT_TRUE(r.announced.empty());
  ASSERT_EQ(r.withdrawn.size(), 1u);
  EXPECT_EQ(r.withdrawn[0].to_string(), "10.1.0.0/16");
}

TEST(TextFormat, ErrorsCarryLineNumbers) {
  EXPECT_THROW(parse_update_line("100|10.0.0.1|65001|A|10.1.0.0/16||IGP"), ParseError);
  EXPECT_THROW(parse_update_line("100|10.0.0.1|65001|A|10.1.0.0/16|1 2|BOGUS"), ParseError);
  EXPECT_THROW(parse_update_line("x|10.0.0.1|65001|W|10.1.0.0/16"), ParseError);
  EXPECT_THROW(parse_update_line("100|10.0.0.1|65001|W"), ParseError);
  std::istringstream in("# comment\n\n100|10.0.0.1|65001|W|10.1.0.0/16\n100|10.0.0.1|nope|W|10.1.0.0/16\n");
  try {
    read_update_lines(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(TextFormat, LinesRoundTripSingleRouteRecords) {
  Rng rng(derive_seed(13, "text"));
  std::ostringstream os;
  std::vector<BgpUpdateRecord> expected;
  for (int i = 0; i < 200; ++i) {
    const auto r = test::random_record(rng);
    write_update_lines(os, r);
    for (const auto& w : r.withdrawn) {
      BgpUpdateRecord e{r.timestamp, r.peer_address, r.peer_as, {}, {w}};
      expected.push_back(e);
    }
    for (const auto& a : r.announced) {
      BgpUpdateRecord e{r.timestamp, r.peer_address, r.peer_as, {a}, {}};
      expected.push_back(e);
    }
  }
  std::istringstream in(os.str());
  EXPECT_EQ(read_update_lines(in), expected);
}
