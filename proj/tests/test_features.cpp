#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "sicn/bgp/types.hpp"
#include "sicn/features/dataset_csv.hpp"
#include "sicn/features/extract.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/features/window.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace sicn;
using namespace sicn::features;
using namespace sicn::test;
using bgp::AsNumber;
using bgp::BgpUpdateRecord;

namespace {

BgpUpdateRecord ann(std::int64_t t, const char* prefix, std::vector<AsNumber> path, bgp::Origin o = bgp::Origin::igp,
                    const char* peer = "10.255.0.1") {
  BgpUpdateRecord r;
  r.timestamp.seconds = t;
  r.peer_address = bgp::Ipv4Address::parse(peer);
  r.peer_as = 65001;
  r.announced.push_back({bgp::Ipv4Prefix::parse(prefix), std::move(path), o});
  return r;
}

BgpUpdateRecord wd(std::int64_t t, const char* prefix, const char* peer = "10.255.0.1") {
  BgpUpdateRecord r;
  r.timestamp.seconds = t;
  r.peer_address = bgp::Ipv4Address::parse(peer);
  r.peer_as = 65001;
  r.withdrawn.push_back(bgp::Ipv4Prefix::parse(prefix));
  return r;
}

}  // namespace

TEST(Binning, RecordsInConsecutiveWindows) {
  const auto w = bin_stream({ann(10, "10.0.0.0/8", {1}), ann(70, "10.0.0.0/8", {1})}, 60, 0);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].records.size(), 1u);
  EXPECT_EQ(w[1].records.size(), 1u);
  EXPECT_EQ(w[1].start, 60);
}

TEST(Binning, EmptyStreamAndGaps) {
  EXPECT_TRUE(bin_stream({}, 60, 0).empty());
  const auto w = bin_stream({ann(130, "10.0.0.0/8", {1}), ann(10, "10.0.0.0/8", {1})}, 60, 0);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].records.size(), 1u);
  EXPECT_TRUE(w[1].records.empty());
  EXPECT_EQ(w[2].records.size(), 1u);
}

TEST(Binning, RejectsBadWidthAndEarlyRecords) {
  EXPECT_THROW(bin_stream({}, 0, 0), ValidationError);
  EXPECT_THROW(bin_stream({ann(5, "10.0.0.0/8", {1})}, 60, 10), ValidationError);
}

TEST(Extract, EmptyWindowIsAllZero) {
  SessionState state;
  const auto fv = extract_features(Window{0, 60, {}}, state);
  for (double v : fv.values) EXPECT_EQ(v, 0.0);
}

TEST(Extract, HandEnumeratedWindow) {
  SessionState state;
  Window w{0, 60,
           {ann(1, "10.1.0.0/16", {1, 2}), ann(2, "10.2.0.0/16", {1, 2, 3}),
            ann(3, "10.3.0.0/16", {1, 2, 3, 4}, bgp::Origin::egp), wd(4, "10.4.0.0/16")}};
  const auto v = extract_features(w, state).values;
  EXPECT_EQ(v[index::announcements], 3);
  EXPECT_EQ(v[index::withdrawals], 1);
  EXPECT_DOUBLE_EQ(v[index::mean_path_length], 3.0);
  EXPECT_EQ(v[index::max_path_length], 4);
  EXPECT_EQ(v[index::origin_igp], 2);
  EXPECT_EQ(v[index::origin_egp], 1);
  EXPECT_EQ(v[index::origin_incomplete], 0);
}

TEST(Extract, DuplicateAndImplicitWithdrawal) {
  SessionState state;
  const auto dup = extract_features(Window{0, 60, {ann(1, "10.1.0.0/16", {1, 2}), ann(2, "10.1.0.0/16", {1, 2})}}, state);
  EXPECT_EQ(dup.values[index::duplicate_announcements], 1);
  EXPECT_EQ(dup.values[index::implicit_withdrawals], 0);
  SessionState fresh;
  const auto imp = extract_features(Window{0, 60, {ann(1, "10.1.0.0/16", {1, 2}), ann(2, "10.1.0.0/16", {1, 3})}}, fresh);
  EXPECT_EQ(imp.values[index::implicit_withdrawals], 1);
  EXPECT_EQ(imp.values[index::duplicate_announcements], 0);
  EXPECT_EQ(imp.values[index::edit_distance_hist], 1);  // one edit of distance 1
}

TEST(Extract, StateCarriesAcrossWindows) {
  SessionState state;
  extract_features(Window{0, 60, {ann(1, "10.1.0.0/16", {1, 2})}}, state);
  const auto v = extract_features(Window{60, 60, {wd(61, "10.1.0.0/16"), wd(62, "10.1.0.0/16"),
                                                  ann(63, "10.1.0.0/16", {1, 2})}}, state).values;
  EXPECT_EQ(v[index::duplicate_withdrawals], 1);
  EXPECT_EQ(v[index::new_routes], 1);
  EXPECT_EQ(v[index::mean_edit_distance], 0);
  EXPECT_DOUBLE_EQ(v[index::mean_inter_arrival], 1.0);
}

TEST(ExtractOracle, FiftyEnumeratedWindowsMatchBruteForce) {
  Rng rng(derive_seed(21, "feature-oracle"));
  std::size_t windows = 0;
  while (windows < 50) {
    const auto stream = random_stream(rng, 5 + rng.below(40), 300);
    const auto expected = oracle(stream, 60, 0);
    const auto actual = extract_stream(stream, 60, 0);
    ASSERT_EQ(actual.size(), expected.size());
    for (std::size_t w = 0; w < actual.size(); ++w, ++windows)
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (is_count_feature(i))
          ASSERT_EQ(actual[w].values[i], expected[w][i]) << "window " << w << " " << column_name(i);
        else
          ASSERT_NEAR(actual[w].values[i], expected[w][i], 1e-9) << "window " << w << " " << column_name(i);
      }
  }
}

TEST(ExtractProperty, ConservationAndChunkingIndependence) {
  Rng rng(derive_seed(22, "feature-conservation"));
  for (int trial = 0; trial < 20; ++trial) {
    const auto stream = random_stream(rng, 200, 3000);
    double announcements = 0, withdrawals = 0;
    for (const auto& r : stream) {
      announcements += static_cast<double>(r.announced.size());
      withdrawals += static_cast<double>(r.withdrawn.size());
    }
    const auto whole = extract_stream(stream, 60, 0);
    double f1 = 0, f2 = 0;
    for (const auto& fv : whole) {
      f1 += fv.values[index::announcements];
      f2 += fv.values[index::withdrawals];
      for (double v : fv.values) EXPECT_TRUE(std::isfinite(v) && v >= 0);
    }
    EXPECT_EQ(f1, announcements);
    EXPECT_EQ(f2, withdrawals);

    std::vector<FeatureVector> streamed;
    FeatureExtractor ex(60, 0, [&](FeatureVector&& fv) { streamed.push_back(std::move(fv)); });
    for (const auto& r : stream) ex.push(r);
    ex.finish();
    EXPECT_EQ(streamed, whole);
  }
}

TEST(Labels, MidpointRuleAndPrecedence) {
  std::vector<FeatureVector> w(4);
  for (std::size_t i = 0; i < w.size(); ++i) w[i].window_start = static_cast<std::int64_t>(60 * i);
  const std::vector<GroundTruthInterval> truth = {{IncidentClass::slammer, 80, 200},
                                                  {IncidentClass::outage_r1r2, 0, 240}};
  label_windows(w, truth, 60);
  EXPECT_EQ(*w[0].label, 4);  // midpoint 30: outage only
  EXPECT_EQ(*w[1].label, 3);  // midpoint 90: worm beats outage
  EXPECT_EQ(*w[3].label, 4);  // midpoint 210: outage only
  std::vector<FeatureVector> lone(1);
  label_windows(lone, {}, 60);
  EXPECT_EQ(*lone[0].label, 0);
}

TEST(Labels, RejectsOverlapAndUnknownClasses) {
  std::vector<FeatureVector> w(1);
  const std::vector<GroundTruthInterval> overlap = {{IncidentClass::nimda, 0, 100}, {IncidentClass::slammer, 50, 150}};
  EXPECT_THROW(label_windows(w, overlap, 60), ValidationError);
  EXPECT_THROW(incident_from_label(6), ValidationError);
  EXPECT_THROW(parse_incident("Blaster"), ValidationError);
  EXPECT_EQ(parse_incident("Slammer"), IncidentClass::slammer);
  EXPECT_EQ(parse_incident("3"), IncidentClass::slammer);
}

TEST(Labels, GroundTruthCsvRoundTrip) {
  const std::vector<GroundTruthInterval> truth = {{IncidentClass::code_red_i, 10.5, 20}, {IncidentClass::outage_r5r6, 30, 1e6}};
  std::stringstream ss;
  write_ground_truth(ss, truth);
  EXPECT_EQ(read_ground_truth(ss), truth);
  std::istringstream bad("class,start,end\nBlaster,1,2\n");
  EXPECT_THROW(read_ground_truth(bad), ParseError);
}

TEST(DatasetCsv, RoundTripWithLabels) {
  Rng rng(derive_seed(23, "csv"));
  std::vector<FeatureVector> rows(10);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].window_start = static_cast<std::int64_t>(60 * r);
    for (auto& v : rows[r].values) v = quantize_value(rng.uniform(0, 1000));
    rows[r].label = static_cast<int>(r % 4);
  }
  std::stringstream ss;
  write_dataset(ss, rows);
  const auto table = read_dataset(ss);
  EXPECT_TRUE(table.has_labels);
  EXPECT_EQ(table.rows, rows);
}

TEST(DatasetCsv, MissingLabelColumnAndArityErrors) {
  std::vector<FeatureVector> rows(2);
  std::stringstream ss;
  write_dataset(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), dataset_header(false));
  const auto table = read_dataset(ss);
  EXPECT_FALSE(table.has_labels);
  EXPECT_FALSE(table.rows[0].label);

  std::string short_row = "0";
  for (int i = 0; i < 36; ++i) short_row += ",1";
  std::istringstream bad(dataset_header(true) + "\n" + short_row + ",0\n");
  try {
    read_dataset(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 1u);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  std::istringstream header("t,f01\n");
  EXPECT_THROW(read_dataset(header), ParseError);
  std::string nan_row = "0";
  for (int i = 0; i < 37; ++i) nan_row += i == 5 ? ",nan" : ",1";
  std::istringstream non_finite(dataset_header(false) + "\n" + nan_row + "\n");
  EXPECT_THROW(read_dataset(non_finite), ParseError);
}

TEST(DatasetCsv, NineSignificantDigits) {
  EXPECT_EQ(format_value(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_value(12), "12");
  EXPECT_EQ(quantize_value(quantize_value(2.0 / 3.0)), quantize_value(2.0 / 3.0));
}
