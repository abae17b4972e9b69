#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <cstdint>
#include <string>
#include <vector>
#include <unistd.h>

#include <json.hpp>

#include "sicn/bgp/types.hpp"
#include "sicn/rng.hpp"

namespace sicn::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sicn-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using Bytes = std::vector<std::uint8_t>;

inline void put16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}
inline void put32(Bytes& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v >> 16));
  put16(b, static_cast<std::uint16_t>(v));
}

/// MRT record around an arbitrary payload.
inline Bytes frame(std::uint32_t ts, std::uint16_t type, std::uint16_t subtype, const Bytes& payload) {
  Bytes b;
  put32(b, ts);
  put16(b, type);
  put16(b, subtype);
  put32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

/// BGP4MP MESSAGE (2-byte AS) payload carrying `bgp_body` (type byte onward).
inline Bytes bgp4mp_message(std::uint16_t peer_as, std::uint32_t peer_ip, const Bytes& bgp_body) {
  Bytes b;
  put16(b, peer_as);
  put16(b, 0);
  put16(b, 0);
  put16(b, 1);
  put32(b, peer_ip);
  put32(b, 0);
  for (int i = 0; i < 16; ++i) b.push_back(0xff);
  put16(b, static_cast<std::uint16_t>(18 + bgp_body.size()));
  b.insert(b.end(), bgp_body.begin(), bgp_body.end());
  return b;
}

inline bgp::Ipv4Prefix random_prefix(Rng& rng) {
  const auto len = static_cast<unsigned>(rng.below(33));
  return bgp::Ipv4Prefix::make(bgp::Ipv4Address{static_cast<std::uint32_t>(rng.next())}, len);
}

/// A valid record whose announcements share one path and origin, as a
/// single UPDATE requires.
inline bgp::BgpUpdateRecord random_record(Rng& rng) {
  bgp::BgpUpdateRecord r;
  r.timestamp.seconds = static_cast<std::int64_t>(rng.below(0x100000000ULL));
  r.timestamp.microseconds = rng.bernoulli(0.5) ? 0 : static_cast<std::uint32_t>(rng.below(1000000));
  r.peer_address.value = static_cast<std::uint32_t>(rng.next());
  r.peer_as = static_cast<bgp::AsNumber>(1 + rng.below(0xfffffffeULL));
  const auto n_withdrawn = rng.below(4);
  auto n_announced = rng.below(4);
  if (n_withdrawn == 0 && n_announced == 0) n_announced = 1;
  for (std::uint64_t i = 0; i < n_withdrawn; ++i) r.withdrawn.push_back(random_prefix(rng));
  if (n_announced > 0) {
    std::vector<bgp::AsNumber> path(1 + rng.below(rng.bernoulli(0.05) ? 300 : 8));
    for (auto& as : path) as = static_cast<bgp::AsNumber>(1 + rng.below(rng.bernoulli(0.5) ? 65535 : 0xfffffffeULL));
    const auto origin = static_cast<bgp::Origin>(rng.below(3));
    for (std::uint64_t i = 0; i < n_announced; ++i) r.announced.push_back({random_prefix(rng), path, origin});
  }
  return r;
}

namespace fs = std::filesystem;

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the trailing wall-clock column of the comparison table.
inline std::string without_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

inline const std::set<std::string> kTimingFiles = {"timing.json", "latency.json"};

/// Every output file keyed by relative path, minus the parts that record
/// wall-clock time: timing.json, latency.json and the comparison time fields.
inline std::map<std::string, std::string> comparable_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (kTimingFiles.count(rel)) continue;
    auto text = slurp(e.path());
    if (rel == "comparison.csv") text = without_time_column(text);
    if (rel == "comparison.json") {
      auto j = nlohmann::json::parse(text);
      for (auto& row : j["comparison"]) {
        row["hierarchical"].erase("training_seconds");
        row["flat"].erase("training_seconds");
        row["ratios"].erase("time_efficiency_pct");
      }
      text = j.dump();
    }
    out[rel] = text;
  }
  return out;
}

}  // namespace sicn::test
