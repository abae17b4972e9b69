#pragma once

// Window -> 37-feature reduction.
//
// Catalog (1-based as in the column names f01..f37):
//   F1  announcements              F2  withdrawals
//   F3  distinct announced prefixes F4 distinct withdrawn prefixes
//   F5  duplicate announcements (same path and origin as the live route)
//   F6  implicit withdrawals (live route re-announced with a changed path or origin)
//   F7  duplicate withdrawals (prefix already unreachable, or never announced)
//   F8  new routes (first announcement, or first after an explicit withdrawal)
//   F9  mean AS-path length        F10 max AS-path length
//   F11 mean number of distinct ASes per path
//   F12 mean / F13 max edit distance between an announced path and the
//       previous path announced for the same (peer, prefix)
//   F14-F23 announcements with path length 1..10 (longer paths fold into F23)
//   F24-F33 edit distances 1..10 (larger values fold into F33)
//   F34-F36 announcements with origin IGP / EGP / INCOMPLETE
//   F37 mean inter-arrival time between consecutive records, in seconds
//
// Within one record withdrawals are applied before announcements, as in a BGP
// UPDATE. Empty-set statistics are 0.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/features/feature_vector.hpp"
#include "sicn/features/window.hpp"

namespace sicn::features {

/// Levenshtein distance between two AS sequences.
inline std::size_t edit_distance(std::span<const bgp::AsNumber> a, std::span<const bgp::AsNumber> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct RouteKey {
  std::uint32_t peer = 0;
  bgp::AsNumber peer_as = 0;
  bgp::Ipv4Prefix prefix;

  friend bool operator==(const RouteKey&, const RouteKey&) = default;
};

struct RouteKeyHash {
  std::size_t operator()(const RouteKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{k.peer} << 32) ^ k.peer_as;
    h ^= (std::uint64_t{k.prefix.network.value} << 8 | k.prefix.length) * 0x9e3779b97f4a7c15ULL;
    return std::hash<std::uint64_t>{}(h);
  }
};

/// Per (peer, prefix) routing view, threaded through consecutive windows.
class SessionState {
 public:
  struct Route {
    std::vector<bgp::AsNumber> last_path;  // empty if never announced
    bgp::Origin last_origin = bgp::Origin::igp;
    bool announced_before = false;
    bool reachable = false;
  };

  const Route* find(const RouteKey& key) const {
    auto it = routes_.find(key);
    return it == routes_.end() ? nullptr : &it->second;
  }
  Route& at(const RouteKey& key) { return routes_[key]; }
  std::size_t size() const { return routes_.size(); }

 private:
  std::unordered_map<RouteKey, Route, RouteKeyHash> routes_;
};

struct PrefixHash {
  std::size_t operator()(const bgp::Ipv4Prefix& p) const noexcept {
    return std::hash<std::uint64_t>{}(std::uint64_t{p.network.value} << 8 | p.length);
  }
};

/// Reduces `window` to its feature vector and advances `state` past it.
inline FeatureVector extract_features(const Window& window, SessionState& state) {
  FeatureVector fv;
  fv.window_start = window.start;
  auto& v = fv.values;

  std::unordered_set<bgp::Ipv4Prefix, PrefixHash> announced_prefixes, withdrawn_prefixes;
  double path_length_sum = 0, unique_as_sum = 0, distance_sum = 0;
  std::size_t path_length_max = 0, distance_max = 0, distance_samples = 0;
  std::vector<bgp::AsNumber> scratch;

  for (const auto& record : window.records) {
    for (const auto& prefix : record.withdrawn) {
      v[index::withdrawals] += 1;
      withdrawn_prefixes.insert(prefix);
      auto& route = state.at({record.peer_address.value, record.peer_as, prefix});
      if (!route.reachable) v[index::duplicate_withdrawals] += 1;
      route.reachable = false;
    }
    for (const auto& a : record.announced) {
      v[index::announcements] += 1;
      announced_prefixes.insert(a.prefix);
      auto& route = state.at({record.peer_address.value, record.peer_as, a.prefix});
      if (!route.reachable) {
        v[index::new_routes] += 1;
      } else if (route.last_path == a.as_path && route.last_origin == a.origin) {
        v[index::duplicate_announcements] += 1;
      } else {
        v[index::implicit_withdrawals] += 1;
      }
      if (route.announced_before) {
        const std::size_t d = edit_distance(route.last_path, a.as_path);
        distance_sum += static_cast<double>(d);
        distance_max = std::max(distance_max, d);
        ++distance_samples;
        if (d >= 1) v[index::edit_distance_hist + std::min(d, kHistogramBins) - 1] += 1;
      }
      route.last_path = a.as_path;
      route.last_origin = a.origin;
      route.announced_before = true;
      route.reachable = true;

      const std::size_t len = a.as_path.size();
      path_length_sum += static_cast<double>(len);
      path_length_max = std::max(path_length_max, len);
      scratch.assign(a.as_path.begin(), a.as_path.end());
      std::sort(scratch.begin(), scratch.end());
      unique_as_sum += static_cast<double>(std::unique(scratch.begin(), scratch.end()) - scratch.begin());
      if (len >= 1) v[index::path_length_hist + std::min(len, kHistogramBins) - 1] += 1;

      switch (a.origin) {
        case bgp::Origin::igp: v[index::origin_igp] += 1; break;
        case bgp::Origin::egp: v[index::origin_egp] += 1; break;
        case bgp::Origin::incomplete: v[index::origin_incomplete] += 1; break;
      }
    }
  }

  const double n_ann = v[index::announcements];
  v[index::distinct_announced] = static_cast<double>(announced_prefixes.size());
  v[index::distinct_withdrawn] = static_cast<double>(withdrawn_prefixes.size());
  v[index::mean_path_length] = n_ann > 0 ? path_length_sum / n_ann : 0.0;
  v[index::max_path_length] = static_cast<double>(path_length_max);
  v[index::mean_unique_ases] = n_ann > 0 ? unique_as_sum / n_ann : 0.0;
  v[index::mean_edit_distance] = distance_samples > 0 ? distance_sum / static_cast<double>(distance_samples) : 0.0;
  v[index::max_edit_distance] = static_cast<double>(distance_max);
  const auto& recs = window.records;
  if (recs.size() >= 2) {
    const auto span_us = recs.back().timestamp.as_microseconds() - recs.front().timestamp.as_microseconds();
    v[index::mean_inter_arrival] = static_cast<double>(span_us) * 1e-6 / static_cast<double>(recs.size() - 1);
  }
  return fv;
}

/// Binning plus extraction in one streaming stage.
class FeatureExtractor {
 public:
  using Sink = std::function<void(FeatureVector&&)>;

  FeatureExtractor(std::int64_t window_seconds, std::int64_t t0, Sink sink)
      : sink_(std::move(sink)),
        binner_(window_seconds, t0, [this](Window&& w) { sink_(extract_features(w, state_)); }) {}

  void push(bgp::BgpUpdateRecord record) { binner_.push(std::move(record)); }
  void finish() { binner_.finish(); }

 private:
  Sink sink_;
  SessionState state_;
  WindowBinner binner_;
};

/// Features for every window of an in-memory stream.
inline std::vector<FeatureVector> extract_stream(std::vector<bgp::BgpUpdateRecord> records,
                                                 std::int64_t window_seconds, std::int64_t t0) {
  SessionState state;
  std::vector<FeatureVector> out;
  for (const auto& w : bin_stream(std::move(records), window_seconds, t0)) out.push_back(extract_features(w, state));
  return out;
}

}  // namespace sicn::features
