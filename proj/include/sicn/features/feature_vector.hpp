#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace sicn::features {

inline constexpr std::size_t kFeatureCount = 37;
inline constexpr std::size_t kHistogramBins = 10;

using FeatureValues = std::array<double, kFeatureCount>;

/// Zero-based positions of the catalog entries F1..F37.
namespace index {
inline constexpr std::size_t announcements = 0;           // F1
inline constexpr std::size_t withdrawals = 1;             // F2
inline constexpr std::size_t distinct_announced = 2;      // F3
inline constexpr std::size_t distinct_withdrawn = 3;      // F4
inline constexpr std::size_t duplicate_announcements = 4; // F5
inline constexpr std::size_t implicit_withdrawals = 5;    // F6
inline constexpr std::size_t duplicate_withdrawals = 6;   // F7
inline constexpr std::size_t new_routes = 7;              // F8
inline constexpr std::size_t mean_path_length = 8;        // F9
inline constexpr std::size_t max_path_length = 9;         // F10
inline constexpr std::size_t mean_unique_ases = 10;       // F11
inline constexpr std::size_t mean_edit_distance = 11;     // F12
inline constexpr std::size_t max_edit_distance = 12;      // F13
inline constexpr std::size_t path_length_hist = 13;       // F14..F23
inline constexpr std::size_t edit_distance_hist = 23;     // F24..F33
inline constexpr std::size_t origin_igp = 33;             // F34
inline constexpr std::size_t origin_egp = 34;             // F35
inline constexpr std::size_t origin_incomplete = 35;      // F36
inline constexpr std::size_t mean_inter_arrival = 36;     // F37
}  // namespace index

/// True for the statistic-type entries (F9-F13, F37); the rest are counts.
constexpr bool is_statistic(std::size_t i) {
  return (i >= index::mean_path_length && i <= index::max_edit_distance) || i == index::mean_inter_arrival;
}

/// Column name of feature `i` in dataset files: f01..f37.
inline std::string column_name(std::size_t i) {
  return (i + 1 < 10 ? "f0" : "f") + std::to_string(i + 1);
}

/// One time window reduced to the 37-entry catalog.
struct FeatureVector {
  std::int64_t window_start = 0;
  FeatureValues values{};
  std::optional<int> label;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

}  // namespace sicn::features
