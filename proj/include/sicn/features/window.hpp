#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"

namespace sicn::features {

/// Records whose timestamps fall in [start, start + duration).
struct Window {
  std::int64_t start = 0;
  std::int64_t duration = 0;
  std::vector<bgp::BgpUpdateRecord> records;
};

namespace detail {

inline bool earlier(const bgp::BgpUpdateRecord& a, const bgp::BgpUpdateRecord& b) {
  return a.timestamp < b.timestamp;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const auto q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

}  // namespace detail

/// Streaming binner. Records must arrive in timestamp order at window
/// granularity: a record may not belong to a window that was already emitted.
/// Gaps produce empty windows so the emitted series is dense.
class WindowBinner {
 public:
  using Sink = std::function<void(Window&&)>;

  WindowBinner(std::int64_t window_seconds, std::int64_t t0, Sink sink)
      : width_(window_seconds), t0_(t0), sink_(std::move(sink)) {
    if (window_seconds <= 0) throw ValidationError("window_seconds", "must be positive");
  }

  void push(bgp::BgpUpdateRecord record) {
    if (record.timestamp.seconds < t0_)
      throw ValidationError("timestamp", "record at t=" + std::to_string(record.timestamp.seconds) +
                                             " precedes t0=" + std::to_string(t0_));
    const std::int64_t slot = detail::floor_div(record.timestamp.seconds - t0_, width_);
    if (!current_) open(0);
    if (slot < current_index_)
      throw ValidationError("timestamp", "record at t=" + std::to_string(record.timestamp.seconds) +
                                             " belongs to an already emitted window");
    while (current_index_ < slot) {
      flush();
      open(current_index_ + 1);
    }
    current_->records.push_back(std::move(record));
  }

  /// Emits the last open window. No window is emitted if nothing was pushed.
  void finish() {
    if (current_) flush();
    current_.reset();
  }

 private:
  void open(std::int64_t index) {
    current_index_ = index;
    current_ = Window{t0_ + index * width_, width_, {}};
  }

  void flush() {
    std::stable_sort(current_->records.begin(), current_->records.end(), detail::earlier);
    sink_(std::move(*current_));
    current_.reset();
  }

  std::int64_t width_;
  std::int64_t t0_;
  Sink sink_;
  std::optional<Window> current_;
  std::int64_t current_index_ = 0;
};

/// Bins `records` into contiguous windows from t0 through the window holding
/// the last timestamp. Out-of-order input is stably sorted first.
inline std::vector<Window> bin_stream(std::vector<bgp::BgpUpdateRecord> records, std::int64_t window_seconds,
                                      std::int64_t t0) {
  if (window_seconds <= 0) throw ValidationError("window_seconds", "must be positive");
  std::stable_sort(records.begin(), records.end(), detail::earlier);
  std::vector<Window> windows;
  WindowBinner binner(window_seconds, t0, [&windows](Window&& w) { windows.push_back(std::move(w)); });
  for (auto& r : records) binner.push(std::move(r));
  binner.finish();
  return windows;
}

}  // namespace sicn::features
