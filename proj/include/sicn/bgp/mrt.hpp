#pragma once

// MRT (RFC 6396) BGP4MP subset: framing, UPDATE decoding and encoding.
//
// Supported: type 16 (BGP4MP) and 17 (BGP4MP_ET), subtypes 1 (MESSAGE, 2-byte
// AS numbers) and 4 (MESSAGE_AS4) carrying an IPv4 UPDATE. Everything else is
// skipped and counted.

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"

namespace sicn::bgp {

namespace mrt {

inline constexpr std::size_t kHeaderSize = 12;
inline constexpr std::uint16_t kTypeBgp4mp = 16;
inline constexpr std::uint16_t kTypeBgp4mpEt = 17;
inline constexpr std::uint16_t kSubtypeMessage = 1;
inline constexpr std::uint16_t kSubtypeMessageAs4 = 4;
// Largest payload buffered for decoding. BGP messages are at most 65535
// bytes (RFC 8654); the BGP4MP wrapper adds at most 44 more.
inline constexpr std::uint32_t kMaxDecodedPayload = 65535 + 64;

inline constexpr std::uint8_t kAttrOrigin = 1;
inline constexpr std::uint8_t kAttrAsPath = 2;
inline constexpr std::uint8_t kAttrAs4Path = 17;
inline constexpr std::uint8_t kFlagTransitive = 0x40;
inline constexpr std::uint8_t kFlagExtendedLength = 0x10;

}  // namespace mrt

struct ParseStats {
  std::size_t records_emitted = 0;
  std::size_t records_skipped = 0;
  std::size_t malformed = 0;

  std::size_t total() const { return records_emitted + records_skipped + malformed; }
  friend bool operator==(const ParseStats&, const ParseStats&) = default;
};

/// A problem found at a byte offset of the input stream.
struct ParseDiagnostic {
  std::size_t offset = 0;
  std::string message;
};

/// Big-endian cursor over a byte span. Reads past the end set `failed()`
/// instead of throwing so decoders can bail out with one check.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return failed_ ? 0 : bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool failed() const { return failed_; }

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(take(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }

  std::span<const std::uint8_t> bytes(std::size_t n) {
    if (!ensure(n)) return {};
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  void skip(std::size_t n) { bytes(n); }

 private:
  bool ensure(std::size_t n) {
    if (failed_ || bytes_.size() - pos_ < n) {
      failed_ = true;
      return false;
    }
    return true;
  }

  std::uint64_t take(std::size_t n) {
    if (!ensure(n)) return 0;
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  bool failed_ = false;
};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  /// Overwrites a previously written big-endian u16 at `at`.
  void patch_u16(std::size_t at, std::uint16_t v) {
    out_[at] = static_cast<std::uint8_t>(v >> 8);
    out_[at + 1] = static_cast<std::uint8_t>(v);
  }

  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t>& buffer() { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

namespace detail {

struct Skipped {
  std::string reason;
};
struct Malformed {
  std::string reason;
};
using DecodeOutcome = std::variant<BgpUpdateRecord, Skipped, Malformed>;

inline bool read_prefix(ByteReader& in, Ipv4Prefix& out) {
  const unsigned length = in.u8();
  if (in.failed() || length > 32) return false;
  const auto octets = in.bytes((length + 7) / 8);
  if (in.failed()) return false;
  std::uint32_t addr = 0;
  for (std::size_t i = 0; i < 4; ++i) addr = (addr << 8) | (i < octets.size() ? octets[i] : 0u);
  // Trailing bits in the last octet are not significant (RFC 4271 4.3).
  out = Ipv4Prefix::make(Ipv4Address{addr}, length);
  return true;
}

inline bool read_as_path(std::span<const std::uint8_t> value, std::size_t as_size,
                         std::vector<AsNumber>& out) {
  ByteReader in(value);
  out.clear();
  while (in.remaining() > 0) {
    const auto segment_type = in.u8();
    const auto count = in.u8();
    if (in.failed() || segment_type < 1 || segment_type > 4) return false;
    for (unsigned i = 0; i < count; ++i) out.push_back(as_size == 2 ? in.u16() : in.u32());
    if (in.failed()) return false;
  }
  return true;
}

/// Decodes one BGP4MP payload. `microseconds` is set for BGP4MP_ET.
inline DecodeOutcome decode_bgp4mp(std::uint32_t timestamp, std::uint16_t type, std::uint16_t subtype,
                                   std::span<const std::uint8_t> payload) {
  ByteReader in(payload);
  std::uint32_t micros = 0;
  if (type == mrt::kTypeBgp4mpEt) {
    micros = in.u32();
    if (in.failed()) return Malformed{"truncated extended timestamp"};
    if (micros >= 1000000) return Malformed{"microsecond field out of range"};
  }
  if (subtype != mrt::kSubtypeMessage && subtype != mrt::kSubtypeMessageAs4)
    return Skipped{"unsupported BGP4MP subtype " + std::to_string(subtype)};
  const std::size_t as_size = subtype == mrt::kSubtypeMessageAs4 ? 4 : 2;

  const AsNumber peer_as = as_size == 4 ? in.u32() : in.u16();
  in.skip(as_size);  // local AS
  in.skip(2);        // interface index
  const auto afi = in.u16();
  if (in.failed()) return Malformed{"truncated BGP4MP header"};
  if (afi == 2) return Skipped{"IPv6 peering"};
  if (afi != 1) return Malformed{"unknown address family " + std::to_string(afi)};
  const Ipv4Address peer{in.u32()};
  in.skip(4);  // local address

  const auto marker = in.bytes(16);
  if (in.failed()) return Malformed{"truncated BGP header"};
  for (auto b : marker)
    if (b != 0xff) return Malformed{"bad BGP marker"};
  const auto bgp_length = in.u16();
  const auto bgp_type = in.u8();
  if (in.failed()) return Malformed{"truncated BGP header"};
  if (bgp_length < 19 || bgp_length - 19u != in.remaining())
    return Malformed{"BGP length does not match MRT payload"};
  if (bgp_type != 2) return Skipped{"BGP message type " + std::to_string(bgp_type)};

  BgpUpdateRecord record;
  record.timestamp = {static_cast<std::int64_t>(timestamp), micros};
  record.peer_address = peer;
  record.peer_as = peer_as;

  const auto withdrawn_len = in.u16();
  ByteReader withdrawn(in.bytes(withdrawn_len));
  if (in.failed()) return Malformed{"withdrawn routes overrun message"};
  while (withdrawn.remaining() > 0) {
    Ipv4Prefix p;
    if (!read_prefix(withdrawn, p)) return Malformed{"bad withdrawn prefix"};
    record.withdrawn.push_back(p);
  }

  const auto attr_len = in.u16();
  ByteReader attrs(in.bytes(attr_len));
  if (in.failed()) return Malformed{"path attributes overrun message"};
  std::optional<Origin> origin;
  std::optional<std::vector<AsNumber>> as_path;
  std::optional<std::vector<AsNumber>> as4_path;
  while (attrs.remaining() > 0) {
    const auto flags = attrs.u8();
    const auto code = attrs.u8();
    const std::size_t len = (flags & mrt::kFlagExtendedLength) ? attrs.u16() : attrs.u8();
    const auto value = attrs.bytes(len);
    if (attrs.failed()) return Malformed{"truncated path attribute"};
    if (code == mrt::kAttrOrigin) {
      if (len != 1 || value[0] > 2) return Malformed{"bad ORIGIN attribute"};
      origin = static_cast<Origin>(value[0]);
    } else if (code == mrt::kAttrAsPath) {
      std::vector<AsNumber> path;
      if (!read_as_path(value, as_size, path)) return Malformed{"bad AS_PATH attribute"};
      as_path = std::move(path);
    } else if (code == mrt::kAttrAs4Path) {
      std::vector<AsNumber> path;
      if (!read_as_path(value, 4, path)) return Malformed{"bad AS4_PATH attribute"};
      as4_path = std::move(path);
    }
    // Other attributes (including MP_REACH/MP_UNREACH) are ignored.
  }

  std::vector<Ipv4Prefix> nlri;
  while (in.remaining() > 0) {
    Ipv4Prefix p;
    if (!read_prefix(in, p)) return Malformed{"bad NLRI prefix"};
    nlri.push_back(p);
  }
  if (!nlri.empty()) {
    if (!origin) return Malformed{"announcement without ORIGIN"};
    if (!as_path && !as4_path) return Malformed{"announcement without AS_PATH"};
    const auto& path = as4_path ? *as4_path : *as_path;
    for (const auto& p : nlri) record.announced.push_back({p, path, *origin});
  }
  if (record.announced.empty() && record.withdrawn.empty()) return Skipped{"UPDATE without IPv4 routes"};
  try {
    validate(record);
  } catch (const ValidationError& e) {
    return Malformed{e.what()};
  }
  return record;
}

}  // namespace detail

/// Incremental MRT reader over any byte source. `Source` must provide
/// `std::size_t read(std::uint8_t*, std::size_t)` and
/// `std::size_t skip(std::size_t)`, both returning the count actually consumed.
///
/// Memory is bounded by one record payload. Malformed payloads inside a
/// well-framed record are counted and skipped; a truncated header or a length
/// field that runs past the end of input stops the stream and sets `error()`.
template <class Source>
class BasicMrtReader {
 public:
  explicit BasicMrtReader(Source source) : source_(std::move(source)) {}

  /// Next decoded record, or nullopt at end of input (or after an abort).
  std::optional<BgpUpdateRecord> next() {
    while (!done_) {
      std::array<std::uint8_t, mrt::kHeaderSize> header{};
      const std::size_t got = source_.read(header.data(), header.size());
      if (got == 0) {
        done_ = true;
        break;
      }
      if (got < header.size()) {
        abort("truncated MRT header");
        break;
      }
      ByteReader h(header);
      const auto timestamp = h.u32();
      const auto type = h.u16();
      const auto subtype = h.u16();
      const auto length = h.u32();
      const std::size_t record_offset = offset_;
      offset_ += header.size();

      const bool supported = type == mrt::kTypeBgp4mp || type == mrt::kTypeBgp4mpEt;
      if (!supported || length > mrt::kMaxDecodedPayload) {
        const std::size_t skipped = source_.skip(length);
        offset_ += skipped;
        if (skipped < length) {
          abort("MRT payload shorter than declared length", record_offset);
          break;
        }
        if (supported) {
          ++stats_.malformed;
          warnings_.push_back({record_offset, "BGP4MP payload too large"});
        } else {
          ++stats_.records_skipped;
        }
        continue;
      }

      buffer_.resize(length);
      const std::size_t read = source_.read(buffer_.data(), length);
      offset_ += read;
      if (read < length) {
        abort("MRT payload shorter than declared length", record_offset);
        break;
      }
      auto outcome = detail::decode_bgp4mp(timestamp, type, subtype, buffer_);
      if (auto* record = std::get_if<BgpUpdateRecord>(&outcome)) {
        ++stats_.records_emitted;
        return std::move(*record);
      }
      if (auto* bad = std::get_if<detail::Malformed>(&outcome)) {
        ++stats_.malformed;
        warnings_.push_back({record_offset, bad->reason});
      } else {
        ++stats_.records_skipped;
      }
    }
    return std::nullopt;
  }

  const ParseStats& stats() const { return stats_; }
  /// Set when the stream was abandoned (cannot resynchronize).
  const std::optional<ParseDiagnostic>& error() const { return error_; }
  /// Malformed records that were skipped, with their offsets.
  const std::vector<ParseDiagnostic>& warnings() const { return warnings_; }

 private:
  void abort(std::string message) { abort(std::move(message), offset_); }
  void abort(std::string message, std::size_t at) {
    ++stats_.malformed;
    error_ = ParseDiagnostic{at, std::move(message) + " at byte offset " + std::to_string(at)};
    done_ = true;
  }

  Source source_;
  std::vector<std::uint8_t> buffer_;
  ParseStats stats_;
  std::optional<ParseDiagnostic> error_;
  std::vector<ParseDiagnostic> warnings_;
  std::size_t offset_ = 0;
  bool done_ = false;
};

struct SpanSource {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::size_t read(std::uint8_t* out, std::size_t n) {
    n = std::min(n, bytes.size() - pos);
    if (n > 0) std::memcpy(out, bytes.data() + pos, n);
    pos += n;
    return n;
  }
  std::size_t skip(std::size_t n) {
    n = std::min(n, bytes.size() - pos);
    pos += n;
    return n;
  }
};

struct StreamSource {
  std::istream* in;

  std::size_t read(std::uint8_t* out, std::size_t n) {
    in->read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in->gcount());
  }
  std::size_t skip(std::size_t n) {
    in->ignore(static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in->gcount());
  }
};

using MrtReader = BasicMrtReader<StreamSource>;

struct MrtParseResult {
  std::vector<BgpUpdateRecord> records;
  ParseStats stats;
  std::optional<ParseDiagnostic> error;
  std::vector<ParseDiagnostic> warnings;
};

template <class Source>
MrtParseResult drain(BasicMrtReader<Source>& reader) {
  MrtParseResult result;
  while (auto r = reader.next()) result.records.push_back(std::move(*r));
  result.stats = reader.stats();
  result.error = reader.error();
  result.warnings = reader.warnings();
  return result;
}

inline MrtParseResult parse_mrt(std::span<const std::uint8_t> bytes) {
  BasicMrtReader<SpanSource> reader(SpanSource{bytes});
  return drain(reader);
}

inline MrtParseResult parse_mrt(std::istream& in) {
  MrtReader reader(StreamSource{&in});
  return drain(reader);
}

/// Encodes `record` as one MRT record carrying a BGP4MP MESSAGE_AS4 UPDATE.
///
/// A record with a non-zero microsecond part is framed as BGP4MP_ET (type 17)
/// so that the timestamp survives; otherwise type 16 is used. All
/// announcements of a record must share AS path and origin, since one UPDATE
/// carries a single attribute set.
inline void append_mrt(std::vector<std::uint8_t>& out, const BgpUpdateRecord& record) {
  validate(record);
  if (record.timestamp.seconds > 0xffffffffLL)
    throw ValidationError("timestamp", "does not fit the 32-bit MRT timestamp");
  const PrefixAnnouncement* shared = record.announced.empty() ? nullptr : &record.announced.front();
  for (const auto& a : record.announced)
    if (a.as_path != shared->as_path || a.origin != shared->origin)
      throw ValidationError("announced", "announcements in one record must share AS path and origin");

  ByteWriter w;
  auto write_prefix = [&w](const Ipv4Prefix& p) {
    w.u8(p.length);
    for (unsigned i = 0; i < (p.length + 7u) / 8u; ++i) w.u8(static_cast<std::uint8_t>(p.network.value >> (24 - 8 * i)));
  };

  const bool extended = record.timestamp.microseconds != 0;
  w.u32(static_cast<std::uint32_t>(record.timestamp.seconds));
  w.u16(extended ? mrt::kTypeBgp4mpEt : mrt::kTypeBgp4mp);
  w.u16(mrt::kSubtypeMessageAs4);
  w.u32(0);  // length, patched below
  const std::size_t payload_start = w.size();
  if (extended) w.u32(record.timestamp.microseconds);
  w.u32(record.peer_as);
  w.u32(0);  // local AS
  w.u16(0);  // interface index
  w.u16(1);  // AFI IPv4
  w.u32(record.peer_address.value);
  w.u32(0);  // local address

  const std::size_t bgp_start = w.size();
  for (int i = 0; i < 16; ++i) w.u8(0xff);
  w.u16(0);  // BGP length, patched below
  w.u8(2);   // UPDATE

  const std::size_t withdrawn_len_at = w.size();
  w.u16(0);
  for (const auto& p : record.withdrawn) write_prefix(p);
  w.patch_u16(withdrawn_len_at, static_cast<std::uint16_t>(w.size() - withdrawn_len_at - 2));

  const std::size_t attr_len_at = w.size();
  w.u16(0);
  if (shared) {
    w.u8(mrt::kFlagTransitive);
    w.u8(mrt::kAttrOrigin);
    w.u8(1);
    w.u8(static_cast<std::uint8_t>(shared->origin));

    const auto& path = shared->as_path;
    const std::size_t segments = (path.size() + 254) / 255;
    const std::size_t value_len = segments * 2 + path.size() * 4;
    if (value_len > 255) {
      w.u8(mrt::kFlagTransitive | mrt::kFlagExtendedLength);
      w.u8(mrt::kAttrAsPath);
      w.u16(static_cast<std::uint16_t>(value_len));
    } else {
      w.u8(mrt::kFlagTransitive);
      w.u8(mrt::kAttrAsPath);
      w.u8(static_cast<std::uint8_t>(value_len));
    }
    for (std::size_t i = 0; i < path.size(); i += 255) {
      const std::size_t n = std::min<std::size_t>(255, path.size() - i);
      w.u8(2);  // AS_SEQUENCE
      w.u8(static_cast<std::uint8_t>(n));
      for (std::size_t j = 0; j < n; ++j) w.u32(path[i + j]);
    }
  }
  w.patch_u16(attr_len_at, static_cast<std::uint16_t>(w.size() - attr_len_at - 2));
  for (const auto& a : record.announced) write_prefix(a.prefix);

  const std::size_t bgp_len = w.size() - bgp_start;
  if (bgp_len > 0xffff) throw ValidationError("announced", "UPDATE exceeds the 65535-byte BGP limit");
  w.patch_u16(bgp_start + 16, static_cast<std::uint16_t>(bgp_len));
  const auto payload_len = static_cast<std::uint32_t>(w.size() - payload_start);
  auto& buf = w.buffer();
  for (int i = 0; i < 4; ++i) buf[8 + i] = static_cast<std::uint8_t>(payload_len >> (24 - 8 * i));
  out.insert(out.end(), buf.begin(), buf.end());
}

inline std::vector<std::uint8_t> serialize_mrt(const BgpUpdateRecord& record) {
  std::vector<std::uint8_t> out;
  append_mrt(out, record);
  return out;
}

inline void write_mrt(std::ostream& os, const BgpUpdateRecord& record) {
  const auto bytes = serialize_mrt(record);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace sicn::bgp
