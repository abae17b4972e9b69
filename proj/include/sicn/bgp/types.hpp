#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sicn/error.hpp"

namespace sicn::bgp {

using AsNumber = std::uint32_t;

struct Ipv4Address {
  std::uint32_t value = 0;

  static Ipv4Address parse(std::string_view text);

  std::string to_string() const {
    return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xff) +
           '.' + std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
  }

  friend auto operator<=>(const Ipv4Address&, const Ipv4Address&) = default;
};

/// IPv4 CIDR prefix. Host bits beyond `length` are always zero.
struct Ipv4Prefix {
  Ipv4Address network;
  std::uint8_t length = 0;

  static constexpr std::uint32_t mask_for(unsigned length) {
    return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
  }

  /// Builds a canonical prefix; host bits of `address` are cleared.
  static Ipv4Prefix make(Ipv4Address address, unsigned length) {
    if (length > 32) throw ValidationError("prefix", "mask length " + std::to_string(length) + " exceeds 32");
    return {Ipv4Address{address.value & mask_for(length)}, static_cast<std::uint8_t>(length)};
  }

  /// Parses "a.b.c.d/len"; host bits are cleared.
  static Ipv4Prefix parse(std::string_view text);

  bool is_canonical() const { return length <= 32 && (network.value & ~mask_for(length)) == 0; }

  std::string to_string() const { return network.to_string() + '/' + std::to_string(length); }

  friend auto operator<=>(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

enum class Origin : std::uint8_t { igp = 0, egp = 1, incomplete = 2 };

inline std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::igp: return "IGP";
    case Origin::egp: return "EGP";
    case Origin::incomplete: return "INCOMPLETE";
  }
  return "?";
}

/// Seconds and microseconds since the Unix epoch.
struct Timestamp {
  std::int64_t seconds = 0;
  std::uint32_t microseconds = 0;

  double as_seconds() const { return static_cast<double>(seconds) + microseconds * 1e-6; }
  std::int64_t as_microseconds() const { return seconds * 1000000 + microseconds; }

  static Timestamp from_microseconds(std::int64_t us) {
    return {us / 1000000, static_cast<std::uint32_t>(us % 1000000)};
  }

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct PrefixAnnouncement {
  Ipv4Prefix prefix;
  std::vector<AsNumber> as_path;
  Origin origin = Origin::igp;

  friend bool operator==(const PrefixAnnouncement&, const PrefixAnnouncement&) = default;
};

/// One timestamped BGP UPDATE received from a peer.
struct BgpUpdateRecord {
  Timestamp timestamp;
  Ipv4Address peer_address;
  AsNumber peer_as = 0;
  std::vector<PrefixAnnouncement> announced;
  std::vector<Ipv4Prefix> withdrawn;

  friend bool operator==(const BgpUpdateRecord&, const BgpUpdateRecord&) = default;
};

/// Throws ValidationError naming the first field that breaks a record invariant.
inline void validate(const BgpUpdateRecord& record) {
  if (record.timestamp.seconds < 0) throw ValidationError("timestamp", "negative seconds");
  if (record.timestamp.microseconds >= 1000000)
    throw ValidationError("timestamp", "microseconds out of range");
  if (record.announced.empty() && record.withdrawn.empty())
    throw ValidationError("announced", "record has neither announcements nor withdrawals");
  for (const auto& a : record.announced) {
    if (!a.prefix.is_canonical())
      throw ValidationError("announced.prefix", a.prefix.to_string() + " is not a canonical prefix");
    if (a.as_path.empty()) throw ValidationError("announced.as_path", "empty AS path for " + a.prefix.to_string());
    if (std::find(a.as_path.begin(), a.as_path.end(), AsNumber{0}) != a.as_path.end())
      throw ValidationError("announced.as_path", "AS 0 in path for " + a.prefix.to_string());
    if (static_cast<unsigned>(a.origin) > 2) throw ValidationError("announced.origin", "unknown origin code");
  }
  for (const auto& w : record.withdrawn)
    if (!w.is_canonical()) throw ValidationError("withdrawn", w.to_string() + " is not a canonical prefix");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_unsigned(std::string_view s, T& out) {
  if (s.empty() || s.front() == '+' || s.front() == '-') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

inline Ipv4Address Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  int octets = 0;
  while (true) {
    const auto dot = text.find('.');
    unsigned octet = 0;
    if (!detail::parse_unsigned(text.substr(0, dot), octet) || octet > 255 || octets == 4)
      throw ValidationError("address", "invalid IPv4 address");
    value = (value << 8) | octet;
    ++octets;
    if (dot == std::string_view::npos) break;
    text.remove_prefix(dot + 1);
  }
  if (octets != 4) throw ValidationError("address", "invalid IPv4 address");
  return Ipv4Address{value};
}

inline Ipv4Prefix Ipv4Prefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw ValidationError("prefix", "missing '/' in " + std::string(text));
  unsigned length = 0;
  if (!detail::parse_unsigned(text.substr(slash + 1), length))
    throw ValidationError("prefix", "invalid mask length in " + std::string(text));
  return make(Ipv4Address::parse(text.substr(0, slash)), length);
}

}  // namespace sicn::bgp
