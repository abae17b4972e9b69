#pragma once

// Pipe-separated text form of BGP updates, one route per line:
//
//   ts|peer_ip|peer_as|A|prefix|as1 as2 ...|origin
//   ts|peer_ip|peer_as|W|prefix
//
// `ts` is whole seconds, optionally followed by a six-digit fraction
// ("100.000250"). Lines starting with '#' and blank lines are ignored by the
// stream reader.

#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"

namespace sicn::bgp {

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto at = s.find(sep);
    out.push_back(s.substr(0, at));
    if (at == std::string_view::npos) break;
    s.remove_prefix(at + 1);
  }
  return out;
}

inline Timestamp parse_timestamp(std::string_view text, std::size_t line_no) {
  Timestamp ts;
  const auto dot = text.find('.');
  std::uint64_t seconds = 0;
  if (!parse_unsigned(text.substr(0, dot), seconds) || seconds > static_cast<std::uint64_t>(INT64_MAX / 1000000))
    throw ParseError(line_no, "line " + std::to_string(line_no) + ": invalid timestamp '" + std::string(text) + "'");
  ts.seconds = static_cast<std::int64_t>(seconds);
  if (dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    std::uint32_t micros = 0;
    if (frac.empty() || frac.size() > 6 || !parse_unsigned(frac, micros))
      throw ParseError(line_no, "line " + std::to_string(line_no) + ": invalid timestamp fraction '" + std::string(text) + "'");
    for (std::size_t i = frac.size(); i < 6; ++i) micros *= 10;
    ts.microseconds = micros;
  }
  return ts;
}

}  // namespace detail

/// Parses one update line. Errors carry `line_no` as their position.
inline BgpUpdateRecord parse_update_line(std::string_view line, std::size_t line_no = 1) {
  auto fail = [line_no](const std::string& msg) -> ParseError {
    return ParseError(line_no, "line " + std::to_string(line_no) + ": " + msg);
  };
  auto fields = detail::split(line, '|');
  for (auto& f : fields) f = detail::trim(f);
  if (fields.size() < 4) throw fail("expected at least 4 fields, got " + std::to_string(fields.size()));

  BgpUpdateRecord record;
  record.timestamp = detail::parse_timestamp(fields[0], line_no);
  try {
    record.peer_address = Ipv4Address::parse(fields[1]);
  } catch (const ValidationError&) {
    throw fail("invalid peer address '" + std::string(fields[1]) + "'");
  }
  if (!detail::parse_unsigned(fields[2], record.peer_as)) throw fail("invalid peer AS '" + std::string(fields[2]) + "'");

  const auto kind = fields[3];
  Ipv4Prefix prefix;
  auto read_prefix = [&](std::string_view text) {
    try {
      prefix = Ipv4Prefix::parse(text);
    } catch (const ValidationError&) {
      throw fail("invalid prefix '" + std::string(text) + "'");
    }
  };
  if (kind == "W") {
    if (fields.size() != 5) throw fail("withdrawal expects 5 fields, got " + std::to_string(fields.size()));
    read_prefix(fields[4]);
    record.withdrawn.push_back(prefix);
  } else if (kind == "A") {
    if (fields.size() != 7) throw fail("announcement expects 7 fields, got " + std::to_string(fields.size()));
    read_prefix(fields[4]);
    PrefixAnnouncement a;
    a.prefix = prefix;
    for (auto token : detail::split(fields[5], ' ')) {
      token = detail::trim(token);
      if (token.empty()) continue;
      AsNumber as = 0;
      if (!detail::parse_unsigned(token, as)) throw fail("invalid AS number '" + std::string(token) + "'");
      a.as_path.push_back(as);
    }
    if (a.as_path.empty()) throw fail("empty AS path");
    const auto origin = fields[6];
    if (origin == "IGP") a.origin = Origin::igp;
    else if (origin == "EGP") a.origin = Origin::egp;
    else if (origin == "INCOMPLETE") a.origin = Origin::incomplete;
    else throw fail("invalid origin '" + std::string(origin) + "'");
    record.announced.push_back(std::move(a));
  } else {
    throw fail("unknown update kind '" + std::string(kind) + "'");
  }
  try {
    validate(record);
  } catch (const ValidationError& e) {
    throw fail(e.what());
  }
  return record;
}

/// One line per announcement and per withdrawal of `record`.
inline std::vector<std::string> format_update_lines(const BgpUpdateRecord& record) {
  std::string head = std::to_string(record.timestamp.seconds);
  if (record.timestamp.microseconds != 0) {
    char frac[16];
    std::snprintf(frac, sizeof frac, ".%06u", record.timestamp.microseconds);
    head += frac;
  }
  head += '|' + record.peer_address.to_string() + '|' + std::to_string(record.peer_as) + '|';

  std::vector<std::string> lines;
  for (const auto& w : record.withdrawn) lines.push_back(head + "W|" + w.to_string());
  for (const auto& a : record.announced) {
    std::string path;
    for (std::size_t i = 0; i < a.as_path.size(); ++i) {
      if (i) path += ' ';
      path += std::to_string(a.as_path[i]);
    }
    lines.push_back(head + "A|" + a.prefix.to_string() + '|' + path + '|' + std::string(to_string(a.origin)));
  }
  return lines;
}

inline void write_update_lines(std::ostream& os, const BgpUpdateRecord& record) {
  for (const auto& line : format_update_lines(record)) os << line << '\n';
}

/// Streams records from text, skipping comments and blank lines.
inline void read_update_lines(std::istream& in, const std::function<void(BgpUpdateRecord&&)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    sink(parse_update_line(body, line_no));
  }
}

inline std::vector<BgpUpdateRecord> read_update_lines(std::istream& in) {
  std::vector<BgpUpdateRecord> out;
  read_update_lines(in, [&out](BgpUpdateRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

}  // namespace sicn::bgp
