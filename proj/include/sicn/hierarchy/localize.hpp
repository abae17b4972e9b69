#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::hierarchy {

struct RootCause {
  std::string link;
  std::pair<std::string, std::string> endpoints;  // routers, in link order
  std::vector<sim::Endpoint> components;          // the two terminating interfaces

  friend bool operator==(const RootCause&, const RootCause&) = default;
};

/// Router pair whose link each Step 2 fault class refers to.
inline std::pair<std::string, std::string> fault_routers(int step2_class) {
  switch (step2_class) {
    case 1: return {"R1", "R2"};
    case 2: return {"R5", "R6"};
  }
  throw ValidationError("step2_class", "only fault classes 1 and 2 localize, got " + std::to_string(step2_class));
}

/// Root cause for a link id: the link and the interfaces at both ends.
inline RootCause root_cause_for_link(const sim::Link& link) {
  return {link.id, {link.a.router, link.b.router}, {link.a, link.b}};
}

/// Maps a Step 2 fault class to its link in `topology`. Component-level
/// telemetry could refine the candidate list; without it the two interfaces
/// terminating the link are the candidates.
inline RootCause localize(int step2_class, const sim::Topology& topology) {
  const auto [r1, r2] = fault_routers(step2_class);
  const auto* link = topology.link_between(r1, r2);
  if (!link)
    throw ValidationError("topology", "no link between " + r1 + " and " + r2 + " for fault class " +
                                          std::to_string(step2_class));
  return root_cause_for_link(*link);
}

inline nlohmann::json to_json(const RootCause& rc) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : rc.components) components.push_back({{"router", c.router}, {"interface", c.interface}});
  return {{"link", rc.link}, {"endpoints", {rc.endpoints.first, rc.endpoints.second}}, {"components", components}};
}

inline RootCause root_cause_from_json(const nlohmann::json& j) {
  RootCause rc;
  rc.link = j.at("link").get<std::string>();
  const auto& e = j.at("endpoints");
  rc.endpoints = {e.at(0).get<std::string>(), e.at(1).get<std::string>()};
  for (const auto& c : j.at("components"))
    rc.components.push_back({c.at("router").get<std::string>(), c.at("interface").get<std::string>()});
  return rc;
}

}  // namespace sicn::hierarchy
