#pragma once

// Diagnosis -> ordered list of mitigation actions.
//
// Fault rules, in plan order:
//   backhaul_switch  dual-homed community whose declared backhaul crosses the
//                    faulty link and that has another backhaul avoiding it
//   hap_dispatch     cellular community whose backhaul crosses the link; the
//                    HAP bridges its base station to the satellite node
//   band_switch      weather-suspected fault on a satellite-rf link
//   repair_dispatch  always, one target per root-cause component
// Intrusions defer to NID countermeasures; normal windows need no action.
//
// JSON: {"window_start", "verdict", "class",
//        "actions": [{"action", "targets": [...], "bridged_path": [...] | null, "rationale"}]}

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/hierarchy/pipeline.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::mitigate {

enum class ActionKind { hap_dispatch, backhaul_switch, band_switch, repair_dispatch, none, defer_to_nid };

inline std::string_view to_string(ActionKind a) {
  switch (a) {
    case ActionKind::hap_dispatch: return "hap_dispatch";
    case ActionKind::backhaul_switch: return "backhaul_switch";
    case ActionKind::band_switch: return "band_switch";
    case ActionKind::repair_dispatch: return "repair_dispatch";
    case ActionKind::none: return "none";
    case ActionKind::defer_to_nid: return "defer_to_nid";
  }
  return "?";
}

struct Action {
  ActionKind kind = ActionKind::none;
  std::vector<std::string> targets;
  std::optional<std::vector<std::string>> bridged_path;
  std::string rationale;
};

struct MitigationPlan {
  std::int64_t window_start = 0;
  hierarchy::Verdict verdict = hierarchy::Verdict::normal;
  features::IncidentClass incident = features::IncidentClass::normal;
  std::vector<Action> actions;

  bool has(ActionKind k) const {
    for (const auto& a : actions)
      if (a.kind == k) return true;
    return false;
  }
  const Action* first(ActionKind k) const {
    for (const auto& a : actions)
      if (a.kind == k) return &a;
    return nullptr;
  }
};

/// "router/interface" target string of a component.
inline std::string component_target(const sim::Endpoint& e) { return e.router + "/" + e.interface; }

inline MitigationPlan plan(const hierarchy::Diagnosis& d, const sim::Topology& topology) {
  MitigationPlan p;
  p.window_start = d.window_start;
  p.verdict = d.verdict;
  p.incident = d.incident;
  switch (d.verdict) {
    case hierarchy::Verdict::normal:
      p.actions.push_back({ActionKind::none, {}, std::nullopt, "no anomaly identified"});
      return p;
    case hierarchy::Verdict::intrusion:
      p.actions.push_back({ActionKind::defer_to_nid, {std::string(features::name(d.incident))}, std::nullopt,
                           "intrusion incidents are handled by attack countermeasures"});
      return p;
    case hierarchy::Verdict::fault: break;
  }
  if (!d.root_cause) throw ValidationError("root_cause", "fault diagnosis without a root cause");
  const auto& rc = *d.root_cause;
  const auto* link = topology.find_link(rc.link);
  if (!link) throw ValidationError("root_cause", "link '" + rc.link + "' is not in the topology");

  auto crosses = [&](const sim::Backhaul& b) {
    return std::find(b.links.begin(), b.links.end(), rc.link) != b.links.end();
  };

  for (const auto& n : topology.networks) {
    if (n.role != sim::NetworkRole::community_dual) continue;
    bool affected = false;
    const sim::Backhaul* survivor = nullptr;
    for (const auto& b : n.backhauls) {
      if (crosses(b))
        affected = true;
      else if (!survivor)
        survivor = &b;
    }
    if (affected && survivor)
      p.actions.push_back({ActionKind::backhaul_switch, {n.id, survivor->via}, std::nullopt,
                           n.id + " moves its traffic to the backhaul via " + survivor->via + " while " + rc.link +
                               " is down"});
  }

  const sim::Router* satellite = nullptr;
  for (const auto& r : topology.routers)
    if (r.role == "satellite") {
      satellite = &r;
      break;
    }
  for (const auto& n : topology.networks) {
    if (n.role != sim::NetworkRole::community_cellular) continue;
    if (std::none_of(n.backhauls.begin(), n.backhauls.end(), crosses)) continue;
    const sim::Router* bs = nullptr;
    for (const auto& r : topology.routers)
      if (r.role == "base-station" && r.network == n.id) {
        bs = &r;
        break;
      }
    if (!bs || !satellite) continue;
    p.actions.push_back({ActionKind::hap_dispatch, {n.id, bs->id, satellite->id},
                         std::vector<std::string>{bs->id, "HAP", satellite->id},
                         "a HAP bridges " + bs->id + " to " + satellite->id + " while " + rc.link + " is down"});
  }

  if (d.weather_suspected && link->medium == sim::Medium::satellite_rf)
    p.actions.push_back({ActionKind::band_switch, {rc.link}, std::nullopt,
                         "weather fade on " + rc.link + ": move the satellite link to the other band"});

  Action repair{ActionKind::repair_dispatch, {}, std::nullopt, "inspect the interfaces terminating " + rc.link};
  for (const auto& c : rc.components) repair.targets.push_back(component_target(c));
  p.actions.push_back(std::move(repair));
  return p;
}

inline nlohmann::json to_json(const MitigationPlan& p) {
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : p.actions)
    actions.push_back({{"action", to_string(a.kind)},
                       {"targets", a.targets},
                       {"bridged_path", a.bridged_path ? nlohmann::json(*a.bridged_path) : nlohmann::json(nullptr)},
                       {"rationale", a.rationale}});
  return {{"window_start", p.window_start},
          {"verdict", hierarchy::to_string(p.verdict)},
          {"class", features::name(p.incident)},
          {"actions", actions}};
}

}  // namespace sicn::mitigate
