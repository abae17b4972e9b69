#pragma once

// Scenario documents: generator settings plus scripted events.
//
//   {
//     "start": 0, "duration": 600000, "seed": 7,
//     "generator": {"lambda_a": 0.5, "lambda_w": 0.02, "propagation_delay": 5, ...},
//     "events": [
//       {"kind": "worm", "class": "Slammer", "start": 1000, "end": 4000,
//        "targets": ["R1", "R5"], "multiplier": 10, "churn": 0.6},
//       {"kind": "link_outage", "target": "R1-R2", "start": 9000, "end": 12000},
//       {"kind": "weather_fade", "target": "SAT-R9", "start": 20000, "end": 21000, "onset": 120}
//     ]
//   }
//
// Worm multiplier/churn default per class; `targets` defaults to every peer.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sicn/error.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::sim {

enum class EventKind { link_outage, worm, weather_fade };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::link_outage: return "link_outage";
    case EventKind::worm: return "worm";
    case EventKind::weather_fade: return "weather_fade";
  }
  return "?";
}

struct ScenarioEvent {
  EventKind kind = EventKind::link_outage;
  std::string target;                // link id (outage, fade)
  std::vector<std::string> targets;  // peer router ids (worm); empty = all peers
  double start = 0;
  double end = 0;
  std::optional<features::IncidentClass> incident;  // worm only
  std::optional<double> multiplier;                 // worm announcement-rate multiplier
  std::optional<double> churn;                      // worm share of path-perturbed announcements
  std::optional<double> onset;                      // fade onset spread, seconds
};

/// Per-class worm defaults: rate multiplier and churn probability.
struct WormProfile {
  double multiplier;
  double churn;
};

inline WormProfile worm_profile(features::IncidentClass c) {
  switch (c) {
    case features::IncidentClass::code_red_i: return {3.0, 0.2};
    case features::IncidentClass::nimda: return {6.0, 0.4};
    case features::IncidentClass::slammer: return {10.0, 0.6};
    default: break;
  }
  throw ValidationError("class", "worm events need an intrusion class (1, 2 or 3)");
}

struct GenConfig {
  double lambda_a = 0.5;              // baseline announcements per peer per second
  double lambda_w = 0.02;             // baseline withdraw/re-announce pairs per peer per second
  double propagation_delay = 5.0;     // seconds
  double reconvergence_delay = 30.0;  // seconds until alternate paths are advertised
  double outage_flap_rate = 0.1;      // withdrawals per affected route per second during an outage
  double fade_onset = 120.0;          // default onset spread of a weather fade, seconds
  std::uint64_t seed = 0;
};

struct Scenario {
  std::int64_t start = 0;
  std::int64_t duration = 0;  // seconds of baseline traffic
  GenConfig gen;
  std::vector<ScenarioEvent> events;
};

/// Checks rates, intervals, targets and worm classes against `topology`.
inline void validate(const Scenario& s, const Topology& topology) {
  const auto& g = s.gen;
  if (s.start < 0) throw ValidationError("start", "must be non-negative");
  if (s.duration < 0) throw ValidationError("duration", "must be non-negative");
  for (auto [name, v] : {std::pair<const char*, double>{"lambda_a", g.lambda_a}, {"lambda_w", g.lambda_w},
                         {"propagation_delay", g.propagation_delay}, {"reconvergence_delay", g.reconvergence_delay},
                         {"outage_flap_rate", g.outage_flap_rate}, {"fade_onset", g.fade_onset}})
    if (!(v >= 0) || !std::isfinite(v)) throw ValidationError(name, "must be a finite value >= 0");
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    const std::string field = "events[" + std::to_string(i) + "]";
    if (!(e.start < e.end)) throw ValidationError(field, "start must be before end");
    if (e.start < static_cast<double>(s.start)) throw ValidationError(field, "starts before the scenario");
    if (e.kind == EventKind::worm) {
      if (!e.incident || !features::is_intrusion(*e.incident))
        throw ValidationError(field, "worm event needs class 1 (CodeRedI), 2 (Nimda) or 3 (Slammer)");
      for (const auto& p : e.targets) {
        const auto* r = topology.find_router(p);
        if (!r || !r->is_peer()) throw ValidationError(field, "target '" + p + "' is not a peer router");
      }
      if (e.multiplier && !(*e.multiplier >= 1)) throw ValidationError(field, "multiplier must be >= 1");
      if (e.churn && !(*e.churn >= 0 && *e.churn <= 1)) throw ValidationError(field, "churn must lie in [0, 1]");
    } else {
      const auto* link = topology.find_link(e.target);
      if (!link) throw ValidationError(field, "unknown link '" + e.target + "'");
      if (e.kind == EventKind::weather_fade && link->medium != Medium::satellite_rf)
        throw ValidationError(field, "weather fades apply to satellite-rf links only; '" + e.target + "' is " +
                                         std::string(to_string(link->medium)));
      if (e.incident) throw ValidationError(field, "only worm events carry a class");
      if (e.onset && !(*e.onset >= 0)) throw ValidationError(field, "onset must be >= 0");
    }
  }
}

/// Ground-truth intervals implied by the events: worms carry their class,
/// outages and fades on the R1-R2 and R5-R6 links map to the two fault
/// classes, everything else is unlabeled.
inline std::vector<features::GroundTruthInterval> ground_truth(const Scenario& s, const Topology& topology) {
  std::vector<features::GroundTruthInterval> out;
  for (const auto& e : s.events) {
    if (e.kind == EventKind::worm) {
      out.push_back({*e.incident, e.start, e.end});
      continue;
    }
    const auto* link = topology.find_link(e.target);
    if (link && link->joins("R1", "R2"))
      out.push_back({features::IncidentClass::outage_r1r2, e.start, e.end});
    else if (link && link->joins("R5", "R6"))
      out.push_back({features::IncidentClass::outage_r5r6, e.start, e.end});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline Scenario scenario_from_json(const nlohmann::json& doc) {
  Scenario s;
  std::string where = "scenario";
  try {
    s.start = doc.value("start", std::int64_t{0});
    s.duration = doc.at("duration").get<std::int64_t>();
    if (doc.contains("seed")) s.gen.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("generator")) {
      where = "generator";
      const auto& g = doc["generator"];
      for (const auto& [key, value] : g.items()) {
        if (key == "lambda_a") s.gen.lambda_a = value.get<double>();
        else if (key == "lambda_w") s.gen.lambda_w = value.get<double>();
        else if (key == "propagation_delay") s.gen.propagation_delay = value.get<double>();
        else if (key == "reconvergence_delay") s.gen.reconvergence_delay = value.get<double>();
        else if (key == "outage_flap_rate") s.gen.outage_flap_rate = value.get<double>();
        else if (key == "fade_onset") s.gen.fade_onset = value.get<double>();
        else throw ValidationError("generator", "unknown setting '" + key + "'");
      }
    }
    const auto events = doc.value("events", nlohmann::json::array());
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& je = events[i];
      where = "events[" + std::to_string(i) + "]";
      ScenarioEvent e;
      const auto kind = je.at("kind").get<std::string>();
      if (kind == "link_outage") e.kind = EventKind::link_outage;
      else if (kind == "worm") e.kind = EventKind::worm;
      else if (kind == "weather_fade") e.kind = EventKind::weather_fade;
      else throw ValidationError(where, "unknown event kind '" + kind + "'");
      e.start = je.at("start").get<double>();
      e.end = je.at("end").get<double>();
      if (je.contains("target")) e.target = je["target"].get<std::string>();
      if (je.contains("targets")) e.targets = je["targets"].get<std::vector<std::string>>();
      if (je.contains("class")) {
        const auto& c = je["class"];
        e.incident = c.is_number_integer() ? features::incident_from_label(c.get<int>())
                                           : features::parse_incident(c.get<std::string>());
      }
      if (je.contains("multiplier")) e.multiplier = je["multiplier"].get<double>();
      if (je.contains("churn")) e.churn = je["churn"].get<double>();
      if (je.contains("onset")) e.onset = je["onset"].get<double>();
      s.events.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(where, ex.what());
  }
  return s;
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json doc{{"start", s.start}, {"duration", s.duration}, {"seed", s.gen.seed}};
  doc["generator"] = {{"lambda_a", s.gen.lambda_a},
                      {"lambda_w", s.gen.lambda_w},
                      {"propagation_delay", s.gen.propagation_delay},
                      {"reconvergence_delay", s.gen.reconvergence_delay},
                      {"outage_flap_rate", s.gen.outage_flap_rate},
                      {"fade_onset", s.gen.fade_onset}};
  doc["events"] = nlohmann::json::array();
  for (const auto& e : s.events) {
    nlohmann::json je{{"kind", to_string(e.kind)}, {"start", e.start}, {"end", e.end}};
    if (!e.target.empty()) je["target"] = e.target;
    if (!e.targets.empty()) je["targets"] = e.targets;
    if (e.incident) je["class"] = features::name(*e.incident);
    if (e.multiplier) je["multiplier"] = *e.multiplier;
    if (e.churn) je["churn"] = *e.churn;
    if (e.onset) je["onset"] = *e.onset;
    doc["events"].push_back(std::move(je));
  }
  return doc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario", "cannot open '" + path + "'");
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("scenario", "'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace sicn::sim
