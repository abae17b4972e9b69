#pragma once

// Network graph for the simulator: networks with roles and prefixes, routers
// with interfaces, and links between (router, interface) endpoints.
//
// JSON schema:
//   networks[]: id, role, asn, prefixes[] (CIDR strings),
//               backhauls[] (communities only): { via: network id, links[]: link ids }
//   routers[]:  id, network, role ("router" | "satellite" | "base-station"),
//               address (IPv4, routers that peer only), asn (optional, defaults
//               to the network's), interfaces[]
//   links[]:    id, a: {router, interface}, b: {router, interface}, medium

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"

namespace sicn::sim {

enum class NetworkRole {
  satellite_backhaul,
  fixed_backhaul,
  backbone,
  community_cellular,
  community_sdcn,
  community_dual,
};

enum class Medium { satellite_rf, fiber, microwave, cellular };

inline std::string_view to_string(NetworkRole r) {
  switch (r) {
    case NetworkRole::satellite_backhaul: return "satellite-backhaul";
    case NetworkRole::fixed_backhaul: return "fixed-backhaul";
    case NetworkRole::backbone: return "backbone";
    case NetworkRole::community_cellular: return "community-cellular";
    case NetworkRole::community_sdcn: return "community-sdcn";
    case NetworkRole::community_dual: return "community-dual";
  }
  return "?";
}

inline std::string_view to_string(Medium m) {
  switch (m) {
    case Medium::satellite_rf: return "satellite-rf";
    case Medium::fiber: return "fiber";
    case Medium::microwave: return "microwave";
    case Medium::cellular: return "cellular";
  }
  return "?";
}

inline bool is_community(NetworkRole r) {
  return r == NetworkRole::community_cellular || r == NetworkRole::community_sdcn || r == NetworkRole::community_dual;
}

/// One declared way out of a community: the backhaul network it uses and the
/// links the traffic crosses on the way to the backbone.
struct Backhaul {
  std::string via;
  std::vector<std::string> links;
};

struct Network {
  std::string id;
  NetworkRole role = NetworkRole::backbone;
  bgp::AsNumber asn = 0;
  std::vector<bgp::Ipv4Prefix> prefixes;
  std::vector<Backhaul> backhauls;
};

struct Router {
  std::string id;
  std::string network;
  std::string role = "router";
  bgp::AsNumber asn = 0;
  std::optional<bgp::Ipv4Address> address;
  std::vector<std::string> interfaces;

  bool is_peer() const { return role == "router" && address.has_value(); }
};

struct Endpoint {
  std::string router;
  std::string interface;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct Link {
  std::string id;
  Endpoint a;
  Endpoint b;
  Medium medium = Medium::fiber;

  bool joins(std::string_view r1, std::string_view r2) const {
    return (a.router == r1 && b.router == r2) || (a.router == r2 && b.router == r1);
  }
};

class Topology {
 public:
  std::vector<Network> networks;
  std::vector<Router> routers;
  std::vector<Link> links;

  const Network* find_network(std::string_view id) const { return find_in(networks, id); }
  const Router* find_router(std::string_view id) const { return find_in(routers, id); }
  const Link* find_link(std::string_view id) const { return find_in(links, id); }

  std::optional<std::size_t> network_index(std::string_view id) const { return index_in(networks, id); }
  std::optional<std::size_t> router_index(std::string_view id) const { return index_in(routers, id); }
  std::optional<std::size_t> link_index(std::string_view id) const { return index_in(links, id); }

  /// First link whose endpoints are the two routers, in either order.
  const Link* link_between(std::string_view r1, std::string_view r2) const {
    for (const auto& l : links)
      if (l.joins(r1, r2)) return &l;
    return nullptr;
  }

  /// Indices of routers that act as BGP peers, in document order.
  std::vector<std::size_t> peers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < routers.size(); ++i)
      if (routers[i].is_peer()) out.push_back(i);
    return out;
  }

  /// Every owned prefix in document order, with its owning network index.
  std::vector<std::pair<bgp::Ipv4Prefix, std::size_t>> prefixes() const {
    std::vector<std::pair<bgp::Ipv4Prefix, std::size_t>> out;
    for (std::size_t n = 0; n < networks.size(); ++n)
      for (const auto& p : networks[n].prefixes) out.emplace_back(p, n);
    return out;
  }

  /// Throws ValidationError naming the first offending element.
  void validate() const;

 private:
  template <class T>
  static const T* find_in(const std::vector<T>& v, std::string_view id) {
    for (const auto& x : v)
      if (x.id == id) return &x;
    return nullptr;
  }
  template <class T>
  static std::optional<std::size_t> index_in(const std::vector<T>& v, std::string_view id) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].id == id) return i;
    return std::nullopt;
  }
};

/// Router adjacency over links not in `failed` (link indices). Neighbours
/// keep link document order, which fixes BFS tie-breaks.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(const Topology& t,
                                                                              const std::vector<bool>& failed = {}) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(t.routers.size());
  for (std::size_t l = 0; l < t.links.size(); ++l) {
    if (!failed.empty() && failed[l]) continue;
    const auto a = t.router_index(t.links[l].a.router), b = t.router_index(t.links[l].b.router);
    if (!a || !b) continue;
    adj[*a].push_back({*b, l});
    adj[*b].push_back({*a, l});
  }
  return adj;
}

/// BFS from `source`; returns the predecessor of each router (or npos).
inline std::vector<std::size_t> bfs_tree(const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& adj,
                                         std::size_t source) {
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(adj.size(), npos);
  std::vector<bool> seen(adj.size(), false);
  std::deque<std::size_t> queue{source};
  seen[source] = true;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto& [v, link] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      parent[v] = u;
      queue.push_back(v);
    }
  }
  parent[source] = source;
  return parent;
}

inline void Topology::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) { throw ValidationError(field, msg); };
  std::set<std::string> ids;
  for (const auto& n : networks) {
    if (n.id.empty()) fail("network", "missing id");
    if (!ids.insert(n.id).second) fail("network " + n.id, "duplicate id");
    if (n.asn == 0) fail("network " + n.id, "AS number 0 is reserved");
    for (const auto& p : n.prefixes)
      if (!p.is_canonical()) fail("network " + n.id, "prefix " + p.to_string() + " has host bits set");
    if (!is_community(n.role) && !n.backhauls.empty()) fail("network " + n.id, "only communities declare backhauls");
  }
  ids.clear();
  std::set<std::pair<std::string, std::string>> interfaces;
  for (const auto& r : routers) {
    if (r.id.empty()) fail("router", "missing id");
    if (!ids.insert(r.id).second) fail("router " + r.id, "duplicate id");
    if (!find_network(r.network)) fail("router " + r.id, "unknown network '" + r.network + "'");
    if (r.role != "router" && r.role != "satellite" && r.role != "base-station")
      fail("router " + r.id, "unknown role '" + r.role + "'");
    if (r.asn == 0) fail("router " + r.id, "AS number 0 is reserved");
    for (const auto& i : r.interfaces)
      if (!interfaces.insert({r.id, i}).second) fail("router " + r.id, "duplicate interface '" + i + "'");
  }
  ids.clear();
  std::set<std::pair<std::string, std::string>> used;
  for (const auto& l : links) {
    const std::string field = "link " + l.id;
    if (l.id.empty()) fail("link", "missing id");
    if (!ids.insert(l.id).second) fail(field, "duplicate id");
    for (const auto* e : {&l.a, &l.b}) {
      if (!find_router(e->router)) fail(field, "unknown router '" + e->router + "'");
      if (!interfaces.count({e->router, e->interface}))
        fail(field, "router " + e->router + " has no interface '" + e->interface + "'");
      if (!used.insert({e->router, e->interface}).second)
        fail(field, "interface " + e->router + "/" + e->interface + " already terminates another link");
    }
    if (l.a.router == l.b.router) fail(field, "both endpoints on router " + l.a.router);
  }

  // Every community must reach a backbone network over the link graph.
  const auto adj = adjacency(*this);
  for (const auto& n : networks) {
    if (!is_community(n.role)) continue;
    bool reached = false;
    for (std::size_t r = 0; r < routers.size() && !reached; ++r) {
      if (routers[r].network != n.id) continue;
      const auto parent = bfs_tree(adj, r);
      for (std::size_t v = 0; v < routers.size() && !reached; ++v)
        if (parent[v] != static_cast<std::size_t>(-1) && find_network(routers[v].network)->role == NetworkRole::backbone)
          reached = true;
    }
    if (!reached) fail("network " + n.id, "community has no path to a backbone network");
  }
  for (const auto& n : networks) {
    if (!is_community(n.role)) continue;
    std::set<std::string> vias;
    for (const auto& b : n.backhauls) {
      const auto* via = find_network(b.via);
      if (!via) fail("network " + n.id, "backhaul via unknown network '" + b.via + "'");
      if (via->role != NetworkRole::satellite_backhaul && via->role != NetworkRole::fixed_backhaul)
        fail("network " + n.id, "backhaul via " + b.via + " which is not a backhaul network");
      if (b.links.empty()) fail("network " + n.id, "backhaul via " + b.via + " lists no links");
      for (const auto& id : b.links)
        if (!find_link(id)) fail("network " + n.id, "backhaul via " + b.via + " names unknown link '" + id + "'");
      vias.insert(b.via);
    }
    if (n.role == NetworkRole::community_dual && vias.size() < 2)
      fail("network " + n.id, "dual-homed community needs at least 2 distinct backhauls");
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

inline NetworkRole parse_role(const std::string& s, const std::string& field) {
  for (auto r : {NetworkRole::satellite_backhaul, NetworkRole::fixed_backhaul, NetworkRole::backbone,
                 NetworkRole::community_cellular, NetworkRole::community_sdcn, NetworkRole::community_dual})
    if (to_string(r) == s) return r;
  throw ValidationError(field, "unknown role '" + s + "'");
}

inline Medium parse_medium(const std::string& s, const std::string& field) {
  for (auto m : {Medium::satellite_rf, Medium::fiber, Medium::microwave, Medium::cellular})
    if (to_string(m) == s) return m;
  throw ValidationError(field, "unknown medium '" + s + "'");
}

}  // namespace detail

/// Parses and validates a topology document.
inline Topology topology_from_json(const nlohmann::json& doc) {
  Topology t;
  std::string where = "topology";
  try {
    for (const auto& jn : doc.at("networks")) {
      Network n;
      n.id = jn.at("id").get<std::string>();
      where = "network " + n.id;
      n.role = detail::parse_role(jn.at("role").get<std::string>(), where);
      n.asn = jn.at("asn").get<bgp::AsNumber>();
      for (const auto& p : jn.value("prefixes", nlohmann::json::array())) n.prefixes.push_back(bgp::Ipv4Prefix::parse(p.get<std::string>()));
      for (const auto& b : jn.value("backhauls", nlohmann::json::array()))
        n.backhauls.push_back({b.at("via").get<std::string>(), b.at("links").get<std::vector<std::string>>()});
      t.networks.push_back(std::move(n));
    }
    for (const auto& jr : doc.at("routers")) {
      Router r;
      r.id = jr.at("id").get<std::string>();
      where = "router " + r.id;
      r.network = jr.at("network").get<std::string>();
      r.role = jr.value("role", std::string("router"));
      if (jr.contains("address")) r.address = bgp::Ipv4Address::parse(jr["address"].get<std::string>());
      if (jr.contains("asn")) {
        r.asn = jr["asn"].get<bgp::AsNumber>();
      } else if (const auto* n = t.find_network(r.network)) {
        r.asn = n->asn;
      }
      r.interfaces = jr.value("interfaces", std::vector<std::string>{});
      t.routers.push_back(std::move(r));
    }
    for (const auto& jl : doc.at("links")) {
      Link l;
      l.id = jl.at("id").get<std::string>();
      where = "link " + l.id;
      l.a = {jl.at("a").at("router").get<std::string>(), jl.at("a").at("interface").get<std::string>()};
      l.b = {jl.at("b").at("router").get<std::string>(), jl.at("b").at("interface").get<std::string>()};
      l.medium = detail::parse_medium(jl.at("medium").get<std::string>(), where);
      t.links.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where, e.what());
  } catch (const ValidationError& e) {
    if (e.field() == where) throw;
    throw ValidationError(where, e.what());
  }
  t.validate();
  return t;
}

inline nlohmann::json to_json(const Topology& t) {
  using nlohmann::json;
  json doc;
  doc["networks"] = json::array();
  for (const auto& n : t.networks) {
    json jn{{"id", n.id}, {"role", to_string(n.role)}, {"asn", n.asn}};
    jn["prefixes"] = json::array();
    for (const auto& p : n.prefixes) jn["prefixes"].push_back(p.to_string());
    if (!n.backhauls.empty()) {
      jn["backhauls"] = json::array();
      for (const auto& b : n.backhauls) jn["backhauls"].push_back({{"via", b.via}, {"links", b.links}});
    }
    doc["networks"].push_back(std::move(jn));
  }
  doc["routers"] = json::array();
  for (const auto& r : t.routers) {
    json jr{{"id", r.id}, {"network", r.network}, {"role", r.role}, {"asn", r.asn}, {"interfaces", r.interfaces}};
    if (r.address) jr["address"] = r.address->to_string();
    doc["routers"].push_back(std::move(jr));
  }
  doc["links"] = json::array();
  for (const auto& l : t.links)
    doc["links"].push_back({{"id", l.id},
                            {"a", {{"router", l.a.router}, {"interface", l.a.interface}}},
                            {"b", {{"router", l.b.router}, {"interface", l.b.interface}}},
                            {"medium", to_string(l.medium)}});
  return doc;
}

/// The built-in eight-network community setup. Same content as
/// data/default_topology.json.
inline constexpr std::string_view kDefaultTopologyJson = R"json({
  "networks": [
    {"id": "N0", "role": "satellite-backhaul", "asn": 65000,
     "prefixes": ["10.0.0.0/24", "10.0.1.0/24", "10.0.2.0/24", "10.0.3.0/24"]},
    {"id": "N1", "role": "fixed-backhaul", "asn": 65001,
     "prefixes": ["10.1.0.0/24", "10.1.1.0/24", "10.1.2.0/24", "10.1.3.0/24"]},
    {"id": "N2", "role": "backbone", "asn": 65002,
     "prefixes": ["10.2.0.0/24", "10.2.1.0/24", "10.2.2.0/24", "10.2.3.0/24"]},
    {"id": "N3", "role": "backbone", "asn": 65003,
     "prefixes": ["10.3.0.0/24", "10.3.1.0/24", "10.3.2.0/24", "10.3.3.0/24"]},
    {"id": "N4", "role": "backbone", "asn": 65004,
     "prefixes": ["10.4.0.0/24", "10.4.1.0/24", "10.4.2.0/24", "10.4.3.0/24"]},
    {"id": "N5", "role": "community-cellular", "asn": 65005,
     "prefixes": ["10.5.0.0/24", "10.5.1.0/24", "10.5.2.0/24", "10.5.3.0/24"],
     "backhauls": [{"via": "N0", "links": ["R2-BS", "SAT-R2", "R3-SAT", "R3-R6"]}]},
    {"id": "N6", "role": "community-sdcn", "asn": 65006,
     "prefixes": ["10.6.0.0/24", "10.6.1.0/24", "10.6.2.0/24", "10.6.3.0/24"],
     "backhauls": [{"via": "N0", "links": ["SAT-R4", "R3-SAT", "R3-R6"]}]},
    {"id": "N7", "role": "community-dual", "asn": 65007,
     "prefixes": ["10.7.0.0/24", "10.7.1.0/24", "10.7.2.0/24", "10.7.3.0/24"],
     "backhauls": [{"via": "N1", "links": ["R2-R9", "R1-R2", "R1-R5"]},
                   {"via": "N0", "links": ["SAT-R9", "R3-SAT", "R3-R6"]}]}
  ],
  "routers": [
    {"id": "R1", "network": "N1", "role": "router", "address": "10.255.0.1", "interfaces": ["if-R2", "if-R5"]},
    {"id": "R2", "network": "N1", "role": "router", "address": "10.255.0.2", "interfaces": ["if-R1", "if-SAT", "if-BS", "if-R9"]},
    {"id": "R3", "network": "N0", "role": "router", "address": "10.255.0.3", "interfaces": ["if-R6", "if-SAT"]},
    {"id": "R4", "network": "N6", "role": "router", "address": "10.255.0.4", "interfaces": ["if-SAT"]},
    {"id": "R5", "network": "N2", "role": "router", "address": "10.255.0.5", "interfaces": ["if-R1", "if-R6"]},
    {"id": "R6", "network": "N2", "role": "router", "address": "10.255.0.6", "interfaces": ["if-R5", "if-R7", "if-R8", "if-R3"]},
    {"id": "R7", "network": "N3", "role": "router", "address": "10.255.0.7", "interfaces": ["if-R6"]},
    {"id": "R8", "network": "N4", "role": "router", "address": "10.255.0.8", "interfaces": ["if-R6"]},
    {"id": "R9", "network": "N7", "role": "router", "address": "10.255.0.9", "interfaces": ["if-R2", "if-SAT"]},
    {"id": "SAT", "network": "N0", "role": "satellite", "interfaces": ["if-R3", "if-R2", "if-R4", "if-R9"]},
    {"id": "BS", "network": "N5", "role": "base-station", "interfaces": ["if-R2"]}
  ],
  "links": [
    {"id": "R1-R2", "a": {"router": "R1", "interface": "if-R2"}, "b": {"router": "R2", "interface": "if-R1"}, "medium": "fiber"},
    {"id": "R1-R5", "a": {"router": "R1", "interface": "if-R5"}, "b": {"router": "R5", "interface": "if-R1"}, "medium": "fiber"},
    {"id": "R5-R6", "a": {"router": "R5", "interface": "if-R6"}, "b": {"router": "R6", "interface": "if-R5"}, "medium": "fiber"},
    {"id": "R6-R7", "a": {"router": "R6", "interface": "if-R7"}, "b": {"router": "R7", "interface": "if-R6"}, "medium": "fiber"},
    {"id": "R6-R8", "a": {"router": "R6", "interface": "if-R8"}, "b": {"router": "R8", "interface": "if-R6"}, "medium": "fiber"},
    {"id": "R3-R6", "a": {"router": "R3", "interface": "if-R6"}, "b": {"router": "R6", "interface": "if-R3"}, "medium": "fiber"},
    {"id": "R3-SAT", "a": {"router": "R3", "interface": "if-SAT"}, "b": {"router": "SAT", "interface": "if-R3"}, "medium": "satellite-rf"},
    {"id": "SAT-R2", "a": {"router": "SAT", "interface": "if-R2"}, "b": {"router": "R2", "interface": "if-SAT"}, "medium": "satellite-rf"},
    {"id": "SAT-R4", "a": {"router": "SAT", "interface": "if-R4"}, "b": {"router": "R4", "interface": "if-SAT"}, "medium": "satellite-rf"},
    {"id": "R2-BS", "a": {"router": "R2", "interface": "if-BS"}, "b": {"router": "BS", "interface": "if-R2"}, "medium": "microwave"},
    {"id": "R2-R9", "a": {"router": "R2", "interface": "if-R9"}, "b": {"router": "R9", "interface": "if-R2"}, "medium": "fiber"},
    {"id": "SAT-R9", "a": {"router": "SAT", "interface": "if-R9"}, "b": {"router": "R9", "interface": "if-SAT"}, "medium": "satellite-rf"}
  ]
})json";

inline Topology default_topology() { return topology_from_json(nlohmann::json::parse(kDefaultTopologyJson)); }

/// Loads a topology file; the name "default" selects the built-in document.
inline Topology load_topology(const std::string& path) {
  if (path == "default") return default_topology();
  std::ifstream in(path);
  if (!in) throw ValidationError("topology", "cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("topology", "'" + path + "' is not valid JSON: " + e.what());
  }
  return topology_from_json(doc);
}

}  // namespace sicn::sim
