#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::sim {

/// Converts link ids to a per-link failure mask.
inline std::vector<bool> failure_mask(const Topology& t, std::span<const std::string> failed_links) {
  std::vector<bool> mask(t.links.size(), false);
  for (const auto& id : failed_links) {
    const auto at = t.link_index(id);
    if (!at) throw ValidationError("failed_links", "unknown link '" + id + "'");
    mask[*at] = true;
  }
  return mask;
}

/// Best path from every peer to every owned prefix under a failure mask.
/// The path is the shortest router path found by BFS (neighbours in link
/// document order), ending at the first router of the owning network that
/// the search reaches; its AS path lists the routers' AS numbers from the
/// peer outwards with consecutive repeats collapsed.
struct RouteTable {
  std::vector<std::size_t> peers;                                // router indices
  std::vector<std::pair<bgp::Ipv4Prefix, std::size_t>> prefixes;  // prefix, owning network
  std::vector<std::optional<std::vector<bgp::AsNumber>>> paths;   // peers x prefixes

  const std::optional<std::vector<bgp::AsNumber>>& path(std::size_t peer, std::size_t prefix) const {
    return paths[peer * prefixes.size() + prefix];
  }
};

inline RouteTable compute_routes(const Topology& t, const std::vector<bool>& failed) {
  RouteTable table;
  table.peers = t.peers();
  table.prefixes = t.prefixes();
  table.paths.resize(table.peers.size() * table.prefixes.size());
  const auto adj = adjacency(t, failed);
  std::vector<std::size_t> network_of(t.routers.size());
  for (std::size_t r = 0; r < t.routers.size(); ++r) network_of[r] = *t.network_index(t.routers[r].network);

  for (std::size_t p = 0; p < table.peers.size(); ++p) {
    const std::size_t source = table.peers[p];
    // BFS order doubles as distance order.
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(t.routers.size(), npos), order{source};
    parent[source] = source;
    for (std::size_t head = 0; head < order.size(); ++head)
      for (const auto& [v, link] : adj[order[head]])
        if (parent[v] == npos) {
          parent[v] = order[head];
          order.push_back(v);
        }
    std::vector<std::optional<std::vector<bgp::AsNumber>>> by_network(t.networks.size());
    for (auto r : order) {
      auto& slot = by_network[network_of[r]];
      if (slot) continue;
      std::vector<std::size_t> hops{r};
      while (hops.back() != source) hops.push_back(parent[hops.back()]);
      std::vector<bgp::AsNumber> path;
      for (auto it = hops.rbegin(); it != hops.rend(); ++it) {
        const auto asn = t.routers[*it].asn;
        if (path.empty() || path.back() != asn) path.push_back(asn);
      }
      slot = std::move(path);
    }
    for (std::size_t x = 0; x < table.prefixes.size(); ++x)
      table.paths[p * table.prefixes.size() + x] = by_network[table.prefixes[x].second];
  }
  return table;
}

/// Prefixes each peer (by router id) can reach with `failed_links` down.
inline std::map<std::string, std::set<bgp::Ipv4Prefix>> reachable_prefixes(const Topology& t,
                                                                           std::span<const std::string> failed_links) {
  const auto table = compute_routes(t, failure_mask(t, failed_links));
  std::map<std::string, std::set<bgp::Ipv4Prefix>> out;
  for (std::size_t p = 0; p < table.peers.size(); ++p) {
    auto& set = out[t.routers[table.peers[p]].id];
    for (std::size_t x = 0; x < table.prefixes.size(); ++x)
      if (table.path(p, x)) set.insert(table.prefixes[x].first);
  }
  return out;
}

}  // namespace sicn::sim
