#pragma once

// Discrete-event BGP update generator.
//
// Time is kept in integer microseconds and every random draw comes from one
// Rng seeded by the scenario, consumed in event order, so a scenario always
// yields the same stream. Each emitted record carries one prefix.
//
// Per (peer, prefix) the generator tracks what the peer last advertised.
// Route changes are applied through "sync" actions, which advertise the
// current best path (or withdraw when none is left), so any scheduled
// disturbance is eventually repaired and the final advertised state matches
// the final topology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "sicn/bgp/types.hpp"
#include "sicn/error.hpp"
#include "sicn/features/labels.hpp"
#include "sicn/rng.hpp"
#include "sicn/sim/routing.hpp"
#include "sicn/sim/scenario.hpp"
#include "sicn/sim/topology.hpp"

namespace sicn::sim {

struct GeneratedStream {
  std::vector<bgp::BgpUpdateRecord> records;
  std::vector<features::GroundTruthInterval> ground_truth;
};

namespace detail {

inline std::int64_t to_micros(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1e6)); }

/// Origin attribute by owning-network role.
inline bgp::Origin origin_for(NetworkRole role) {
  switch (role) {
    case NetworkRole::backbone: return bgp::Origin::igp;
    case NetworkRole::satellite_backhaul:
    case NetworkRole::fixed_backhaul: return bgp::Origin::egp;
    default: return bgp::Origin::incomplete;
  }
}

class Generator {
 public:
  using Sink = std::function<void(bgp::BgpUpdateRecord&&)>;

  Generator(const Topology& topology, const Scenario& scenario, Sink sink)
      : topo_(topology), sc_(scenario), sink_(std::move(sink)), rng_(scenario.gen.seed) {
    validate(sc_, topo_);
    failed_count_.assign(topo_.links.size(), 0);
    routes_ = compute_routes(topo_, mask());
    P_ = routes_.peers.size();
    X_ = routes_.prefixes.size();
    advertised_ = routes_.paths;  // sessions are established before the stream starts
    for (const auto& [prefix, net] : routes_.prefixes) origins_.push_back(origin_for(topo_.networks[net].role));
    end_us_ = to_micros(static_cast<double>(sc_.start + sc_.duration));
    event_state_.resize(sc_.events.size());
    for (std::size_t e = 0; e < sc_.events.size(); ++e) {
      const auto& ev = sc_.events[e];
      auto& st = event_state_[e];
      if (ev.kind == EventKind::worm) {
        const auto profile = worm_profile(*ev.incident);
        st.multiplier = ev.multiplier.value_or(profile.multiplier);
        st.churn = ev.churn.value_or(profile.churn);
        for (std::size_t p = 0; p < P_; ++p) {
          const auto& id = topo_.routers[routes_.peers[p]].id;
          if (ev.targets.empty() || std::find(ev.targets.begin(), ev.targets.end(), id) != ev.targets.end())
            st.peers.push_back(p);
        }
      }
    }
  }

  void run() {
    const std::int64_t t0 = to_micros(static_cast<double>(sc_.start));
    const auto& g = sc_.gen;
    for (std::size_t p = 0; p < P_; ++p) {
      if (g.lambda_a > 0) push(t0 + gap(g.lambda_a), Kind::baseline_announce, p);
      if (g.lambda_w > 0) push(t0 + gap(g.lambda_w), Kind::baseline_flap, p);
    }
    for (std::size_t e = 0; e < sc_.events.size(); ++e) {
      push(to_micros(sc_.events[e].start), Kind::event_start, e);
      push(to_micros(sc_.events[e].end), Kind::event_end, e);
    }
    while (!queue_.empty()) {
      const Action a = queue_.top();
      queue_.pop();
      dispatch(a);
    }
  }

 private:
  enum class Kind : std::uint8_t {
    event_end,
    event_start,
    sync,
    withdraw,
    baseline_announce,
    baseline_flap,
    worm_fire,
    flap_fire,
  };

  struct Action {
    std::int64_t time;
    std::uint64_t seq;
    Kind kind;
    std::size_t a;
    std::size_t b;

    bool operator>(const Action& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  struct EventState {
    bool active = false;
    double multiplier = 1;
    double churn = 0;
    std::vector<std::size_t> peers;           // worm targets
    std::vector<std::size_t> affected;        // outage: pair indices whose route changed
  };

  std::int64_t gap(double rate) { return std::max<std::int64_t>(1, to_micros(rng_.exponential(rate))); }
  std::int64_t jitter(double max_seconds) { return to_micros(rng_.uniform(0.0, max_seconds)); }

  void push(std::int64_t time, Kind kind, std::size_t a = 0, std::size_t b = 0) {
    queue_.push({time, seq_++, kind, a, b});
  }

  std::vector<bool> mask() const {
    std::vector<bool> m(failed_count_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = failed_count_[i] > 0;
    return m;
  }

  void emit_announce(std::int64_t t, std::size_t p, std::size_t x, const std::vector<bgp::AsNumber>& path) {
    const auto& peer = topo_.routers[routes_.peers[p]];
    bgp::BgpUpdateRecord r;
    r.timestamp = bgp::Timestamp::from_microseconds(t);
    r.peer_address = *peer.address;
    r.peer_as = peer.asn;
    r.announced.push_back({routes_.prefixes[x].first, path, origins_[x]});
    advertised_[p * X_ + x] = path;
    sink_(std::move(r));
  }

  void emit_withdraw(std::int64_t t, std::size_t p, std::size_t x) {
    const auto& peer = topo_.routers[routes_.peers[p]];
    bgp::BgpUpdateRecord r;
    r.timestamp = bgp::Timestamp::from_microseconds(t);
    r.peer_address = *peer.address;
    r.peer_as = peer.asn;
    r.withdrawn.push_back(routes_.prefixes[x].first);
    advertised_[p * X_ + x].reset();
    sink_(std::move(r));
  }

  void sync(std::int64_t t, std::size_t p, std::size_t x) {
    const auto& best = routes_.path(p, x);
    if (best)
      emit_announce(t, p, x, *best);
    else if (advertised_[p * X_ + x])
      emit_withdraw(t, p, x);
  }

  bool running(std::int64_t t) const { return t < end_us_; }

  /// Recomputes routes; returns pair indices whose best path changed.
  std::vector<std::size_t> reroute() {
    auto next = compute_routes(topo_, mask());
    std::vector<std::size_t> changed;
    for (std::size_t i = 0; i < next.paths.size(); ++i)
      if (next.paths[i] != routes_.paths[i]) changed.push_back(i);
    routes_ = std::move(next);
    return changed;
  }

  void dispatch(const Action& a) {
    const auto& g = sc_.gen;
    const std::int64_t t = a.time;
    switch (a.kind) {
      case Kind::sync: sync(t, a.a, a.b); break;
      case Kind::withdraw: emit_withdraw(t, a.a, a.b); break;
      case Kind::baseline_announce: {
        if (!running(t)) break;
        const auto x = static_cast<std::size_t>(rng_.below(X_));
        if (routes_.path(a.a, x)) sync(t, a.a, x);
        push(t + gap(g.lambda_a), Kind::baseline_announce, a.a);
        break;
      }
      case Kind::baseline_flap: {
        if (!running(t)) break;
        const auto x = static_cast<std::size_t>(rng_.below(X_));
        if (routes_.path(a.a, x) && advertised_[a.a * X_ + x]) {
          emit_withdraw(t, a.a, x);
          push(t + 1 + jitter(2 * g.propagation_delay), Kind::sync, a.a, x);
        }
        push(t + gap(g.lambda_w), Kind::baseline_flap, a.a);
        break;
      }
      case Kind::event_start: start_event(t, a.a); break;
      case Kind::event_end: end_event(t, a.a); break;
      case Kind::worm_fire: {
        auto& st = event_state_[a.a];
        if (!st.active || !running(t) || st.peers.empty()) break;
        const auto p = st.peers[static_cast<std::size_t>(rng_.below(st.peers.size()))];
        const auto x = static_cast<std::size_t>(rng_.below(X_));
        if (const auto& best = routes_.path(p, x)) {
          if (rng_.bernoulli(st.churn)) {
            auto path = *best;
            const auto inserts = 1 + rng_.below(3);
            for (std::uint64_t k = 0; k < inserts; ++k) {
              const auto at = 1 + rng_.below(path.size());
              path.insert(path.begin() + static_cast<std::ptrdiff_t>(at),
                          static_cast<bgp::AsNumber>(64512 + rng_.below(1000)));
            }
            emit_announce(t, p, x, path);
            push(t + 1 + jitter(2 * g.propagation_delay), Kind::sync, p, x);
          } else {
            emit_announce(t, p, x, *best);
          }
        }
        push(t + gap(g.lambda_a * (st.multiplier - 1) * static_cast<double>(st.peers.size())), Kind::worm_fire, a.a);
        break;
      }
      case Kind::flap_fire: {
        auto& st = event_state_[a.a];
        if (!st.active || !running(t) || st.affected.empty()) break;
        const auto i = st.affected[static_cast<std::size_t>(rng_.below(st.affected.size()))];
        const auto p = i / X_, x = i % X_;
        emit_withdraw(t, p, x);
        if (routes_.path(p, x)) push(t + 1 + jitter(g.propagation_delay), Kind::sync, p, x);
        push(t + gap(g.outage_flap_rate * static_cast<double>(st.affected.size())), Kind::flap_fire, a.a);
        break;
      }
    }
  }

  void start_event(std::int64_t t, std::size_t e) {
    const auto& ev = sc_.events[e];
    const auto& g = sc_.gen;
    auto& st = event_state_[e];
    st.active = true;
    if (ev.kind == EventKind::worm) {
      const double rate = g.lambda_a * (st.multiplier - 1) * static_cast<double>(st.peers.size());
      if (rate > 0) push(t + gap(rate), Kind::worm_fire, e);
      return;
    }
    ++failed_count_[*topo_.link_index(ev.target)];
    st.affected = reroute();
    const double spread = ev.kind == EventKind::weather_fade ? ev.onset.value_or(g.fade_onset) : g.propagation_delay;
    for (auto i : st.affected) {
      const auto p = i / X_, x = i % X_;
      if (!advertised_[i]) continue;
      const auto when = t + jitter(spread);
      push(when, Kind::withdraw, p, x);
      if (routes_.path(p, x)) push(when + to_micros(g.reconvergence_delay) + jitter(g.propagation_delay), Kind::sync, p, x);
    }
    if (!st.affected.empty() && g.outage_flap_rate > 0)
      push(t + to_micros(spread) + gap(g.outage_flap_rate * static_cast<double>(st.affected.size())), Kind::flap_fire, e);
  }

  void end_event(std::int64_t t, std::size_t e) {
    const auto& ev = sc_.events[e];
    auto& st = event_state_[e];
    st.active = false;
    if (ev.kind == EventKind::worm) return;
    --failed_count_[*topo_.link_index(ev.target)];
    for (auto i : reroute()) push(t + jitter(sc_.gen.propagation_delay), Kind::sync, i / X_, i % X_);
  }

  const Topology& topo_;
  const Scenario& sc_;
  Sink sink_;
  Rng rng_;
  RouteTable routes_;
  std::size_t P_ = 0, X_ = 0;
  std::vector<bgp::Origin> origins_;
  std::vector<std::optional<std::vector<bgp::AsNumber>>> advertised_;
  std::vector<int> failed_count_;
  std::vector<EventState> event_state_;
  std::priority_queue<Action, std::vector<Action>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::int64_t end_us_ = 0;
};

}  // namespace detail

/// Streams the scenario's records to `sink` in timestamp order and returns
/// the ground-truth intervals. Baseline processes stop at start + duration;
/// pending repairs and event ends scheduled later are still played out.
inline std::vector<features::GroundTruthInterval> generate_stream(const Topology& topology, const Scenario& scenario,
                                                                  const std::function<void(bgp::BgpUpdateRecord&&)>& sink) {
  detail::Generator gen(topology, scenario, sink);
  gen.run();
  return ground_truth(scenario, topology);
}

inline GeneratedStream generate_stream(const Topology& topology, const Scenario& scenario) {
  GeneratedStream out;
  out.ground_truth = generate_stream(topology, scenario, [&](bgp::BgpUpdateRecord&& r) { out.records.push_back(std::move(r)); });
  return out;
}

}  // namespace sicn::sim
