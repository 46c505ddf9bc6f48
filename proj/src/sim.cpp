#include "netsmith/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <future>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "netsmith/errors.hpp"
#include "netsmith/seed.hpp"

namespace netsmith {

void SimConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw InvalidArgument(fmt::format("{} must be positive (got {})", name, v));
  };
  positive(vcs_per_layer, "vcs_per_layer");
  positive(buffer_depth_flits, "buffer_depth_flits");
  positive(router_latency_cycles, "router_latency_cycles");
  positive(link_latency_cycles, "link_latency_cycles");
  positive(control_packet_flits, "control_packet_flits");
  positive(data_packet_flits, "data_packet_flits");
  positive(measure_cycles, "measure_cycles");
  positive(drain_cap_cycles, "drain_cap_cycles");
  if (warmup_cycles < 0) throw InvalidArgument("warmup_cycles must be nonnegative");
  if (data_packet_fraction < 0 || data_packet_fraction > 1) throw InvalidArgument("data_packet_fraction must lie in [0,1]");
  if (routing.size() != topology.size()) throw InvalidArgument("routing table size does not match the topology");
  if (vcs.layer_count() < 1) throw InvalidArgument("VC assignment has no layers");
  routing.validate(topology);
}

std::int64_t packet_zero_load_latency(const SimConfig& cfg, int hops, int flits) {
  return static_cast<std::int64_t>(hops + 1) * cfg.router_latency_cycles +
         static_cast<std::int64_t>(hops) * cfg.link_latency_cycles + (flits - 1);
}

namespace {

Rational mean_flits(const SimConfig& cfg) {
  return cfg.data_packet_fraction * cfg.data_packet_flits + (Rational(1) - cfg.data_packet_fraction) * cfg.control_packet_flits;
}

int hops_of(const RoutingTable& rt, RouterId s, RouterId d) { return static_cast<int>(rt.path(s, d).size()) - 1; }

}  // namespace

Rational zero_load_latency(const SimConfig& cfg, const TrafficMatrix& traffic) {
  const int a = traffic.active_sources();
  if (a == 0) throw InvalidArgument("traffic has no demand");
  Rational sum(0);
  for (const Flow& f : traffic.flows()) {
    if (f.weight == 0) continue;
    int h = hops_of(cfg.routing, f.src, f.dst);
    sum += f.weight / traffic.row_sum(f.src) * ((h + 1) * cfg.router_latency_cycles + h * cfg.link_latency_cycles);
  }
  return sum / a + mean_flits(cfg) - 1;
}

struct Simulator::Impl {
  struct Flit {
    std::int32_t packet;
    bool head;
    bool tail;
    std::int64_t ready;
  };
  struct InVc {
    std::deque<Flit> buf;
    int out_port = -1;
    int out_vc = -1;
  };
  struct InPort {
    int channel = -1;  // -1 for injection
    std::vector<InVc> vcs;
    int rr = 0;
  };
  struct OutPort {
    int channel = -1;  // -1 for ejection
    std::vector<int> credits;
    std::vector<char> owned;
    int rr = 0;
  };
  struct Router {
    std::vector<InPort> in;
    std::vector<OutPort> out;
    int alloc_rr = 0;
  };
  struct OnLink {
    std::int64_t arrive;
    Flit flit;
    int vc;
  };
  struct Credit {
    std::int64_t arrive;
    int vc;
  };
  struct Link {
    RouterId src, dst;
    int out_port, in_port;
    std::deque<OnLink> flits;
    std::deque<Credit> credits;
  };
  struct Packet {
    RouterId src, dst;
    int layer;
    int flits;
    std::int64_t created;
    bool measured;
  };
  struct Source {
    std::vector<std::deque<std::int32_t>> queue;  // per layer
    std::vector<std::int32_t> active;             // per injection VC, -1 idle
    std::vector<int> sent;                        // flits pushed of the active packet
    std::vector<double> cumulative;
    std::vector<RouterId> dests;
    int rr = 0;
  };

  Impl(const SimConfig& c, const TrafficMatrix& traffic, double r) : cfg(c), rate(r), rng(c.seed) {
    cfg.validate();
    if (traffic.size() != cfg.topology.size()) throw InvalidArgument("traffic size does not match the topology");
    if (!(rate >= 0) || !std::isfinite(rate)) throw InvalidArgument("injection rate must be a nonnegative number");
    n = cfg.topology.size();
    layers = cfg.vcs.layer_count();
    vcs = layers * cfg.vcs_per_layer;
    packet_prob = rate / to_double(mean_flits(cfg));
    if (packet_prob > 1) throw InvalidArgument(fmt::format("rate {} exceeds one packet per cycle", rate));
    data_prob = to_double(cfg.data_packet_fraction);

    routers.resize(static_cast<std::size_t>(n));
    for (RouterId r = 0; r < n; ++r) {
      Router& rt = routers[static_cast<std::size_t>(r)];
      rt.in.resize(cfg.topology.in_neighbors(r).size() + 1);
      rt.out.resize(cfg.topology.out_neighbors(r).size() + 1);
      for (InPort& p : rt.in) p.vcs.resize(static_cast<std::size_t>(vcs));
      for (OutPort& p : rt.out) {
        p.credits.assign(static_cast<std::size_t>(vcs), cfg.buffer_depth_flits);
        p.owned.assign(static_cast<std::size_t>(vcs), 0);
      }
    }
    links.resize(cfg.topology.channel_count());
    for (std::size_t ci = 0; ci < links.size(); ++ci) {
      const Channel c = cfg.topology.channels()[ci];
      Link& l = links[ci];
      l.src = c.src;
      l.dst = c.dst;
      auto outs = cfg.topology.out_neighbors(c.src);
      auto ins = cfg.topology.in_neighbors(c.dst);
      l.out_port = static_cast<int>(std::find(outs.begin(), outs.end(), c.dst) - outs.begin());
      l.in_port = static_cast<int>(std::find(ins.begin(), ins.end(), c.src) - ins.begin());
      routers[static_cast<std::size_t>(c.src)].out[static_cast<std::size_t>(l.out_port)].channel = static_cast<int>(ci);
      routers[static_cast<std::size_t>(c.dst)].in[static_cast<std::size_t>(l.in_port)].channel = static_cast<int>(ci);
    }

    // Next output port per (flow, router); the last port ejects.
    next_port.assign(static_cast<std::size_t>(n) * n * n, -1);
    flow_layer.assign(static_cast<std::size_t>(n) * n, -1);
    sources.resize(static_cast<std::size_t>(n));
    for (Source& s : sources) {
      s.queue.resize(static_cast<std::size_t>(layers));
      s.active.assign(static_cast<std::size_t>(vcs), -1);
      s.sent.assign(static_cast<std::size_t>(vcs), 0);
    }
    for (const Flow& f : traffic.flows()) {
      if (f.weight == 0) continue;
      if (f.src == f.dst) throw InvalidArgument(fmt::format("flow {}->{} targets its own source", f.src, f.dst));
      if (!cfg.routing.has(f.src, f.dst))
        throw InvalidArgument(fmt::format("configuration error: flow {}->{} has no route", f.src, f.dst));
      int layer = cfg.vcs.layer_of(f.src, f.dst);
      if (layer < 0 || layer >= layers)
        throw InvalidArgument(fmt::format("configuration error: flow {}->{} has layer {}", f.src, f.dst, layer));
      flow_layer[static_cast<std::size_t>(f.src * n + f.dst)] = layer;
      const Path& p = cfg.routing.path(f.src, f.dst);
      for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        auto outs = cfg.topology.out_neighbors(p[k]);
        int port = static_cast<int>(std::find(outs.begin(), outs.end(), p[k + 1]) - outs.begin());
        std::int16_t& slot = next_port[route_index(f.src, f.dst, p[k])];
        if (slot >= 0) throw InvalidArgument(fmt::format("configuration error: route {}->{} revisits router {}", f.src, f.dst, p[k]));
        slot = static_cast<std::int16_t>(port);
      }
      next_port[route_index(f.src, f.dst, f.dst)] =
          static_cast<std::int16_t>(cfg.topology.out_neighbors(f.dst).size());
      Source& s = sources[static_cast<std::size_t>(f.src)];
      double prev = s.cumulative.empty() ? 0.0 : s.cumulative.back();
      s.cumulative.push_back(prev + to_double(f.weight));
      s.dests.push_back(f.dst);
    }
    for (RouterId r = 0; r < n; ++r)
      if (!sources[static_cast<std::size_t>(r)].dests.empty()) active_sources.push_back(r);
    if (active_sources.empty()) throw InvalidArgument("traffic has no demand");
  }

  std::size_t route_index(RouterId s, RouterId d, RouterId at) const {
    return (static_cast<std::size_t>(s) * static_cast<std::size_t>(n) + static_cast<std::size_t>(d)) *
               static_cast<std::size_t>(n) +
           static_cast<std::size_t>(at);
  }

  double uniform() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

  bool in_window(std::int64_t c) const {
    return c >= cfg.warmup_cycles && c < static_cast<std::int64_t>(cfg.warmup_cycles) + cfg.measure_cycles;
  }

  void generate() {
    if (!injecting || packet_prob <= 0) return;
    for (RouterId r : active_sources) {
      if (uniform() >= packet_prob) continue;
      Source& s = sources[static_cast<std::size_t>(r)];
      const bool data = uniform() < data_prob;
      double pick = uniform() * s.cumulative.back();
      std::size_t k = static_cast<std::size_t>(std::upper_bound(s.cumulative.begin(), s.cumulative.end(), pick) - s.cumulative.begin());
      k = std::min(k, s.dests.size() - 1);
      RouterId d = s.dests[k];
      Packet p{r, d, flow_layer[static_cast<std::size_t>(r * n + d)],
               data ? cfg.data_packet_flits : cfg.control_packet_flits, now, in_window(now)};
      if (p.measured) {
        ++measured_outstanding;
        generated_measured_flits += p.flits;
      }
      packets.push_back(p);
      s.queue[static_cast<std::size_t>(p.layer)].push_back(static_cast<std::int32_t>(packets.size() - 1));
      ++queued_packets;
    }
  }

  void inject() {
    for (RouterId r = 0; r < n; ++r) {
      Source& s = sources[static_cast<std::size_t>(r)];
      if (queued_packets == 0 && partial_packets == 0) return;
      InPort& port = routers[static_cast<std::size_t>(r)].in.back();
      for (int k = 0; k < vcs; ++k) {
        const int vc = (s.rr + k) % vcs;
        const std::size_t v = static_cast<std::size_t>(vc);
        if (s.active[v] < 0) {
          auto& q = s.queue[static_cast<std::size_t>(vc / cfg.vcs_per_layer)];
          if (q.empty()) continue;
          s.active[v] = q.front();
          s.sent[v] = 0;
          q.pop_front();
          --queued_packets;
          ++partial_packets;
        }
        InVc& in = port.vcs[v];
        if (static_cast<int>(in.buf.size()) >= cfg.buffer_depth_flits) continue;
        const Packet& p = packets[static_cast<std::size_t>(s.active[v])];
        const int idx = s.sent[v]++;
        in.buf.push_back({s.active[v], idx == 0, idx == p.flits - 1, now + cfg.router_latency_cycles});
        ++injected;
        last_move = now;
        if (idx == p.flits - 1) {
          s.active[v] = -1;
          --partial_packets;
        }
        s.rr = (vc + 1) % vcs;
        break;
      }
    }
  }

  void arrivals() {
    for (Link& l : links) {
      while (!l.flits.empty() && l.flits.front().arrive <= now) {
        OnLink& f = l.flits.front();
        routers[static_cast<std::size_t>(l.dst)].in[static_cast<std::size_t>(l.in_port)].vcs[static_cast<std::size_t>(f.vc)].buf.push_back(f.flit);
        l.flits.pop_front();
      }
      while (!l.credits.empty() && l.credits.front().arrive <= now) {
        ++routers[static_cast<std::size_t>(l.src)].out[static_cast<std::size_t>(l.out_port)].credits[static_cast<std::size_t>(l.credits.front().vc)];
        l.credits.pop_front();
      }
    }
  }

  void allocate_vcs(RouterId r) {
    Router& rt = routers[static_cast<std::size_t>(r)];
    const int ports = static_cast<int>(rt.in.size());
    const int total = ports * vcs;
    const int eject = static_cast<int>(rt.out.size()) - 1;
    for (int k = 0; k < total; ++k) {
      const int slot = (rt.alloc_rr + k) % total;
      InVc& in = rt.in[static_cast<std::size_t>(slot / vcs)].vcs[static_cast<std::size_t>(slot % vcs)];
      if (in.out_port >= 0 || in.buf.empty()) continue;
      const Flit& f = in.buf.front();
      if (!f.head || f.ready > now) continue;
      const Packet& p = packets[static_cast<std::size_t>(f.packet)];
      const int port = next_port[route_index(p.src, p.dst, r)];
      if (port == eject) {
        in.out_port = port;
        in.out_vc = 0;
        continue;
      }
      OutPort& out = rt.out[static_cast<std::size_t>(port)];
      const int base = p.layer * cfg.vcs_per_layer;
      for (int j = 0; j < cfg.vcs_per_layer; ++j) {
        const int ov = base + (out.rr + j) % cfg.vcs_per_layer;
        if (out.owned[static_cast<std::size_t>(ov)]) continue;
        out.owned[static_cast<std::size_t>(ov)] = 1;
        in.out_port = port;
        in.out_vc = ov;
        break;
      }
    }
    rt.alloc_rr = (rt.alloc_rr + 1) % total;
  }

  void traverse(RouterId r) {
    Router& rt = routers[static_cast<std::size_t>(r)];
    const int eject = static_cast<int>(rt.out.size()) - 1;
    const int ports = static_cast<int>(rt.in.size());
    // Input stage: one candidate VC per input port.
    request.assign(static_cast<std::size_t>(ports), -1);
    for (int ip = 0; ip < ports; ++ip) {
      InPort& port = rt.in[static_cast<std::size_t>(ip)];
      for (int k = 0; k < vcs; ++k) {
        const int vc = (port.rr + k) % vcs;
        const InVc& in = port.vcs[static_cast<std::size_t>(vc)];
        if (in.out_port < 0 || in.buf.empty() || in.buf.front().ready > now) continue;
        if (in.out_port != eject && rt.out[static_cast<std::size_t>(in.out_port)].credits[static_cast<std::size_t>(in.out_vc)] <= 0) continue;
        request[static_cast<std::size_t>(ip)] = vc;
        break;
      }
    }
    // Output stage: round-robin over requesting input ports.
    for (int op = 0; op <= eject; ++op) {
      OutPort& out = rt.out[static_cast<std::size_t>(op)];
      for (int k = 0; k < ports; ++k) {
        const int ip = (out.rr + k) % ports;
        const int vc = request[static_cast<std::size_t>(ip)];
        if (vc < 0) continue;
        InPort& port = rt.in[static_cast<std::size_t>(ip)];
        InVc& in = port.vcs[static_cast<std::size_t>(vc)];
        if (in.out_port != op) continue;
        send(rt, port, in, vc, op == eject);
        request[static_cast<std::size_t>(ip)] = -1;
        port.rr = (vc + 1) % vcs;
        out.rr = (ip + 1) % ports;
        break;
      }
    }
  }

  void send(Router& rt, InPort& port, InVc& in, int vc, bool ejecting) {
    Flit f = in.buf.front();
    in.buf.pop_front();
    last_move = now;
    if (port.channel >= 0) links[static_cast<std::size_t>(port.channel)].credits.push_back({now + cfg.link_latency_cycles, vc});
    if (ejecting) {
      ++delivered;
      Packet& p = packets[static_cast<std::size_t>(f.packet)];
      if (p.measured && in_window(now)) ++accepted_measured_flits;
      if (f.tail) finish(p);
    } else {
      OutPort& out = rt.out[static_cast<std::size_t>(in.out_port)];
      --out.credits[static_cast<std::size_t>(in.out_vc)];
      if (f.tail) out.owned[static_cast<std::size_t>(in.out_vc)] = 0;
      const std::int64_t arrive = now + cfg.link_latency_cycles;
      f.ready = arrive + cfg.router_latency_cycles;
      links[static_cast<std::size_t>(out.channel)].flits.push_back({arrive, f, in.out_vc});
    }
    if (f.tail) {
      in.out_port = -1;
      in.out_vc = -1;
    }
  }

  void finish(const Packet& p) {
    if (!p.measured) return;
    const std::int64_t latency = now - p.created;
    latencies.push_back(latency);
    --measured_outstanding;
    const int h = static_cast<int>(cfg.routing.path(p.src, p.dst).size()) - 1;
    if (latency < packet_zero_load_latency(cfg, h, p.flits)) ++floor_violations;
  }

  void step() {
    arrivals();
    generate();
    inject();
    for (RouterId r = 0; r < n; ++r) {
      allocate_vcs(r);
      traverse(r);
    }
    ++now;
  }

  std::int64_t in_network() const {
    std::int64_t total = 0;
    for (const Router& rt : routers)
      for (const InPort& p : rt.in)
        for (const InVc& v : p.vcs) total += static_cast<std::int64_t>(v.buf.size());
    for (const Link& l : links) total += static_cast<std::int64_t>(l.flits.size());
    return total;
  }

  RunStats run() {
    const std::int64_t window_end = static_cast<std::int64_t>(cfg.warmup_cycles) + cfg.measure_cycles;
    const std::int64_t cap = window_end + cfg.drain_cap_cycles;
    RunStats s;
    s.offered_rate = rate;
    while (now < window_end || (measured_outstanding > 0 && now < cap)) {
      step();
      if (now - last_move > kWatchdogCycles && injected > delivered) break;
    }
    const double denom = static_cast<double>(active_sources.size()) * cfg.measure_cycles;
    s.generated_rate = static_cast<double>(generated_measured_flits) / denom;
    s.accepted_rate = static_cast<double>(accepted_measured_flits) / denom;
    s.stalled = measured_outstanding > 0;
    s.packets_measured = static_cast<std::int64_t>(latencies.size());
    s.latency_floor_violations = floor_violations;
    if (!latencies.empty()) {
      std::int64_t sum = 0;
      for (std::int64_t l : latencies) sum += l;
      s.avg_packet_latency_cycles = Rational(sum, static_cast<std::int64_t>(latencies.size()));
      std::sort(latencies.begin(), latencies.end());
      std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(latencies.size())));
      s.p99_latency = Rational(latencies[std::max<std::size_t>(rank, 1) - 1]);
    }
    return s;
  }

  static constexpr std::int64_t kWatchdogCycles = 1000;

  SimConfig cfg;
  double rate;
  std::mt19937_64 rng;
  int n = 0;
  int layers = 0;
  int vcs = 0;
  double packet_prob = 0;
  double data_prob = 0;
  bool injecting = true;
  std::vector<Router> routers;
  std::vector<Link> links;
  std::vector<std::int16_t> next_port;
  std::vector<int> flow_layer;
  std::vector<Source> sources;
  std::vector<RouterId> active_sources;
  std::vector<Packet> packets;
  std::vector<int> request;
  std::vector<std::int64_t> latencies;
  std::int64_t now = 0;
  std::int64_t last_move = 0;
  std::int64_t injected = 0;
  std::int64_t delivered = 0;
  std::int64_t queued_packets = 0;
  std::int64_t partial_packets = 0;
  std::int64_t measured_outstanding = 0;
  std::int64_t generated_measured_flits = 0;
  std::int64_t accepted_measured_flits = 0;
  std::int64_t floor_violations = 0;
};

Simulator::Simulator(const SimConfig& cfg, const TrafficMatrix& traffic, double rate)
    : impl_(std::make_unique<Impl>(cfg, traffic, rate)) {}
Simulator::~Simulator() = default;
void Simulator::step() { impl_->step(); }
void Simulator::stop_injection() { impl_->injecting = false; }
std::int64_t Simulator::cycle() const { return impl_->now; }
std::int64_t Simulator::flits_injected() const { return impl_->injected; }
std::int64_t Simulator::flits_delivered() const { return impl_->delivered; }
std::int64_t Simulator::flits_in_network() const { return impl_->in_network(); }
std::int64_t Simulator::packets_at_sources() const { return impl_->queued_packets + impl_->partial_packets; }
std::int64_t Simulator::idle_cycles() const { return impl_->now - impl_->last_move; }
RunStats Simulator::run() { return impl_->run(); }

RunStats simulate(const SimConfig& cfg, const TrafficMatrix& traffic, double rate) {
  return Simulator(cfg, traffic, rate).run();
}

namespace {

RunStats simulate_seeded(const SimConfig& cfg, const TrafficMatrix& traffic, double rate) {
  SimConfig local = cfg;
  local.seed = derive_seed(cfg.seed, std::bit_cast<std::uint64_t>(rate));
  return simulate(local, traffic, rate);
}

}  // namespace

Curve sweep(const SimConfig& cfg, const TrafficMatrix& traffic, const std::vector<double>& rates, unsigned threads) {
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0)) throw InvalidArgument("sweep rates must be positive");
    if (i > 0 && rates[i] <= rates[i - 1]) throw InvalidArgument("sweep rates must be strictly increasing");
  }
  // Fail on configuration errors before any worker starts.
  if (!rates.empty()) Simulator(cfg, traffic, rates.front());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  Curve out(rates.size());
  for (std::size_t start = 0; start < rates.size(); start += threads) {
    std::vector<std::future<RunStats>> batch;
    const std::size_t end = std::min(rates.size(), start + threads);
    for (std::size_t i = start; i < end; ++i) {
      if (threads == 1) {
        out[i] = simulate_seeded(cfg, traffic, rates[i]);
      } else {
        batch.push_back(std::async(std::launch::async, simulate_seeded, std::cref(cfg), std::cref(traffic), rates[i]));
      }
    }
    for (std::size_t i = 0; i < batch.size(); ++i) out[start + i] = batch[i].get();
  }
  return out;
}

std::vector<double> linear_rates(double max_rate, int count) {
  if (count < 1 || !(max_rate > 0)) throw InvalidArgument("linear_rates needs a positive maximum and count");
  std::vector<double> rates;
  for (int i = 1; i <= count; ++i) rates.push_back(max_rate * i / count);
  return rates;
}

bool is_saturated(const RunStats& s, const Rational& zero_load) {
  return s.stalled || s.packets_measured == 0 || s.avg_packet_latency_cycles > zero_load * 3;
}

Saturation saturation_point(const Curve& curve, const Rational& zero_load) {
  Saturation out;
  out.zero_load = zero_load;
  out.points = curve;
  std::sort(out.points.begin(), out.points.end(), [](const RunStats& a, const RunStats& b) { return a.offered_rate < b.offered_rate; });
  bool found = false;
  for (const RunStats& s : out.points) {
    out.max_accepted = std::max(out.max_accepted, s.accepted_rate);
    if (found) continue;
    if (is_saturated(s, zero_load)) {
      out.rate = s.offered_rate;
      found = true;
    } else {
      out.below = s.offered_rate;
    }
  }
  if (!found) throw InvalidArgument("no swept rate saturates the network; extend sweep");
  return out;
}

Saturation saturation_point(const SimConfig& cfg, const TrafficMatrix& traffic, const Curve& curve, int bisection_steps) {
  const Rational zl = zero_load_latency(cfg, traffic);
  Saturation out = saturation_point(curve, zl);
  double lo = out.below;
  double hi = out.rate;
  for (int i = 0; i < bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    RunStats s = simulate_seeded(cfg, traffic, mid);
    out.max_accepted = std::max(out.max_accepted, s.accepted_rate);
    if (is_saturated(s, zl)) {
      hi = mid;
    } else {
      lo = mid;
    }
    out.points.push_back(s);
  }
  std::sort(out.points.begin(), out.points.end(), [](const RunStats& a, const RunStats& b) { return a.offered_rate < b.offered_rate; });
  out.rate = hi;
  out.below = lo;
  return out;
}

DrainResult drain_test(const SimConfig& cfg, const TrafficMatrix& traffic, double rate, int load_cycles) {
  Simulator sim(cfg, traffic, rate);
  for (int i = 0; i < load_cycles; ++i) sim.step();
  sim.stop_injection();
  DrainResult r;
  r.in_flight_at_stop = sim.flits_in_network();
  r.queued_at_stop = sim.packets_at_sources();
  const std::int64_t start = sim.cycle();
  while (sim.cycle() - start < cfg.drain_cap_cycles) {
    if (sim.flits_in_network() == 0 && sim.packets_at_sources() == 0) break;
    if (sim.flits_in_network() > 0 && sim.idle_cycles() > 1000) {
      r.deadlocked = true;
      break;
    }
    sim.step();
  }
  r.drain_cycles = sim.cycle() - start;
  r.remaining = sim.flits_in_network();
  r.drained = r.remaining == 0 && sim.packets_at_sources() == 0;
  return r;
}

std::string curve_csv(const Curve& curve, std::optional<double> clock_ghz) {
  const double rate_scale = clock_ghz.value_or(1.0);
  const double time_scale = clock_ghz ? 1.0 / *clock_ghz : 1.0;
  std::string out = "offered_rate,accepted_rate,avg_latency_cycles,p99,packets\n";
  for (const RunStats& s : curve) {
    out += fmt::format("{:.6f},{:.6f},{:.4f},{:.4f},{}\n", s.offered_rate * rate_scale, s.accepted_rate * rate_scale,
                       to_double(s.avg_packet_latency_cycles) * time_scale, to_double(s.p99_latency) * time_scale,
                       s.packets_measured);
  }
  return out;
}

}  // namespace netsmith
