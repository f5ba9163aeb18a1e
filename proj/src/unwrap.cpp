#include "insar/unwrap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "insar/phase.hpp"

namespace insar::unwrap {

int ResidueMap::count_nonzero() const {
  return static_cast<int>(std::count_if(charges.begin(), charges.end(), [](auto q) { return q != 0; }));
}

int ResidueMap::net_charge() const { return std::accumulate(charges.begin(), charges.end(), 0); }

ResidueMap compute_residues(const RealRaster& phase) {
  const GridMeta& g = phase.meta();
  ResidueMap res;
  res.meta = g;
  res.cells_w = std::max(0, g.width - 1);
  res.cells_h = std::max(0, g.height - 1);
  const std::size_t n = static_cast<std::size_t>(res.cells_w) * res.cells_h;
  res.charges.assign(n, 0);
  res.defined.assign(n, 0);
  for (int r = 0; r < res.cells_h; ++r) {
    for (int c = 0; c < res.cells_w; ++c) {
      if (phase.masked(r, c) || phase.masked(r, c + 1) || phase.masked(r + 1, c + 1) ||
          phase.masked(r + 1, c))
        continue;
      const double loop = wrap_phase(phase(r, c + 1) - phase(r, c)) +
                          wrap_phase(phase(r + 1, c + 1) - phase(r, c + 1)) +
                          wrap_phase(phase(r + 1, c) - phase(r + 1, c + 1)) +
                          wrap_phase(phase(r, c) - phase(r + 1, c));
      const std::size_t i = static_cast<std::size_t>(r) * res.cells_w + c;
      res.charges[i] = static_cast<std::int8_t>(std::lround(loop / kTwoPi));
      res.defined[i] = 1;
    }
  }
  return res;
}

FlowProblem build_flow(const ResidueMap& res, const RealRaster& coherence) {
  const GridMeta& g = res.meta;
  require_compatible(g, coherence.meta());
  FlowProblem fp;
  fp.cells_w = res.cells_w;
  fp.cells_h = res.cells_h;
  fp.num_nodes = res.cells_w * res.cells_h + 1;
  const int boundary = fp.num_nodes - 1;
  fp.supplies.assign(fp.num_nodes, 0);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < res.charges.size(); ++i) {
    fp.supplies[i] = res.charges[i];
    total += res.charges[i];
  }
  fp.supplies[boundary] = -total;

  auto cell = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= res.cells_h || c >= res.cells_w) return boundary;
    return r * res.cells_w + c;
  };
  auto cost = [&](Pixel a, Pixel b, int from, int to) -> std::int64_t {
    if (from == boundary || to == boundary) return 1;
    // Cuts through invalid pixels are free.
    if (coherence.masked(a) || coherence.masked(b)) return 1;
    const double ga = coherence.at(a), gb = coherence.at(b);
    const double gamma = std::clamp(0.5 * (ga + gb), 0.0, 1.0);
    return std::llround(kCostScale * (1.0 - gamma)) + 1;
  };

  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c + 1 < g.width; ++c) {
      Arc a;
      a.from = cell(r, c);
      a.to = cell(r - 1, c);
      if (a.from == boundary && a.to == boundary) continue;
      a.edge = EdgeKind::Horizontal;
      a.edge_row = r;
      a.edge_col = c;
      a.cost = cost({r, c}, {r, c + 1}, a.from, a.to);
      fp.arcs.push_back(a);
    }
  }
  for (int r = 0; r + 1 < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      Arc a;
      a.from = cell(r, c);
      a.to = cell(r, c - 1);
      if (a.from == boundary && a.to == boundary) continue;
      a.edge = EdgeKind::Vertical;
      a.edge_row = r;
      a.edge_col = c;
      a.cost = cost({r, c}, {r + 1, c}, a.from, a.to);
      fp.arcs.push_back(a);
    }
  }
  return fp;
}

std::vector<std::int64_t> solve_mcf(const FlowProblem& fp) {
  const int n = fp.num_nodes;
  if (static_cast<int>(fp.supplies.size()) != n)
    throw Error(Errc::UnbalancedFlow, "supply vector does not match node count");
  if (std::accumulate(fp.supplies.begin(), fp.supplies.end(), std::int64_t{0}) != 0)
    throw Error(Errc::UnbalancedFlow, "flow problem supplies do not sum to zero");
  for (const Arc& a : fp.arcs)
    if (a.cost < 0 || a.from < 0 || a.to < 0 || a.from >= n || a.to >= n)
      throw Error(Errc::InvalidArgument, "flow arc has negative cost or bad endpoint");

  // CSR adjacency: (arc index, neighbor, +1 if traversal is from -> to).
  struct Adj {
    int arc;
    int other;
    int dir;
  };
  std::vector<int> start(n + 1, 0);
  for (const Arc& a : fp.arcs) {
    ++start[a.from + 1];
    ++start[a.to + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<Adj> adj(start.back());
  {
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (int i = 0; i < static_cast<int>(fp.arcs.size()); ++i) {
      const Arc& a = fp.arcs[i];
      adj[fill[a.from]++] = {i, a.to, +1};
      adj[fill[a.to]++] = {i, a.from, -1};
    }
  }

  std::vector<std::int64_t> flow(fp.arcs.size(), 0);
  std::vector<std::int64_t> excess = fp.supplies;
  std::vector<std::int64_t> potential(n, 0);

  // Residual cost of pushing one unit along `e` from its owning node.
  auto residual_cost = [&](const Adj& e) {
    const std::int64_t x = flow[e.arc] * e.dir;
    return x >= 0 ? fp.arcs[e.arc].cost : -fp.arcs[e.arc].cost;
  };

  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> dist(n);
  std::vector<int> parent_adj(n);
  std::vector<int> origin(n);
  std::vector<std::uint8_t> settled(n);

  while (true) {
    bool any = false;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent_adj.begin(), parent_adj.end(), -1);
    std::fill(settled.begin(), settled.end(), 0);
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int v = 0; v < n; ++v) {
      if (excess[v] > 0) {
        dist[v] = 0;
        origin[v] = v;
        pq.push({0, v});
        any = true;
      }
    }
    if (!any) break;

    int sink = -1;
    std::int64_t sink_dist = 0;
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (settled[u] || d != dist[u]) continue;
      settled[u] = 1;
      if (excess[u] < 0) {
        sink = u;
        sink_dist = d;
        break;
      }
      for (int k = start[u]; k < start[u + 1]; ++k) {
        const Adj& e = adj[k];
        if (settled[e.other]) continue;
        const std::int64_t rc = residual_cost(e) + potential[u] - potential[e.other];
        const std::int64_t nd = d + rc;
        if (nd < dist[e.other]) {
          dist[e.other] = nd;
          parent_adj[e.other] = k;
          origin[e.other] = origin[u];
          pq.push({nd, e.other});
        }
      }
    }
    if (sink < 0) throw Error(Errc::UnbalancedFlow, "no augmenting path: disconnected flow network");

    for (int v = 0; v < n; ++v)
      potential[v] += settled[v] ? dist[v] : sink_dist;

    const int src = origin[sink];
    const std::int64_t amount = std::min(excess[src], -excess[sink]);
    // Walk back from sink: find the owning node of each adjacency entry.
    int v = sink;
    while (v != src) {
      const int k = parent_adj[v];
      const Adj& e = adj[k];
      flow[e.arc] += e.dir * amount;
      const Arc& a = fp.arcs[e.arc];
      v = e.dir > 0 ? a.from : a.to;
    }
    excess[src] -= amount;
    excess[sink] += amount;
  }
  return flow;
}

std::int64_t flow_cost(const FlowProblem& fp, const std::vector<std::int64_t>& flows) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < fp.arcs.size(); ++i) total += fp.arcs[i].cost * std::llabs(flows[i]);
  return total;
}

GradientCorrection gradient_corrections(const FlowProblem& fp,
                                        const std::vector<std::int64_t>& flows,
                                        const GridMeta& meta) {
  if (flows.size() != fp.arcs.size())
    throw Error(Errc::InvalidArgument, "flow vector does not match arc count");
  GradientCorrection gc;
  gc.width = meta.width;
  gc.height = meta.height;
  gc.horizontal.assign(static_cast<std::size_t>(meta.height) * std::max(0, meta.width - 1), 0);
  gc.vertical.assign(static_cast<std::size_t>(std::max(0, meta.height - 1)) * meta.width, 0);
  for (std::size_t i = 0; i < fp.arcs.size(); ++i) {
    const Arc& a = fp.arcs[i];
    if (a.edge == EdgeKind::Horizontal)
      gc.horizontal[static_cast<std::size_t>(a.edge_row) * (meta.width - 1) + a.edge_col] = -flows[i];
    else
      gc.vertical[static_cast<std::size_t>(a.edge_row) * meta.width + a.edge_col] = flows[i];
  }
  return gc;
}

namespace {

double quality(const RealRaster* coherence, std::size_t i) {
  if (!coherence || coherence->masked(i)) return 0.0;
  return (*coherence)[i];
}

// Value congruent to phase[n] closest to `estimate`.
double snap(double estimate, double wrapped) {
  return wrapped + kTwoPi * std::round((estimate - wrapped) / kTwoPi);
}

}  // namespace

RealRaster integrate_unwrapped(const RealRaster& phase, const GradientCorrection& corr,
                               const RealRaster* coherence) {
  const GridMeta& g = phase.meta();
  if (corr.width != g.width || corr.height != g.height)
    throw Error(Errc::GridMismatch, "gradient corrections do not match phase grid");
  if (coherence) require_compatible(g, coherence->meta());
  if (phase.masked_count() == phase.size())
    throw Error(Errc::NoSeed, "cannot unwrap: every pixel is masked");

  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quality(coherence, a) > quality(coherence, b);
  });

  RealRaster out(g, RasterKind::Phase, RealRaster::kNoData);
  std::vector<std::uint8_t> done(g.size(), 0);
  std::deque<Pixel> queue;
  for (std::size_t seed : order) {
    if (phase.masked(seed) || done[seed]) continue;
    done[seed] = 1;
    out.set(seed, phase[seed]);
    queue.push_back({static_cast<int>(seed / g.width), static_cast<int>(seed % g.width)});
    while (!queue.empty()) {
      const Pixel p = queue.front();
      queue.pop_front();
      const double up = out.at(p);
      auto visit = [&](Pixel q, double gradient) {
        if (!g.contains(q) || phase.masked(q) || done[g.index(q)]) return;
        done[g.index(q)] = 1;
        out.set(q.row, q.col, snap(up + gradient, phase.at(q)));
        queue.push_back(q);
      };
      const int r = p.row, c = p.col;
      const std::size_t hw = static_cast<std::size_t>(g.width - 1);
      if (c + 1 < g.width)
        visit({r, c + 1}, wrap_phase(phase(r, c + 1) - phase(r, c)) +
                              kTwoPi * corr.horizontal[r * hw + c]);
      if (c > 0)
        visit({r, c - 1}, -(wrap_phase(phase(r, c) - phase(r, c - 1)) +
                            kTwoPi * corr.horizontal[r * hw + c - 1]));
      if (r + 1 < g.height)
        visit({r + 1, c}, wrap_phase(phase(r + 1, c) - phase(r, c)) +
                              kTwoPi * corr.vertical[static_cast<std::size_t>(r) * g.width + c]);
      if (r > 0)
        visit({r - 1, c}, -(wrap_phase(phase(r, c) - phase(r - 1, c)) +
                            kTwoPi * corr.vertical[static_cast<std::size_t>(r - 1) * g.width + c]));
    }
  }
  return out;
}

RealRaster unwrap_mcf(const RealRaster& phase, const RealRaster& coherence) {
  const ResidueMap res = compute_residues(phase);
  const FlowProblem fp = build_flow(res, coherence);
  const auto flows = solve_mcf(fp);
  return integrate_unwrapped(phase, gradient_corrections(fp, flows, phase.meta()), &coherence);
}

RealRaster unwrap_quality_guided(const RealRaster& phase, const RealRaster& coherence) {
  const GridMeta& g = phase.meta();
  require_compatible(g, coherence.meta());
  if (phase.masked_count() == phase.size())
    throw Error(Errc::NoSeed, "cannot unwrap: every pixel is masked");

  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quality(&coherence, a) > quality(&coherence, b);
  });

  RealRaster out(g, RasterKind::Phase, RealRaster::kNoData);
  std::vector<std::uint8_t> done(g.size(), 0), queued(g.size(), 0);
  // (quality, -index) so equal qualities resolve in row-major order.
  using Item = std::tuple<double, std::int64_t, std::size_t>;
  std::priority_queue<Item> frontier;
  auto neighbors = [&](std::size_t i) {
    const int r = static_cast<int>(i / g.width), c = static_cast<int>(i % g.width);
    std::array<Pixel, 4> n{{{r, c + 1}, {r, c - 1}, {r + 1, c}, {r - 1, c}}};
    return n;
  };
  auto enqueue_neighbors = [&](std::size_t i) {
    for (const Pixel& q : neighbors(i)) {
      if (!g.contains(q)) continue;
      const std::size_t j = g.index(q);
      if (phase.masked(j) || done[j] || queued[j]) continue;
      queued[j] = 1;
      frontier.push({quality(&coherence, j), -static_cast<std::int64_t>(j), j});
    }
  };
  for (std::size_t seed : order) {
    if (phase.masked(seed) || done[seed]) continue;
    done[seed] = 1;
    out.set(seed, phase[seed]);
    enqueue_neighbors(seed);
    while (!frontier.empty()) {
      const std::size_t j = std::get<2>(frontier.top());
      frontier.pop();
      // Unwrap against the best already-unwrapped neighbor.
      std::size_t ref = j;
      double best = -1.0;
      for (const Pixel& q : neighbors(j)) {
        if (!g.contains(q)) continue;
        const std::size_t k = g.index(q);
        if (done[k] && quality(&coherence, k) > best) {
          best = quality(&coherence, k);
          ref = k;
        }
      }
      out.set(j, snap(out[ref] + wrap_phase(phase[j] - phase[ref]), phase[j]));
      done[j] = 1;
      enqueue_neighbors(j);
    }
  }
  return out;
}

std::vector<std::uint8_t> connected_component(const RealRaster& raster, Pixel seed) {
  const GridMeta& g = raster.meta();
  std::vector<std::uint8_t> member(g.size(), 0);
  if (!g.contains(seed) || raster.masked(seed)) return member;
  std::deque<Pixel> queue{seed};
  member[g.index(seed)] = 1;
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    const Pixel nbrs[4] = {{p.row, p.col + 1}, {p.row, p.col - 1}, {p.row + 1, p.col}, {p.row - 1, p.col}};
    for (const Pixel& q : nbrs) {
      if (!g.contains(q) || raster.masked(q) || member[g.index(q)]) continue;
      member[g.index(q)] = 1;
      queue.push_back(q);
    }
  }
  return member;
}

}  // namespace insar::unwrap
