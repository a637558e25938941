#include "dgmarl/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace dgmarl {

AdjacencyMatrix frontier_advance(const AdjacencyMatrix& h, const AdjacencyMatrix& a) {
  if (h.size() != a.size()) throw std::invalid_argument("frontier_advance: dimension mismatch");
  AdjacencyMatrix out(h.size());
  for (int u = 0; u < h.size(); ++u) out.set_row(u, advance_frontier_row(h.row(u), a));
  return out;
}

std::optional<int> meeting_timestep(const AdjacencySequence& adjs, int j, int i, int t0) {
  return meeting_timestep_masked(
      adjs, j, [i](int) { return uint64_t{1} << i; }, t0);
}

GraphSource GraphSource::erdos_renyi(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("GraphSource: p must lie in [0,1]");
  return {Kind::ErdosRenyi, p};
}

std::string GraphSource::str() const {
  switch (kind) {
    case Kind::Full: return "full";
    case Kind::Identity: return "identity";
    case Kind::ErdosRenyi: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "er:%.17g", p);
      return buf;
    }
    case Kind::Oracle: return "oracle";
    case Kind::Learned: return "learned";
  }
  return "identity";
}

GraphSource GraphSource::parse(const std::string& s) {
  if (s == "full" || s == "global") return full();
  if (s == "identity" || s == "local") return identity();
  if (s == "oracle") return oracle();
  if (s == "learned") return learned();
  if (s.rfind("er:", 0) == 0) return erdos_renyi(std::strtod(s.c_str() + 3, nullptr));
  throw std::invalid_argument("GraphSource: unknown source '" + s + "'");
}

AdjacencyMatrix erdos_renyi_graph(int n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("erdos_renyi_graph: p must lie in [0,1]");
  AdjacencyMatrix a(n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      if (rng.next_double() < p) a.set(u, v);
    }
  return a;
}

AdjacencyMatrix proximity_graph(const std::vector<GridPos>& positions) {
  const int n = static_cast<int>(positions.size());
  AdjacencyMatrix a(n);
  auto l1 = [&](int u, int v) {
    return std::abs(positions[u].x - positions[v].x) + std::abs(positions[u].y - positions[v].y);
  };

  // kept[u]: up to the two closest candidates of u, ties toward lower index.
  std::vector<uint64_t> kept(static_cast<size_t>(n), 0);
  for (int u = 0; u < n; ++u) {
    std::vector<int> cand;
    for (int v = 0; v < n; ++v)
      if (v != u && l1(u, v) <= 2) cand.push_back(v);
    std::stable_sort(cand.begin(), cand.end(), [&](int x, int y) { return l1(u, x) < l1(u, y); });
    if (cand.size() > 2) cand.resize(2);
    for (int v : cand) kept[u] |= uint64_t{1} << v;
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if ((kept[u] >> v & 1) && (kept[v] >> u & 1)) {
        a.set(u, v);
        a.set(v, u);
      }
  return a;
}

}  // namespace dgmarl
