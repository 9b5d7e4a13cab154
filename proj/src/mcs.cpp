#include <algorithm>
#include <chrono>
#include <functional>

#include "cams/simil.hpp"

namespace cams {

namespace {

using Clock = std::chrono::steady_clock;

struct MolView {
  const MolGraph* g;
  int n;
  std::vector<std::vector<int>> order;     // order[i][j] = bond order code or 0
  std::vector<std::vector<bool>> ring;     // ring[i][j] = bond lies on a cycle
  std::vector<std::vector<int>> adj;

  explicit MolView(const MolGraph& mol) : g(&mol), n(mol.atom_count()) {
    order.assign(n, std::vector<int>(n, 0));
    ring.assign(n, std::vector<bool>(n, false));
    adj = mol.adjacency();
    for (const Bond& b : mol.bonds) {
      order[b.a][b.b] = order[b.b][b.a] = static_cast<int>(b.order);
    }
    for (size_t bi = 0; bi < mol.bonds.size(); ++bi) {
      const Bond& b = mol.bonds[bi];
      if (still_connected_without(mol, static_cast<int>(bi))) {
        ring[b.a][b.b] = ring[b.b][b.a] = true;
      }
    }
  }

  static bool still_connected_without(const MolGraph& mol, int skip_bond) {
    const Bond& target = mol.bonds[skip_bond];
    std::vector<bool> seen(mol.atom_count(), false);
    std::vector<int> stack{target.a};
    seen[target.a] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (u == target.b) return true;
      for (size_t bi = 0; bi < mol.bonds.size(); ++bi) {
        if (static_cast<int>(bi) == skip_bond) continue;
        const Bond& b = mol.bonds[bi];
        int v = -1;
        if (b.a == u) v = b.b;
        if (b.b == u) v = b.a;
        if (v >= 0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    return false;
  }
};

struct Searcher {
  const MolView& a;
  const MolView& b;
  const McsOptions& opts;
  Clock::time_point deadline;
  int64_t nodes_left;
  bool truncated = false;

  std::vector<std::pair<int, int>> best;  // sorted by first
  std::vector<int> map_a;                 // a atom -> b atom or -1
  std::vector<int> map_b;
  std::vector<std::pair<int, int>> current;

  Searcher(const MolView& va, const MolView& vb, const McsOptions& o)
      : a(va), b(vb), opts(o) {
    deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(o.time_budget_seconds));
    nodes_left = o.node_budget;
    map_a.assign(a.n, -1);
    map_b.assign(b.n, -1);
  }

  bool atom_compatible(int i, int j) const {
    if (opts.compare_elements && a.g->atoms[i].element != b.g->atoms[j].element) return false;
    return true;
  }

  bool bond_compatible(int ai, int aj, int bi, int bj) const {
    int oa = a.order[ai][aj];
    int ob = b.order[bi][bj];
    if (oa == 0 || ob == 0) return false;
    if (opts.compare_order && oa != ob) return false;
    if (opts.ring_matches_ring && a.ring[ai][aj] != b.ring[bi][bj]) return false;
    return true;
  }

  // Every matched parent ring bond must lie on a cycle of the match itself.
  bool complete_rings_ok() const {
    if (!opts.complete_rings_only) return true;
    int m = static_cast<int>(current.size());
    struct SupportEdge {
      int u, v;
      bool ring_a, ring_b;
    };
    std::vector<SupportEdge> edges;
    std::vector<std::vector<int>> adj(m);
    for (int u = 0; u < m; ++u) {
      for (int v = u + 1; v < m; ++v) {
        auto [au, bu] = current[u];
        auto [av, bv] = current[v];
        if (!bond_compatible(au, av, bu, bv)) continue;
        adj[u].push_back(v);
        adj[v].push_back(u);
        edges.push_back({u, v, a.ring[au][av], b.ring[bu][bv]});
      }
    }
    bool any_ring = false;
    for (const SupportEdge& e : edges) any_ring |= e.ring_a || e.ring_b;
    if (!any_ring) return true;

    // bridge finding on the support graph
    std::vector<int> disc(m, -1), low(m, 0), parent(m, -1);
    int timer = 0;
    std::vector<std::pair<int, int>> bridges;
    std::function<void(int)> dfs = [&](int u) {
      disc[u] = low[u] = timer++;
      for (int v : adj[u]) {
        if (disc[v] < 0) {
          parent[v] = u;
          dfs(v);
          low[u] = std::min(low[u], low[v]);
          if (low[v] > disc[u]) bridges.emplace_back(std::min(u, v), std::max(u, v));
        } else if (v != parent[u]) {
          low[u] = std::min(low[u], disc[v]);
        }
      }
    };
    for (int u = 0; u < m; ++u) {
      if (disc[u] < 0) dfs(u);
    }
    auto is_bridge = [&](int u, int v) {
      auto key = std::make_pair(std::min(u, v), std::max(u, v));
      return std::find(bridges.begin(), bridges.end(), key) != bridges.end();
    };
    for (const SupportEdge& e : edges) {
      if ((e.ring_a || e.ring_b) && is_bridge(e.u, e.v)) return false;
    }
    return true;
  }

  bool eligible() const {
    if (current.size() == 1) {
      return a.n == 1 && b.n == 1;  // one-atom molecules may match on a lone atom
    }
    return current.size() >= 2 && complete_rings_ok();
  }

  void consider_current() {
    if (!eligible()) return;
    if (current.size() < best.size()) return;
    std::vector<std::pair<int, int>> sorted = current;
    std::sort(sorted.begin(), sorted.end());
    if (current.size() > best.size()) {
      best = std::move(sorted);
      return;
    }
    // equal size: smallest (matched_a, matched_b) tuple wins
    auto tuple_of = [](const std::vector<std::pair<int, int>>& v) {
      std::pair<std::vector<int>, std::vector<int>> t;
      for (auto [x, y] : v) {
        t.first.push_back(x);
        t.second.push_back(y);
      }
      return t;
    };
    if (tuple_of(sorted) < tuple_of(best)) best = std::move(sorted);
  }

  std::vector<std::pair<int, int>> candidates(const std::vector<bool>& banned) const {
    std::vector<std::pair<int, int>> out;
    for (auto [ai, bi] : current) {
      for (int an : a.adj[ai]) {
        if (map_a[an] >= 0) continue;
        for (int bn : b.adj[bi]) {
          if (map_b[bn] >= 0) continue;
          if (banned[an * b.n + bn]) continue;
          if (!atom_compatible(an, bn)) continue;
          if (!bond_compatible(ai, an, bi, bn)) continue;
          out.emplace_back(an, bn);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void grow(std::vector<bool>& banned) {
    if (truncated) return;
    if (--nodes_left <= 0 || Clock::now() >= deadline) {
      truncated = true;
      return;
    }
    consider_current();
    int remaining = std::min(a.n, b.n) - static_cast<int>(current.size());
    if (static_cast<int>(current.size()) + remaining < static_cast<int>(best.size())) return;

    std::vector<std::pair<int, int>> cands = candidates(banned);
    std::vector<int> newly_banned;
    for (auto [an, bn] : cands) {
      current.emplace_back(an, bn);
      map_a[an] = bn;
      map_b[bn] = an;
      grow(banned);
      map_a[an] = -1;
      map_b[bn] = -1;
      current.pop_back();
      if (truncated) break;
      banned[an * b.n + bn] = true;
      newly_banned.push_back(an * b.n + bn);
    }
    for (int key : newly_banned) banned[key] = false;
  }

  void run() {
    std::vector<bool> banned(static_cast<size_t>(a.n) * b.n, false);
    for (int ai = 0; ai < a.n && !truncated; ++ai) {
      for (int bi = 0; bi < b.n && !truncated; ++bi) {
        if (!atom_compatible(ai, bi)) continue;
        current.emplace_back(ai, bi);
        map_a[ai] = bi;
        map_b[bi] = ai;
        grow(banned);
        map_a[ai] = -1;
        map_b[bi] = -1;
        current.pop_back();
        banned[ai * b.n + bi] = true;
      }
    }
  }
};

}  // namespace

std::optional<McsResult> mcs(const MolGraph& a, const MolGraph& b, const McsOptions& opts) {
  if (a.atoms.empty() || b.atoms.empty()) return std::nullopt;
  MolView va(a);
  MolView vb(b);
  Searcher searcher(va, vb, opts);
  searcher.run();
  if (searcher.best.empty()) return std::nullopt;

  McsResult res;
  res.truncated = searcher.truncated;
  for (auto [ai, bi] : searcher.best) {
    res.matched_a.push_back(ai);
    res.matched_b.push_back(bi);
  }

  // descriptive code: the matched subgraph of A restricted to support bonds
  MolGraph common;
  std::vector<int> remap(a.atom_count(), -1);
  for (size_t i = 0; i < res.matched_a.size(); ++i) {
    remap[res.matched_a[i]] = static_cast<int>(i);
    common.atoms.push_back(a.atoms[res.matched_a[i]]);
  }
  for (size_t i = 0; i < res.matched_a.size(); ++i) {
    for (size_t j = i + 1; j < res.matched_a.size(); ++j) {
      int ai = res.matched_a[i], aj = res.matched_a[j];
      int bi = res.matched_b[i], bj = res.matched_b[j];
      if (searcher.bond_compatible(ai, aj, bi, bj)) {
        common.bonds.push_back({remap[ai], remap[aj],
                                static_cast<BondOrder>(va.order[ai][aj])});
      }
    }
  }
  res.smarts_like_code = canonical_smiles(common);
  return res;
}

}  // namespace cams
