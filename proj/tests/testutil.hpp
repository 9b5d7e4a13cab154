#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cams/molgraph.hpp"
#include "cams/simil.hpp"
#include "cams/vocab.hpp"

namespace camstest {

using Rng = std::mt19937_64;

inline int min_valence(const std::string& elem) {
  return cams::typical_valences(elem).front();
}

// Connected random molecule over the organic subset with valence-consistent
// hydrogen fill. Optionally seeded with an aromatic six-ring.
inline cams::MolGraph random_molecule(Rng& rng, int max_atoms, bool allow_aromatic = true) {
  cams::MolGraph g;
  std::vector<int> used;  // bond-order units consumed per atom (incl. aromatic +1)

  auto coin = [&](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };
  auto randint = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto random_element = [&]() -> std::string {
    static const std::vector<std::pair<std::string, double>> weights = {
        {"C", 0.55}, {"N", 0.12}, {"O", 0.12}, {"S", 0.06}, {"F", 0.05},
        {"Cl", 0.04}, {"Br", 0.02}, {"P", 0.02}, {"B", 0.01}, {"I", 0.01}};
    double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (const auto& [e, w] : weights) {
      if (x < w) return e;
      x -= w;
    }
    return "C";
  };

  int target = randint(1, max_atoms);
  if (allow_aromatic && target >= 6 && coin(0.35)) {
    bool with_n = coin(0.4);
    for (int i = 0; i < 6; ++i) {
      cams::Atom a;
      a.element = (with_n && i == 0) ? "N" : "C";
      a.aromatic = true;
      g.atoms.push_back(a);
      used.push_back(3);  // two ring bonds + aromatic unit
    }
    for (int i = 0; i < 6; ++i) {
      g.bonds.push_back({i, (i + 1) % 6, cams::BondOrder::Aromatic});
    }
  } else {
    cams::Atom a;
    a.element = random_element();
    g.atoms.push_back(a);
    used.push_back(0);
  }

  while (g.atom_count() < target) {
    std::vector<int> free_atoms;
    for (int i = 0; i < g.atom_count(); ++i) {
      if (min_valence(g.atoms[i].element) - used[i] >= 1) free_atoms.push_back(i);
    }
    if (free_atoms.empty()) break;
    int u = free_atoms[randint(0, static_cast<int>(free_atoms.size()) - 1)];
    cams::Atom a;
    a.element = random_element();
    int cap_u = min_valence(g.atoms[u].element) - used[u];
    int cap_new = min_valence(a.element);
    int order = 1;
    if (coin(0.18) && cap_u >= 2 && cap_new >= 2) order = coin(0.25) ? 3 : 2;
    order = std::min({order, cap_u, cap_new});
    int v = g.atom_count();
    g.atoms.push_back(a);
    used.push_back(order);
    used[u] += order;
    g.bonds.push_back({u, v, static_cast<cams::BondOrder>(order)});
  }

  // occasional extra ring bonds
  for (int attempt = 0; attempt < 3 && g.atom_count() >= 4; ++attempt) {
    if (!coin(0.3)) continue;
    int u = randint(0, g.atom_count() - 1);
    int v = randint(0, g.atom_count() - 1);
    if (u == v) continue;
    if (min_valence(g.atoms[u].element) - used[u] < 1) continue;
    if (min_valence(g.atoms[v].element) - used[v] < 1) continue;
    bool bonded = false;
    for (const cams::Bond& b : g.bonds) {
      if ((b.a == u && b.b == v) || (b.a == v && b.b == u)) bonded = true;
    }
    if (bonded) continue;
    g.bonds.push_back({u, v, cams::BondOrder::Single});
    used[u] += 1;
    used[v] += 1;
  }

  for (int i = 0; i < g.atom_count(); ++i) {
    int h = cams::default_hcount(g, i);
    g.atoms[i].hcount = h < 0 ? 0 : h;
  }
  return g;
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

// perm[i] = new index of atom i; bond list order is reshuffled too.
inline cams::MolGraph permute_graph(const cams::MolGraph& g, const std::vector<int>& perm,
                                    Rng& rng) {
  cams::MolGraph out;
  out.atoms.resize(g.atoms.size());
  for (int i = 0; i < g.atom_count(); ++i) out.atoms[perm[i]] = g.atoms[i];
  out.bonds = g.bonds;
  for (cams::Bond& b : out.bonds) {
    b.a = perm[b.a];
    b.b = perm[b.b];
    if (std::uniform_int_distribution<int>(0, 1)(rng)) std::swap(b.a, b.b);
  }
  std::shuffle(out.bonds.begin(), out.bonds.end(), rng);
  return out;
}

inline bool same_atom_attrs(const cams::Atom& x, const cams::Atom& y) {
  return x.element == y.element && x.formal_charge == y.formal_charge &&
         x.hcount == y.hcount && x.aromatic == y.aromatic;
}

// Exhaustive attribute-preserving graph isomorphism for small graphs.
inline bool brute_force_isomorphic(const cams::MolGraph& a, const cams::MolGraph& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  int n = a.atom_count();
  auto order_of = [](const cams::MolGraph& g, int x, int y) -> int {
    for (const cams::Bond& bd : g.bonds) {
      if ((bd.a == x && bd.b == y) || (bd.a == y && bd.b == x)) {
        return static_cast<int>(bd.order);
      }
    }
    return 0;
  };
  std::vector<int> map_ab(n, -1);
  std::vector<bool> taken(n, false);
  std::function<bool(int)> extend = [&](int i) -> bool {
    if (i == n) return true;
    for (int j = 0; j < n; ++j) {
      if (taken[j] || !same_atom_attrs(a.atoms[i], b.atoms[j])) continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) {
        if (order_of(a, i, k) != order_of(b, j, map_ab[k])) ok = false;
      }
      if (!ok) continue;
      map_ab[i] = j;
      taken[j] = true;
      if (extend(i + 1)) return true;
      taken[j] = false;
      map_ab[i] = -1;
    }
    return false;
  };
  return extend(0);
}

// Trains merges on the corpus and materializes one vocabulary per prefix.
inline std::vector<cams::Vocabulary> make_scaled_vocabs(const std::vector<cams::MolGraph>& corpus,
                                                        int K, const std::vector<int>& prefixes,
                                                        int64_t min_motif_freq = 1) {
  cams::MergeList merges = cams::learn_merges(corpus, K, 1);
  std::vector<cams::MotifToken> savc = cams::build_savc(cams::SavcConfig::organic_subset());
  std::vector<cams::Vocabulary> vocabs;
  for (int k : prefixes) {
    vocabs.push_back(cams::materialize_vocab(corpus, merges, std::min(k, merges.k_max), savc,
                                             min_motif_freq));
  }
  return vocabs;
}

// From-scratch merge-learning oracle: partitions kept as plain atom-set
// lists, pair statistics recounted per round, greedy application with the
// same smaller-canonical-index-first rule.
struct MergeOracleState {
  cams::MolGraph canon;
  std::vector<std::vector<int>> nodes;  // sorted atom sets
};

inline std::vector<MergeOracleState> merge_oracle_init(const std::vector<cams::MolGraph>& corpus) {
  std::vector<MergeOracleState> states;
  for (const cams::MolGraph& g : corpus) {
    if (g.atoms.empty() || g.component_count() != 1) continue;
    MergeOracleState s;
    s.canon = cams::relabel_to_ranks(g, *cams::canonicalize(g).graph.canonical_ranks);
    for (int i = 0; i < s.canon.atom_count(); ++i) s.nodes.push_back({i});
    states.push_back(std::move(s));
  }
  return states;
}

inline bool merge_oracle_adjacent(const MergeOracleState& s, size_t u, size_t v) {
  for (const cams::Bond& b : s.canon.bonds) {
    bool a_in_u = std::binary_search(s.nodes[u].begin(), s.nodes[u].end(), b.a);
    bool b_in_u = std::binary_search(s.nodes[u].begin(), s.nodes[u].end(), b.b);
    bool a_in_v = std::binary_search(s.nodes[v].begin(), s.nodes[v].end(), b.a);
    bool b_in_v = std::binary_search(s.nodes[v].begin(), s.nodes[v].end(), b.b);
    if ((a_in_u && b_in_v) || (a_in_v && b_in_u)) return true;
  }
  return false;
}

inline std::map<std::string, int64_t> merge_oracle_stats(
    const std::vector<MergeOracleState>& states) {
  std::map<std::string, int64_t> stats;
  for (const MergeOracleState& s : states) {
    for (size_t u = 0; u < s.nodes.size(); ++u) {
      for (size_t v = u + 1; v < s.nodes.size(); ++v) {
        if (!merge_oracle_adjacent(s, u, v)) continue;
        std::vector<int> atoms = s.nodes[u];
        atoms.insert(atoms.end(), s.nodes[v].begin(), s.nodes[v].end());
        stats[cams::fragment_code(s.canon, atoms, true)] += 1;
      }
    }
  }
  return stats;
}

inline void merge_oracle_apply(std::vector<MergeOracleState>& states, const std::string& code) {
  for (MergeOracleState& s : states) {
    struct Match {
      int min_id, max_id;
      size_t u, v;
    };
    std::vector<Match> matches;
    for (size_t u = 0; u < s.nodes.size(); ++u) {
      for (size_t v = u + 1; v < s.nodes.size(); ++v) {
        if (!merge_oracle_adjacent(s, u, v)) continue;
        std::vector<int> atoms = s.nodes[u];
        atoms.insert(atoms.end(), s.nodes[v].begin(), s.nodes[v].end());
        if (cams::fragment_code(s.canon, atoms, true) != code) continue;
        matches.push_back({std::min(s.nodes[u].front(), s.nodes[v].front()),
                           std::max(s.nodes[u].front(), s.nodes[v].front()), u, v});
      }
    }
    std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
      return std::tie(a.min_id, a.max_id) < std::tie(b.min_id, b.max_id);
    });
    std::set<size_t> consumed;
    std::vector<std::vector<int>> merged;
    for (const Match& m : matches) {
      if (consumed.count(m.u) || consumed.count(m.v)) continue;
      consumed.insert(m.u);
      consumed.insert(m.v);
      std::vector<int> atoms;
      std::merge(s.nodes[m.u].begin(), s.nodes[m.u].end(), s.nodes[m.v].begin(),
                 s.nodes[m.v].end(), std::back_inserter(atoms));
      merged.push_back(std::move(atoms));
    }
    if (consumed.empty()) continue;
    std::vector<std::vector<int>> next;
    for (size_t i = 0; i < s.nodes.size(); ++i) {
      if (!consumed.count(i)) next.push_back(std::move(s.nodes[i]));
    }
    next.insert(next.end(), merged.begin(), merged.end());
    s.nodes = std::move(next);
  }
}

// All connected atom subsets of size <= max_size.
inline std::vector<std::vector<int>> connected_subsets(const cams::MolGraph& g, int max_size) {
  auto adj = g.adjacency();
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> frontier;
  for (int i = 0; i < g.atom_count(); ++i) {
    std::vector<int> s{i};
    if (seen.insert(s).second) frontier.push_back(s);
  }
  std::vector<std::vector<int>> all(frontier);
  for (int size = 1; size < max_size; ++size) {
    std::vector<std::vector<int>> next;
    for (const auto& s : frontier) {
      for (int u : s) {
        for (int v : adj[u]) {
          if (std::find(s.begin(), s.end(), v) != s.end()) continue;
          std::vector<int> t = s;
          t.push_back(v);
          std::sort(t.begin(), t.end());
          if (seen.insert(t).second) next.push_back(t);
        }
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return all;
}

inline std::vector<std::vector<bool>> ring_bond_flags(const cams::MolGraph& g) {
  int n = g.atom_count();
  std::vector<std::vector<bool>> ring(n, std::vector<bool>(n, false));
  for (size_t bi = 0; bi < g.bonds.size(); ++bi) {
    const cams::Bond& target = g.bonds[bi];
    std::vector<bool> seen(n, false);
    std::vector<int> stack{target.a};
    seen[target.a] = true;
    bool reachable = false;
    while (!stack.empty() && !reachable) {
      int u = stack.back();
      stack.pop_back();
      if (u == target.b) {
        reachable = true;
        break;
      }
      for (size_t bj = 0; bj < g.bonds.size(); ++bj) {
        if (bj == bi) continue;
        const cams::Bond& b = g.bonds[bj];
        int v = b.a == u ? b.b : b.b == u ? b.a : -1;
        if (v >= 0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    if (reachable) ring[target.a][target.b] = ring[target.b][target.a] = true;
  }
  return ring;
}

// Exhaustive MCS oracle: every connected subset of A, every injection into
// B, validity checked on the completed assignment under the same flags.
inline int oracle_mcs_size(const cams::MolGraph& a, const cams::MolGraph& b,
                           const cams::McsOptions& opts) {
  auto ring_a = ring_bond_flags(a);
  auto ring_b = ring_bond_flags(b);
  auto order_of = [](const cams::MolGraph& g, int i, int j) {
    for (const cams::Bond& bd : g.bonds) {
      if ((bd.a == i && bd.b == j) || (bd.a == j && bd.b == i)) {
        return static_cast<int>(bd.order);
      }
    }
    return 0;
  };

  auto valid = [&](const std::vector<int>& sa, const std::vector<int>& phi) -> bool {
    int k = static_cast<int>(sa.size());
    std::vector<std::pair<int, int>> support;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        int oa = order_of(a, sa[i], sa[j]);
        int ob = order_of(b, phi[i], phi[j]);
        if (oa == 0 || ob == 0) continue;
        if (opts.compare_order && oa != ob) continue;
        if (opts.ring_matches_ring && ring_a[sa[i]][sa[j]] != ring_b[phi[i]][phi[j]]) continue;
        support.emplace_back(i, j);
      }
    }
    if (k == 1) return a.atom_count() == 1 && b.atom_count() == 1;
    if (support.empty()) return false;
    std::vector<std::vector<int>> adj(k);
    for (auto [i, j] : support) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    std::vector<bool> seen(k, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int covered = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++covered;
          stack.push_back(v);
        }
      }
    }
    if (covered != k) return false;
    if (opts.complete_rings_only) {
      for (auto [i, j] : support) {
        if (!ring_a[sa[i]][sa[j]] && !ring_b[phi[i]][phi[j]]) continue;
        std::vector<bool> vis(k, false);
        std::vector<int> st{i};
        vis[i] = true;
        bool reach = false;
        while (!st.empty() && !reach) {
          int u = st.back();
          st.pop_back();
          if (u == j) {
            reach = true;
            break;
          }
          for (auto [x, y] : support) {
            if ((x == i && y == j) || (x == j && y == i)) continue;
            int v = x == u ? y : y == u ? x : -1;
            if (v >= 0 && !vis[v]) {
              vis[v] = true;
              st.push_back(v);
            }
          }
        }
        if (!reach) return false;
      }
    }
    return true;
  };

  int best = 0;
  for (const std::vector<int>& sa : connected_subsets(a, a.atom_count())) {
    std::vector<int> phi(sa.size(), -1);
    std::vector<bool> used(b.atom_count(), false);
    std::function<void(size_t)> assign = [&](size_t pos) {
      if (pos == sa.size()) {
        if (valid(sa, phi)) best = std::max(best, static_cast<int>(sa.size()));
        return;
      }
      for (int j = 0; j < b.atom_count(); ++j) {
        if (used[j]) continue;
        if (opts.compare_elements && a.atoms[sa[pos]].element != b.atoms[j].element) continue;
        phi[pos] = j;
        used[j] = true;
        assign(pos + 1);
        used[j] = false;
        phi[pos] = -1;
      }
    };
    assign(0);
  }
  return best;
}

// Best match under (size desc, matched_a asc, matched_b asc), for checking
// the first-substructure-match tie rule at the set level.
inline std::optional<std::pair<std::vector<int>, std::vector<int>>> oracle_mcs_best(
    const cams::MolGraph& a, const cams::MolGraph& b, const cams::McsOptions& opts) {
  // reuse the same validity semantics via a local exhaustive pass
  std::optional<std::pair<std::vector<int>, std::vector<int>>> best;
  auto better = [&](const std::vector<int>& ma, const std::vector<int>& mb) {
    if (!best) return true;
    if (ma.size() != best->first.size()) return ma.size() > best->first.size();
    return std::make_pair(ma, mb) < *best;
  };
  int best_size = oracle_mcs_size(a, b, opts);
  if (best_size == 0) return std::nullopt;

  auto ring_a = ring_bond_flags(a);
  auto ring_b = ring_bond_flags(b);
  auto order_of = [](const cams::MolGraph& g, int i, int j) {
    for (const cams::Bond& bd : g.bonds) {
      if ((bd.a == i && bd.b == j) || (bd.a == j && bd.b == i)) {
        return static_cast<int>(bd.order);
      }
    }
    return 0;
  };
  auto valid = [&](const std::vector<int>& sa, const std::vector<int>& phi) -> bool {
    int k = static_cast<int>(sa.size());
    std::vector<std::pair<int, int>> support;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        int oa = order_of(a, sa[i], sa[j]);
        int ob = order_of(b, phi[i], phi[j]);
        if (oa == 0 || ob == 0) continue;
        if (opts.compare_order && oa != ob) continue;
        if (opts.ring_matches_ring && ring_a[sa[i]][sa[j]] != ring_b[phi[i]][phi[j]]) continue;
        support.emplace_back(i, j);
      }
    }
    if (k == 1) return a.atom_count() == 1 && b.atom_count() == 1;
    if (support.empty()) return false;
    std::vector<std::vector<int>> adj(k);
    for (auto [i, j] : support) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    std::vector<bool> seen(k, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int covered = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++covered;
          stack.push_back(v);
        }
      }
    }
    if (covered != k) return false;
    if (opts.complete_rings_only) {
      for (auto [i, j] : support) {
        if (!ring_a[sa[i]][sa[j]] && !ring_b[phi[i]][phi[j]]) continue;
        std::vector<bool> vis(k, false);
        std::vector<int> st{i};
        vis[i] = true;
        bool reach = false;
        while (!st.empty() && !reach) {
          int u = st.back();
          st.pop_back();
          if (u == j) {
            reach = true;
            break;
          }
          for (auto [x, y] : support) {
            if ((x == i && y == j) || (x == j && y == i)) continue;
            int v = x == u ? y : y == u ? x : -1;
            if (v >= 0 && !vis[v]) {
              vis[v] = true;
              st.push_back(v);
            }
          }
        }
        if (!reach) return false;
      }
    }
    return true;
  };

  for (const std::vector<int>& sa : connected_subsets(a, a.atom_count())) {
    if (static_cast<int>(sa.size()) != best_size) continue;
    std::vector<int> phi(sa.size(), -1);
    std::vector<bool> used(b.atom_count(), false);
    std::function<void(size_t)> assign = [&](size_t pos) {
      if (pos == sa.size()) {
        if (valid(sa, phi) && better(sa, phi)) best = {sa, phi};
        return;
      }
      for (int j = 0; j < b.atom_count(); ++j) {
        if (used[j]) continue;
        if (opts.compare_elements && a.atoms[sa[pos]].element != b.atoms[j].element) continue;
        phi[pos] = j;
        used[j] = true;
        assign(pos + 1);
        used[j] = false;
        phi[pos] = -1;
      }
    };
    assign(0);
  }
  return best;
}

}  // namespace camstest
