#include "cams/molgraph.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace cams {

namespace {

int element_id(const Atom& a) {
  // Wildcards rank before every real element; the rest alphabetically.
  static const std::map<std::string, int> ids = {
      {"*", 0}, {"B", 1},  {"Br", 2}, {"C", 3},  {"Cl", 4}, {"F", 5},
      {"I", 6}, {"N", 7},  {"O", 8},  {"P", 9},  {"S", 10},
  };
  auto it = ids.find(a.element);
  return it == ids.end() ? 11 : it->second;
}

struct NeighborRef {
  int atom;
  int order_code;
};

class Canonicalizer {
 public:
  explicit Canonicalizer(const MolGraph& g) : g_(g), n_(g.atom_count()), adj_(n_) {
    for (const Bond& b : g.bonds) {
      adj_[b.a].push_back({b.b, static_cast<int>(b.order)});
      adj_[b.b].push_back({b.a, static_cast<int>(b.order)});
    }
  }

  // Returns ranks achieving the lexicographically smallest SMILES.
  std::pair<std::vector<int>, std::string> run() {
    std::vector<int> colors = initial_colors();
    refine(colors);
    best_smiles_.clear();
    search(colors);
    return {best_ranks_, best_smiles_};
  }

 private:
  std::vector<int> initial_colors() const {
    using Key = std::tuple<int, int, int, int, int, int>;
    std::vector<Key> keys(n_);
    for (int i = 0; i < n_; ++i) {
      const Atom& a = g_.atoms[i];
      keys[i] = {a.is_wildcard() ? 0 : 1, element_id(a), a.formal_charge,
                 a.hcount, a.aromatic ? 1 : 0, static_cast<int>(adj_[i].size())};
    }
    std::vector<Key> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> colors(n_);
    for (int i = 0; i < n_; ++i) {
      colors[i] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
    }
    return colors;
  }

  int color_count(const std::vector<int>& colors) const {
    return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
  }

  void refine(std::vector<int>& colors) const {
    using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
    int cells = color_count(colors);
    while (cells < n_) {
      std::vector<Sig> sigs(n_);
      for (int i = 0; i < n_; ++i) {
        std::vector<std::pair<int, int>> nb;
        nb.reserve(adj_[i].size());
        for (const NeighborRef& r : adj_[i]) nb.emplace_back(r.order_code, colors[r.atom]);
        std::sort(nb.begin(), nb.end());
        sigs[i] = {colors[i], std::move(nb)};
      }
      std::vector<Sig> sorted = sigs;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      int new_cells = static_cast<int>(sorted.size());
      if (new_cells == cells) return;
      for (int i = 0; i < n_; ++i) {
        colors[i] = static_cast<int>(
            std::lower_bound(sorted.begin(), sorted.end(), sigs[i]) - sorted.begin());
      }
      cells = new_cells;
    }
  }

  void search(std::vector<int> colors) {
    refine(colors);
    if (color_count(colors) == n_) {
      std::string s = write_smiles(g_, colors);
      if (best_smiles_.empty() || s < best_smiles_) {
        best_smiles_ = s;
        best_ranks_ = colors;
      }
      return;
    }
    // smallest unresolved cell by color value
    int target = -1;
    for (int c = 0;; ++c) {
      int count = 0;
      for (int i = 0; i < n_; ++i) count += colors[i] == c;
      if (count >= 2) {
        target = c;
        break;
      }
    }
    for (int a = 0; a < n_; ++a) {
      if (colors[a] != target) continue;
      std::vector<int> next(n_);
      for (int i = 0; i < n_; ++i) {
        next[i] = colors[i] < target ? colors[i]
                  : colors[i] == target ? (i == a ? target : target + 1)
                                        : colors[i] + 1;
      }
      search(std::move(next));
    }
  }

 public:
  // Deterministic SMILES for a graph with discrete ranks.
  static std::string write_smiles(const MolGraph& g, const std::vector<int>& ranks);

 private:
  const MolGraph& g_;
  int n_;
  std::vector<std::vector<NeighborRef>> adj_;
  std::string best_smiles_;
  std::vector<int> best_ranks_;
};

struct Writer {
  const MolGraph& g;
  const std::vector<int>& ranks;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (rank-sorted neighbor, bond idx)
  std::vector<int> visit_order;
  std::vector<std::vector<int>> tree_children;        // bond indices
  std::vector<int> parent_bond;
  std::vector<char> bond_is_ring;
  // per atom: ring bonds opening here / closing here, in emission order
  std::vector<std::vector<int>> ring_open, ring_close;
  std::vector<int> ring_digit;  // per bond
  std::string out;

  Writer(const MolGraph& graph, const std::vector<int>& r) : g(graph), ranks(r) {
    int n = g.atom_count();
    adj.resize(n);
    for (int bi = 0; bi < g.bond_count(); ++bi) {
      adj[g.bonds[bi].a].emplace_back(g.bonds[bi].b, bi);
      adj[g.bonds[bi].b].emplace_back(g.bonds[bi].a, bi);
    }
    for (auto& nb : adj) {
      std::sort(nb.begin(), nb.end(), [&](const auto& x, const auto& y) {
        return ranks[x.first] < ranks[y.first];
      });
    }
    visit_order.assign(n, -1);
    tree_children.resize(n);
    parent_bond.assign(n, -1);
    bond_is_ring.assign(g.bond_count(), 0);
    ring_open.resize(n);
    ring_close.resize(n);
    ring_digit.assign(g.bond_count(), -1);
  }

  int root() const {
    for (int i = 0; i < g.atom_count(); ++i) {
      if (ranks[i] == 0) return i;
    }
    return 0;
  }

  void classify() {
    // iterative DFS in rank order
    int clock = 0;
    std::vector<std::pair<int, size_t>> stack;
    int r = root();
    visit_order[r] = clock++;
    stack.emplace_back(r, 0);
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next >= adj[u].size()) {
        stack.pop_back();
        continue;
      }
      auto [v, bi] = adj[u][next++];
      if (bi == parent_bond[u]) continue;
      if (visit_order[v] < 0) {
        visit_order[v] = clock++;
        parent_bond[v] = bi;
        tree_children[u].push_back(bi);
        stack.emplace_back(v, 0);
      } else if (!bond_is_ring[bi]) {
        bond_is_ring[bi] = 1;
        // opens at the earlier-visited endpoint, closes at the later
        int open_at = visit_order[u] < visit_order[v] ? u : v;
        int close_at = open_at == u ? v : u;
        ring_open[open_at].push_back(bi);
        ring_close[close_at].push_back(bi);
      }
    }
    // deterministic digit order at each atom: closures by partner visit
    // order, openings by partner visit order
    for (int i = 0; i < g.atom_count(); ++i) {
      auto by_partner = [&](int x, int y) {
        const Bond& bx = g.bonds[x];
        const Bond& by = g.bonds[y];
        int px = bx.a == i ? bx.b : bx.a;
        int py = by.a == i ? by.b : by.a;
        return visit_order[px] < visit_order[py];
      };
      std::sort(ring_close[i].begin(), ring_close[i].end(), by_partner);
      std::sort(ring_open[i].begin(), ring_open[i].end(), by_partner);
    }
  }

  bool default_bond(const Bond& b) const {
    bool both_aromatic = g.atoms[b.a].aromatic && g.atoms[b.b].aromatic;
    if (b.order == BondOrder::Aromatic) return both_aromatic;
    if (b.order == BondOrder::Single) return !both_aromatic;
    return false;
  }

  void append_bond_symbol(const Bond& b) {
    if (default_bond(b)) return;
    switch (b.order) {
      case BondOrder::Single: out += '-'; break;
      case BondOrder::Double: out += '='; break;
      case BondOrder::Triple: out += '#'; break;
      case BondOrder::Aromatic: out += ':'; break;
    }
  }

  void append_atom(int i) {
    const Atom& a = g.atoms[i];
    if (a.is_wildcard() && a.formal_charge == 0) {
      out += '*';
      return;
    }
    std::string sym = a.element;
    if (a.aromatic) {
      for (char& c : sym) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    bool bracket = a.formal_charge != 0 || a.is_wildcard() ||
                   !is_supported_element(a.element) ||
                   (a.aromatic && !is_aromatic_capable(a.element)) ||
                   default_hcount(g, i) != a.hcount;
    if (!bracket) {
      out += sym;
      return;
    }
    out += '[';
    out += a.is_wildcard() ? "*" : sym;
    if (a.hcount > 0) {
      out += 'H';
      if (a.hcount > 1) out += std::to_string(a.hcount);
    }
    if (a.formal_charge != 0) {
      out += a.formal_charge > 0 ? '+' : '-';
      int mag = std::abs(a.formal_charge);
      if (mag > 1) out += std::to_string(mag);
    }
    out += ']';
  }

  void append_digit(int digit) {
    if (digit < 10) {
      out += static_cast<char>('0' + digit);
    } else {
      out += '%';
      out += std::to_string(digit);
    }
  }

  void emit() {
    classify();
    std::vector<bool> digit_in_use(100, false);
    // (atom, child cursor); emit atom content on push
    std::vector<std::pair<int, size_t>> stack;

    auto emit_atom_content = [&](int u) {
      append_atom(u);
      for (int bi : ring_close[u]) {
        append_digit(ring_digit[bi]);
        digit_in_use[ring_digit[bi]] = false;
      }
      for (int bi : ring_open[u]) {
        int d = 1;
        while (digit_in_use[d]) ++d;
        ring_digit[bi] = d;
        digit_in_use[d] = true;
        append_bond_symbol(g.bonds[bi]);
        append_digit(d);
      }
    };

    int r = root();
    emit_atom_content(r);
    stack.emplace_back(r, 0);
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next >= tree_children[u].size()) {
        stack.pop_back();
        if (!stack.empty()) {
          auto& [pu, pnext] = stack.back();
          // close paren unless this was the parent's last child
          if (pnext < tree_children[pu].size()) out += ')';
        }
        continue;
      }
      int bi = tree_children[u][next++];
      bool last = next == tree_children[u].size();
      if (!last) out += '(';
      const Bond& b = g.bonds[bi];
      int v = visit_order[b.a] > visit_order[b.b] ? b.a : b.b;
      append_bond_symbol(b);
      emit_atom_content(v);
      stack.emplace_back(v, 0);
    }
  }
};

std::string Canonicalizer::write_smiles(const MolGraph& g, const std::vector<int>& ranks) {
  Writer w(g, ranks);
  w.emit();
  return w.out;
}

}  // namespace

CanonicalResult canonicalize(const MolGraph& g) {
  if (g.atoms.empty()) {
    throw std::invalid_argument("canonicalize: empty graph");
  }
  if (g.component_count() != 1) {
    throw std::invalid_argument("canonicalize: multi-fragment unsupported");
  }
  Canonicalizer canon(g);
  auto [ranks, smiles] = canon.run();
  CanonicalResult res{g, std::move(smiles)};
  res.graph.canonical_ranks = std::move(ranks);
  return res;
}

std::string canonical_smiles(const MolGraph& g) { return canonicalize(g).smiles; }

MolGraph relabel_to_ranks(const MolGraph& g, const std::vector<int>& ranks) {
  MolGraph out;
  out.atoms.resize(g.atoms.size());
  for (int i = 0; i < g.atom_count(); ++i) out.atoms[ranks[i]] = g.atoms[i];
  out.bonds.reserve(g.bonds.size());
  for (const Bond& b : g.bonds) {
    int x = ranks[b.a];
    int y = ranks[b.b];
    out.bonds.push_back({std::min(x, y), std::max(x, y), b.order});
  }
  std::sort(out.bonds.begin(), out.bonds.end(), [](const Bond& x, const Bond& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  std::vector<int> identity(g.atom_count());
  std::iota(identity.begin(), identity.end(), 0);
  out.canonical_ranks = identity;
  return out;
}

std::string fragment_code(const MolGraph& g, const std::vector<int>& atom_subset,
                          bool with_connections) {
  if (atom_subset.empty()) {
    throw std::invalid_argument("fragment_code: empty atom subset");
  }
  std::vector<int> subset = atom_subset;
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

  std::vector<int> to_sub(g.atom_count(), -1);
  MolGraph sub;
  for (int idx : subset) {
    if (idx < 0 || idx >= g.atom_count()) {
      throw std::out_of_range("fragment_code: atom index out of range");
    }
    to_sub[idx] = sub.atom_count();
    sub.atoms.push_back(g.atoms[idx]);
  }
  int core_atoms = sub.atom_count();
  for (const Bond& b : g.bonds) {
    bool ina = to_sub[b.a] >= 0;
    bool inb = to_sub[b.b] >= 0;
    if (ina && inb) {
      sub.bonds.push_back({to_sub[b.a], to_sub[b.b], b.order});
    } else if (with_connections && (ina || inb)) {
      Atom wildcard;
      wildcard.element = "*";
      sub.atoms.push_back(wildcard);
      sub.bonds.push_back({ina ? to_sub[b.a] : to_sub[b.b], sub.atom_count() - 1, b.order});
    }
  }
  // connectivity is required of the induced core, wildcards aside
  {
    MolGraph core;
    core.atoms.assign(sub.atoms.begin(), sub.atoms.begin() + core_atoms);
    for (const Bond& b : sub.bonds) {
      if (b.a < core_atoms && b.b < core_atoms) core.bonds.push_back(b);
    }
    if (core.component_count() != 1) {
      throw std::invalid_argument("fragment_code: atom subset is not connected");
    }
  }
  return canonicalize(sub).smiles;
}

}  // namespace cams
