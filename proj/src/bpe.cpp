#include "cams/bpe.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace cams {

std::vector<int> BPEGraph::leaf_atoms(int tree_index) const {
  std::vector<int> out;
  std::vector<int> stack{tree_index};
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    const MergeTreeNode& node = tree_arena[t];
    if (node.is_leaf()) {
      out.push_back(node.atom);
    } else {
      // right pushed first so left is visited first
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  return out;
}

BpeEngine::BpeEngine(const MolGraph& canonical_graph) : mol_(&canonical_graph) {
  int n = mol_->atom_count();
  nodes_.resize(n);
  adj_.resize(n);
  arena_.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    nodes_[i].atoms = {i};
    nodes_[i].alive = true;
    nodes_[i].tree = static_cast<int>(arena_.size());
    arena_.push_back(MergeTreeNode{i, -1, -1});
  }
  for (const Bond& b : mol_->bonds) {
    if (std::find(adj_[b.a].begin(), adj_[b.a].end(), b.b) == adj_[b.a].end()) {
      adj_[b.a].push_back(b.b);
      adj_[b.b].push_back(b.a);
      register_edge(b.a, b.b);
    }
  }
}

std::string BpeEngine::compute_edge_code(int u, int v) const {
  std::vector<int> atoms;
  atoms.reserve(nodes_[u].atoms.size() + nodes_[v].atoms.size());
  atoms.insert(atoms.end(), nodes_[u].atoms.begin(), nodes_[u].atoms.end());
  atoms.insert(atoms.end(), nodes_[v].atoms.begin(), nodes_[v].atoms.end());
  return fragment_code(*mol_, atoms, true);
}

void BpeEngine::register_edge(int u, int v) {
  std::string code = compute_edge_code(u, v);
  int64_t key = edge_key(u, v);
  code_edges_[code].push_back(key);
  edge_code_.emplace(key, std::move(code));
}

void BpeEngine::accumulate_pair_stats(std::unordered_map<std::string, int64_t>& stats) const {
  for (const auto& [key, code] : edge_code_) {
    int u = static_cast<int>(key >> 32);
    int v = static_cast<int>(key & 0xffffffff);
    if (nodes_[u].alive && nodes_[v].alive) stats[code] += 1;
  }
}

int BpeEngine::apply_op(const std::string& code, StatsDelta* delta) {
  auto bucket_it = code_edges_.find(code);
  if (bucket_it == code_edges_.end()) return 0;

  struct Match {
    int min_id;
    int max_id;
    int u;
    int v;
  };
  std::vector<Match> matches;
  for (int64_t key : bucket_it->second) {
    int u = static_cast<int>(key >> 32);
    int v = static_cast<int>(key & 0xffffffff);
    if (!nodes_[u].alive || !nodes_[v].alive) continue;
    int nu = nodes_[u].atoms.front();
    int nv = nodes_[v].atoms.front();
    matches.push_back({std::min(nu, nv), std::max(nu, nv), u, v});
  }
  if (matches.empty()) return 0;
  std::sort(matches.begin(), matches.end(), [](const Match& x, const Match& y) {
    return std::tie(x.min_id, x.max_id) < std::tie(y.min_id, y.max_id);
  });

  int merged = 0;
  for (const Match& m : matches) {
    int u = m.u;
    int v = m.v;
    if (!nodes_[u].alive || !nodes_[v].alive) continue;  // consumed by overlap
    // left operand of the merge tree is the lower-node-id side
    if (nodes_[u].atoms.front() > nodes_[v].atoms.front()) std::swap(u, v);

    if (delta) delta->removed.push_back(code);
    std::vector<int> neighbors;
    for (int side : {u, v}) {
      int other_side = side == u ? v : u;
      for (int x : adj_[side]) {
        if (x == other_side || !nodes_[x].alive) continue;
        if (delta) delta->removed.push_back(edge_code_.at(edge_key(side, x)));
        if (std::find(neighbors.begin(), neighbors.end(), x) == neighbors.end()) {
          neighbors.push_back(x);
        }
      }
    }

    int w = static_cast<int>(nodes_.size());
    Node merged_node;
    merged_node.atoms.reserve(nodes_[u].atoms.size() + nodes_[v].atoms.size());
    std::merge(nodes_[u].atoms.begin(), nodes_[u].atoms.end(), nodes_[v].atoms.begin(),
               nodes_[v].atoms.end(), std::back_inserter(merged_node.atoms));
    merged_node.tree = static_cast<int>(arena_.size());
    merged_node.alive = true;
    merged_node.code = code;  // the matched op code is the union's code
    arena_.push_back(MergeTreeNode{-1, nodes_[u].tree, nodes_[v].tree});
    nodes_[u].alive = false;
    nodes_[v].alive = false;
    nodes_.push_back(std::move(merged_node));
    adj_.emplace_back();

    for (int x : neighbors) {
      adj_[w].push_back(x);
      adj_[x].push_back(w);
      register_edge(w, x);
      if (delta) delta->added.push_back(edge_code_.at(edge_key(w, x)));
    }
    ++merged;
  }
  return merged;
}

void BpeEngine::apply_prefix(const MergeList& merges, int k) {
  if (k > static_cast<int>(merges.ops.size())) {
    throw std::out_of_range("apply_prefix: k exceeds merge list length");
  }
  if (k < next_op_) {
    throw std::logic_error("apply_prefix: prefixes must be applied in ascending order");
  }
  for (; next_op_ < k; ++next_op_) {
    apply_op(merges.ops[next_op_].code);
  }
}

int BpeEngine::live_node_count() const {
  int n = 0;
  for (const Node& node : nodes_) n += node.alive;
  return n;
}

BPEGraph BpeEngine::snapshot() {
  BPEGraph out;
  std::vector<int> live;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    if (nodes_[i].alive) live.push_back(i);
  }
  std::sort(live.begin(), live.end(), [&](int x, int y) {
    return nodes_[x].atoms.front() < nodes_[y].atoms.front();
  });
  std::vector<int> compact(nodes_.size(), -1);
  for (int pos = 0; pos < static_cast<int>(live.size()); ++pos) {
    compact[live[pos]] = pos;
    Node& n = nodes_[live[pos]];
    if (n.code.empty()) n.code = fragment_code(*mol_, n.atoms, true);
    out.nodes.push_back({n.atoms, n.tree, n.code});
  }
  for (int i : live) {
    for (int x : adj_[i]) {
      if (!nodes_[x].alive) continue;
      int a = compact[i];
      int b = compact[x];
      if (a < b) out.edges.emplace_back(a, b);
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.tree_arena = arena_;
  return out;
}

}  // namespace cams
