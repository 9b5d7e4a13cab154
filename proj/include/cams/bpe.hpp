#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cams/molgraph.hpp"

namespace cams {

struct MergeOp {
  std::string code;            // connection-aware fragment code of the merged pair
  int64_t learned_frequency = 0;
};

struct MergeList {
  std::vector<MergeOp> ops;
  int k_max = 0;               // number of learned ops
  int64_t f_min = 1;
  std::string corpus_id;
};

// Merge-history tree node stored in a flat arena. Leaves carry a canonical
// atom index; internal nodes carry the arena indices of their two operands,
// left being the lower-node-id side.
struct MergeTreeNode {
  int atom = -1;
  int left = -1;
  int right = -1;
  bool is_leaf() const { return atom >= 0; }
};

struct BPEGraphNode {
  std::vector<int> atom_indices;  // sorted canonical atom indices
  int tree = -1;                  // index into BPEGraph::tree_arena
  std::string code;               // connection-aware code of the atom set
  int node_id() const { return atom_indices.front(); }
  int atom_count() const { return static_cast<int>(atom_indices.size()); }
};

// Partitioned molecule after applying a merge prefix. Nodes are sorted by
// node_id; edges reference node positions and exist wherever an original
// bond crosses two atom sets.
struct BPEGraph {
  std::vector<BPEGraphNode> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<MergeTreeNode> tree_arena;

  std::vector<int> leaf_atoms(int tree_index) const;  // in-order leaf traversal
};

// Per-molecule merge state over a canonicalized, rank-relabeled graph.
// Tracks the connection-aware code of every live adjacent node pair so ops
// can be matched by hash lookup; codes are computed once per edge lifetime.
class BpeEngine {
 public:
  explicit BpeEngine(const MolGraph& canonical_graph);

  // Code -> occurrence count over all live adjacent pairs.
  void accumulate_pair_stats(std::unordered_map<std::string, int64_t>& stats) const;

  struct StatsDelta {
    std::vector<std::string> removed;
    std::vector<std::string> added;
  };

  // Merges every live edge whose code matches, prioritizing edges with
  // smaller canonical atom indices on overlap. Returns the merge count.
  int apply_op(const std::string& code, StatsDelta* delta = nullptr);

  // Applies ops[next_op .. k); subsequent calls continue where the last
  // stopped, so ascending prefixes of one molecule share a single pass.
  void apply_prefix(const MergeList& merges, int k);

  int live_node_count() const;
  BPEGraph snapshot();  // fills per-node code caches on the way out

 private:
  struct Node {
    std::vector<int> atoms;
    int tree = -1;
    bool alive = false;
    std::string code;  // formation code; lazily filled for unmerged atoms
  };

  int64_t edge_key(int u, int v) const {
    if (u > v) std::swap(u, v);
    return (static_cast<int64_t>(u) << 32) | static_cast<uint32_t>(v);
  }
  std::string compute_edge_code(int u, int v) const;
  void register_edge(int u, int v);

  const MolGraph* mol_;
  std::vector<Node> nodes_;
  std::vector<std::vector<int>> adj_;
  std::vector<MergeTreeNode> arena_;
  std::unordered_map<int64_t, std::string> edge_code_;
  std::unordered_map<std::string, std::vector<int64_t>> code_edges_;
  int next_op_ = 0;
};

}  // namespace cams
