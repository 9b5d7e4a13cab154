#pragma once

#include <string>
#include <vector>

#include "cams/bpe.hpp"
#include "cams/molgraph.hpp"
#include "cams/vocab.hpp"

namespace cams {

struct CamsSequence {
  enum class Kind { SingleScale, MultiScale };

  std::vector<int> token_ids;
  Kind kind = Kind::SingleScale;
  int scale = 0;                                      // vocabulary scale, single views
  std::vector<std::pair<int, int>> region_boundaries; // [start, end) per scale region
  int phase1_node_count = 0;                          // BPEGraph size before recovery splits
};

struct ExplainEncoding {
  std::vector<int> token_ids;
  std::vector<std::vector<int>> atom_sets;  // original atom indices; empty for specials
  std::vector<std::pair<int, int>> region_boundaries;
};

// Phase 1 of encoding: replay the first k merge ops over a canonicalized,
// rank-relabeled molecule.
BPEGraph apply_merges(const MolGraph& canonical_g, const MergeList& merges, int k);

// Throws unless the vocabularies ascend in scale and their merge lists are
// prefixes of one another (the cross-scale consistency contract).
void validate_vocab_chain(const std::vector<Vocabulary>& vocabs);

// Scaffold-rooted BFS over the motif graph. Root maximizes
// (atom_count, -node_id); neighbors expand in ascending node_id order.
std::vector<int> scaffold_bfs(const BPEGraph& bg);

// Phase 2: map ordered nodes to ids, recursively splitting unknown motifs
// along their merge trees down to SAVC back-off at single atoms. When
// atom_sets is given, records which canonical atoms each emitted id covers.
std::vector<int> resolve_tokens(const BPEGraph& bg, const std::vector<int>& order,
                                const MolGraph& canonical_g, const Vocabulary& v,
                                std::vector<std::vector<int>>* atom_sets = nullptr);

CamsSequence encode_scale(const MolGraph& g, const Vocabulary& v);

// M single-scale views plus the fine-to-coarse concatenated view
// [BOS] X1 [CONCAT] X2 ... [EOS]. Vocabularies must be ascending, built
// from prefixes of one merge list.
std::vector<CamsSequence> encode_multiscale(const MolGraph& g,
                                            const std::vector<Vocabulary>& vocabs);

// Concatenated view with per-token atom sets in original atom indices.
ExplainEncoding encode_explain(const MolGraph& g, const std::vector<Vocabulary>& vocabs);

}  // namespace cams
