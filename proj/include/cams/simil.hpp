#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cams/molgraph.hpp"

namespace cams {

struct FingerprintBits {
  std::vector<uint64_t> words;
  int nbits = 0;
  int radius = 0;

  void set(int bit) { words[bit >> 6] |= uint64_t{1} << (bit & 63); }
  bool test(int bit) const { return (words[bit >> 6] >> (bit & 63)) & 1; }
  int popcount() const;
};

// Hashed circular environments: for every atom and every r <= radius, the
// canonical code of the induced r-ball is hashed into nbits buckets.
// Permutation-invariant by construction. nbits must be a power of two.
FingerprintBits circular_fingerprint(const MolGraph& g, int radius = 2, int nbits = 2048);

// |a & b| / |a | b|, taken as 1.0 when both fingerprints are empty.
double tanimoto(const FingerprintBits& a, const FingerprintBits& b);

// Rings plus linkers: terminal atoms are pruned iteratively until a fixed
// point; hydrogens on exposed atoms are refilled. Acyclic input gives an
// empty graph.
MolGraph murcko_scaffold(const MolGraph& g);

// 1 - edit_distance / max(len), 1.0 for two empty strings.
double levenshtein_similarity(const std::string& s1, const std::string& s2);

struct McsOptions {
  bool complete_rings_only = true;
  bool ring_matches_ring = true;
  bool compare_elements = true;
  bool compare_order = true;
  int64_t node_budget = 1'000'000;
  double time_budget_seconds = 5.0;
};

struct McsResult {
  std::vector<int> matched_a;  // ordered correspondence, ascending in matched_a
  std::vector<int> matched_b;
  std::string smarts_like_code;
  bool truncated = false;

  int size() const { return static_cast<int>(matched_a.size()); }
};

// Largest connected common subgraph under element/bond-order/ring rules,
// branch-and-bound with exploration budgets. Matches need at least one
// common bond unless both molecules are single atoms. Among maximum
// matches the lexicographically smallest (matched_a, matched_b) tuple wins.
// Returns nullopt when nothing qualifies.
std::optional<McsResult> mcs(const MolGraph& a, const MolGraph& b,
                             const McsOptions& opts = {});

}  // namespace cams
