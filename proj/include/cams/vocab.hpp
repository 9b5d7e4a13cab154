#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cams/bpe.hpp"
#include "cams/molgraph.hpp"

namespace cams {

inline uint64_t fnv1a64_bytes(const void* data, size_t len,
                              uint64_t seed = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64_bytes(s.data(), s.size(), seed);
}

enum class TokenKind { Motif, Sav, SavAltform, Special };

std::string token_kind_name(TokenKind kind);
TokenKind token_kind_from_name(const std::string& name);

struct MotifToken {
  std::string no_conn;    // plain canonical fragment SMILES
  std::string with_conn;  // attachment-aware canonical code (lookup key)
  int id = -1;
  TokenKind kind = TokenKind::Motif;
};

struct Vocabulary {
  static constexpr int kBosId = 0;
  static constexpr int kEosId = 1;
  static constexpr int kConcatId = 2;
  static constexpr int kUnkId = 3;

  std::vector<MotifToken> tokens;  // position == id
  std::unordered_map<std::string, int> lookup;  // with_conn -> id, non-special
  std::unordered_map<std::string, int> altform_ids;  // element -> id
  int prefix_k = 0;
  int scale = 0;  // non-special token count
  std::vector<std::string> elements;
  std::vector<MergeOp> merges;  // the op prefix this vocabulary was built with

  bool is_framing_special(int id) const {
    return id == kBosId || id == kEosId || id == kConcatId;
  }
};

// BPE-style merge learning over the corpus. Each round selects the pair code
// maximizing (count, code) — ties go to the lexicographically greater code —
// applies it everywhere with smaller canonical indices first, updates local
// pair statistics and resets the chosen code's count. Stops early when the
// best count drops below f_min. Disconnected molecules are skipped.
MergeList learn_merges(const std::vector<MolGraph>& corpus, int K, int64_t f_min);

struct SavcConfig {
  std::vector<std::string> elements;
  std::map<std::string, std::vector<int>> valence_table;
  std::vector<BondOrder> bond_types;

  static SavcConfig organic_subset();
};

// Single-atom vocabulary closure: per element a standalone token, an
// [X_AltForm] fallback, and one connection-aware token per (valence,
// attachment pattern) over multisets of bond orders fitting the valence.
std::vector<MotifToken> build_savc(const SavcConfig& config);

// Replays the first k merges over the corpus, keeps motifs seen at least
// min_motif_freq times, and unions them with savc and the special tokens.
// Ids: specials, then SAVC in enumeration order, then motifs by descending
// frequency with ascending code tie-break.
Vocabulary materialize_vocab(const std::vector<MolGraph>& corpus, const MergeList& merges,
                             int k, const std::vector<MotifToken>& savc,
                             int64_t min_motif_freq);

// Exact lookup, then the [X_AltForm] fallback for single-atom codes, then [UNK].
int backoff_lookup(const Vocabulary& v, const std::string& code, int core_atom_count,
                   const std::string& element);

std::string vocabulary_to_json(const Vocabulary& v);
Vocabulary vocabulary_from_json(const std::string& text);
void save_vocabulary(const Vocabulary& v, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);
uint64_t vocabulary_hash(const Vocabulary& v);

std::string merge_list_to_json(const MergeList& m);
MergeList merge_list_from_json(const std::string& text);
void save_merge_list(const MergeList& m, const std::string& path);
MergeList load_merge_list(const std::string& path);

}  // namespace cams
