#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cams/encoder.hpp"
#include "cams/simil.hpp"
#include "cams/vocab.hpp"

namespace cams {

// One row of a MoleculeACE-style per-molecule CSV.
struct ActivityRecord {
  std::string smiles;
  double exp_mean_nm = 0;  // linear nM potency
  int cliff_mol = 0;
  std::string split;
};

std::vector<ActivityRecord> read_activity_csv(const std::string& path);

constexpr double kFoldEpsilon = 1e-12;

inline double fold_change(double y_a, double y_p) {
  double hi = std::max(y_a, y_p);
  double lo = std::min(y_a, y_p);
  return hi / std::max(lo, kFoldEpsilon);
}

struct CliffPair {
  ActivityRecord anchor;
  ActivityRecord partner;
  double fold_change = 0;
  double sim_full = 0;
  double sim_scaffold = 0;
  double sim_string = 0;
  // filled by label_fragments
  std::vector<int> shared_a, diff_a, shared_b, diff_b;
  std::optional<std::vector<std::pair<int, int>>> atom_map;
};

struct CliffOptions {
  double tau_sim = 0.9;
  double tau_fold = 10.0;
  std::string anchor_split = "test";
  int fp_radius = 2;
  int fp_nbits = 2048;
};

// Anchors are cliff_mol=1 rows of anchor_split, partners cliff_mol=0 rows of
// the same split. A pair is kept iff any of full-fingerprint, scaffold or
// string similarity reaches tau_sim and the linear fold change reaches
// tau_fold. Unparseable rows are skipped with a log line.
std::vector<CliffPair> find_cliff_pairs(const std::vector<ActivityRecord>& records,
                                        const CliffOptions& opts = {},
                                        std::vector<std::string>* log = nullptr);

struct FragmentLabels {
  std::vector<uint8_t> diff_anchor;   // aligned to explain_a tokens, specials 0
  std::vector<uint8_t> diff_partner;  // aligned to explain_b tokens
};

// Shared/differential labeling: MCS under ring-aware flags defines the
// shared atom sets; their complements are differential; a token is
// differential iff its atom set touches any differential atom (any-diff).
// Empty or truncated MCS labels every atom differential.
FragmentLabels label_fragments(CliffPair& pair, const ExplainEncoding& explain_a,
                               const ExplainEncoding& explain_b,
                               const McsOptions& mcs_opts = {});

struct RegionDtap {
  double mdta = 0;
  double msta = 0;
  double rel_dtap_percent = 0;
};

struct DtapReport {
  std::vector<RegionDtap> regions;
  RegionDtap overall;
  double epsilon = 1e-12;
  int64_t molecule_count = 0;
};

// Attention-preference arithmetic over one molecule. The attention row must
// already exclude special-token (and fingerprint) positions; regions
// renormalize independently; zero denominators give zero means.
DtapReport rel_dtap(const std::vector<double>& attention_row,
                    const std::vector<uint8_t>& diff_mask,
                    const std::vector<std::pair<int, int>>& region_boundaries,
                    double epsilon = 1e-12);

struct AttentionRow {
  std::string molecule_id;  // the SMILES string as it appears in the pairs file
  bool with_fp = false;
  std::vector<double> weights;
};

std::vector<AttentionRow> read_attention_jsonl(const std::string& path);

struct DtapOptions {
  double epsilon = 1e-12;
  bool skip_empty_class = false;  // drop region terms whose class is empty
  McsOptions mcs;
};

// Per-molecule Rel-DTAP averaged arithmetically over all anchor and partner
// molecules, per region and over the full sequence. Molecules whose
// attention row is missing or mismatched in length are skipped with a log.
DtapReport aggregate_dtap(const std::vector<CliffPair>& pairs,
                          const std::vector<Vocabulary>& vocabs,
                          const std::vector<AttentionRow>& attention,
                          const DtapOptions& opts = {},
                          std::vector<std::string>* log = nullptr);

void write_pairs_csv(const std::vector<CliffPair>& pairs, const std::string& path);
std::vector<CliffPair> read_pairs_csv(const std::string& path);
std::string dtap_report_to_json(const DtapReport& r);

// Case-study presets: A = minimal edits, B = extreme fold changes,
// C = larger molecules with small atom-count deltas.
enum class CaseMode { A, B, C };
std::vector<CliffPair> select_case_pairs(const std::vector<CliffPair>& pairs, CaseMode mode,
                                         const McsOptions& mcs_opts = {});

}  // namespace cams
