#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cams/encoder.hpp"
#include "cams/shard.hpp"
#include "cams/vocab.hpp"

namespace cams {

struct EncodeOptions {
  int workers = 1;
  bool frame_single_views = true;  // wrap single-scale views in BOS/EOS
};

struct ViewStats {
  std::string file;
  int prefix_k = 0;
  int scale = 0;
  int64_t sequences = 0;
  int64_t tokens = 0;
  int64_t atom_sum = 0;
  int64_t node_sum = 0;  // Phase-1 BPEGraph nodes, before recovery splits
  int64_t unk_count = 0;
};

struct EncodeManifest {
  int64_t molecules_total = 0;
  int64_t molecules_encoded = 0;
  int64_t parse_errors = 0;
  int64_t multi_fragment = 0;
  int views_per_molecule = 0;
  std::string vocab_set_hash;
  std::vector<std::string> vocab_files;
  std::vector<ViewStats> scales;
  ViewStats multi;
};

// Encodes a one-SMILES-per-line file (optional tab-separated id) into one
// shard per single-scale view plus a multi-scale shard, with NTP label
// masks. Invalid lines are skipped and counted. Output is byte-identical
// for any worker count.
EncodeManifest encode_corpus(const std::string& input_path,
                             const std::vector<Vocabulary>& vocabs,
                             const std::vector<std::string>& vocab_files,
                             const std::string& out_dir, const EncodeOptions& opts);

std::string manifest_to_json(const EncodeManifest& m);
EncodeManifest manifest_from_json(const std::string& text);
EncodeManifest load_manifest(const std::string& dir);

struct ScaleReport {
  int prefix_k = 0;
  int scale = 0;
  int64_t sequences = 0;
  int64_t tokens = 0;
  double mean_tokens = 0;
  double compression_ratio = 0;  // mean atoms / mean Phase-1 nodes
  int64_t unk_count = 0;
};

struct CorpusReport {
  int64_t sequences = 0;
  int64_t tokens = 0;
  int64_t unk_count = 0;
  std::vector<ScaleReport> per_scale;
  ScaleReport multi;
};

// Re-reads the shards under dir (with its manifest) and cross-checks the
// recorded counts against the stored records.
CorpusReport corpus_stats(const std::string& dir);
std::string corpus_report_to_json(const CorpusReport& r);

struct DensityReport {
  double rho = 0;
  int views = 0;
  double t_avg = 0;
  double sd_ntp = 1.0;
  double sd_mnp = 0;
  double targets_ntp = 0;
  double targets_mnp = 0;
  double ratio = 0;
};

// Supervision-density arithmetic comparing NTP with masked-node prediction
// at mask ratio rho.
DensityReport supervision_density(double rho, int views, double t_avg);
std::string density_report_to_json(const DensityReport& r);

// Shared input reader: one SMILES per line, optional tab-separated id.
struct SmilesRecord {
  std::string smiles;
  std::string id;
  int64_t line = 0;
};
std::vector<SmilesRecord> read_smiles_file(const std::string& path);

}  // namespace cams
