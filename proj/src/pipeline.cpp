#include "cams/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace cams {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::vector<SmilesRecord> read_smiles_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::vector<SmilesRecord> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    SmilesRecord rec;
    rec.line = line_no;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      rec.smiles = line;
    } else {
      rec.smiles = line.substr(0, tab);
      rec.id = line.substr(tab + 1);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

struct MoleculeResult {
  bool ok = false;
  bool parse_error = false;
  bool multi_fragment = false;
  int atom_count = 0;
  std::vector<CamsSequence> views;
};

ShardSequence frame_sequence(const std::vector<int>& ids, bool add_frame) {
  ShardSequence seq;
  if (add_frame) seq.token_ids.push_back(Vocabulary::kBosId);
  for (int id : ids) seq.token_ids.push_back(static_cast<uint32_t>(id));
  if (add_frame) seq.token_ids.push_back(Vocabulary::kEosId);
  seq.ignore.resize(seq.token_ids.size());
  for (size_t i = 0; i < seq.token_ids.size(); ++i) {
    uint32_t id = seq.token_ids[i];
    seq.ignore[i] = id == Vocabulary::kBosId || id == Vocabulary::kEosId ||
                    id == Vocabulary::kConcatId;
  }
  return seq;
}

std::string hex64(uint64_t v) {
  std::ostringstream oss;
  oss << std::hex << v;
  return oss.str();
}

ordered_json view_stats_to_json(const ViewStats& s, bool with_compression) {
  ordered_json j;
  j["file"] = s.file;
  j["prefix_k"] = s.prefix_k;
  j["scale"] = s.scale;
  j["sequences"] = s.sequences;
  j["tokens"] = s.tokens;
  j["atom_sum"] = s.atom_sum;
  if (with_compression) j["node_sum"] = s.node_sum;
  j["unk_count"] = s.unk_count;
  return j;
}

ViewStats view_stats_from_json(const ordered_json& j) {
  ViewStats s;
  s.file = j.at("file").get<std::string>();
  s.prefix_k = j.at("prefix_k").get<int>();
  s.scale = j.at("scale").get<int>();
  s.sequences = j.at("sequences").get<int64_t>();
  s.tokens = j.at("tokens").get<int64_t>();
  s.atom_sum = j.at("atom_sum").get<int64_t>();
  s.node_sum = j.value("node_sum", int64_t{0});
  s.unk_count = j.at("unk_count").get<int64_t>();
  return s;
}

}  // namespace

EncodeManifest encode_corpus(const std::string& input_path,
                             const std::vector<Vocabulary>& vocabs,
                             const std::vector<std::string>& vocab_files,
                             const std::string& out_dir, const EncodeOptions& opts) {
  validate_vocab_chain(vocabs);
  std::vector<SmilesRecord> records = read_smiles_file(input_path);
  fs::create_directories(out_dir);

  int M = static_cast<int>(vocabs.size());
  std::vector<MoleculeResult> results(records.size());

  int workers = std::max(1, opts.workers);
  std::atomic<size_t> cursor{0};
  auto run_worker = [&]() {
    for (;;) {
      size_t i = cursor.fetch_add(1);
      if (i >= records.size()) break;
      MoleculeResult& res = results[i];
      MolGraph g;
      try {
        g = parse_smiles(records[i].smiles);
      } catch (const ParseError&) {
        res.parse_error = true;
        continue;
      }
      if (g.component_count() != 1) {
        res.multi_fragment = true;
        continue;
      }
      try {
        res.views = encode_multiscale(g, vocabs);
      } catch (const std::exception&) {
        res.parse_error = true;
        continue;
      }
      res.atom_count = g.atom_count();
      res.ok = true;
    }
  };
  if (workers == 1) {
    run_worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_worker);
    for (std::thread& t : pool) t.join();
  }

  // vocab-set hash binds every shard to the exact vocabulary chain
  uint64_t set_hash = 0xcbf29ce484222325ull;
  std::vector<uint64_t> scale_hashes;
  for (const Vocabulary& v : vocabs) {
    uint64_t h = vocabulary_hash(v);
    scale_hashes.push_back(h);
    set_hash = fnv1a64(hex64(h), set_hash);
  }

  EncodeManifest manifest;
  manifest.molecules_total = static_cast<int64_t>(records.size());
  manifest.views_per_molecule = M + 1;
  manifest.vocab_set_hash = hex64(set_hash);
  manifest.vocab_files = vocab_files;
  manifest.scales.resize(M);

  std::vector<std::unique_ptr<ShardWriter>> writers;
  for (int s = 0; s < M; ++s) {
    std::string name = "scale_" + std::to_string(s) + ".shard";
    manifest.scales[s].file = name;
    manifest.scales[s].prefix_k = vocabs[s].prefix_k;
    manifest.scales[s].scale = vocabs[s].scale;
    writers.push_back(std::make_unique<ShardWriter>((fs::path(out_dir) / name).string(),
                                                    scale_hashes[s]));
  }
  manifest.multi.file = "multi.shard";
  manifest.multi.prefix_k = vocabs.back().prefix_k;
  manifest.multi.scale = vocabs.back().scale;
  ShardWriter multi_writer((fs::path(out_dir) / manifest.multi.file).string(), set_hash);

  auto count_unk = [](const std::vector<int>& ids) {
    int64_t n = 0;
    for (int id : ids) n += id == Vocabulary::kUnkId;
    return n;
  };

  for (size_t i = 0; i < results.size(); ++i) {
    const MoleculeResult& res = results[i];
    if (res.parse_error) {
      ++manifest.parse_errors;
      continue;
    }
    if (res.multi_fragment) {
      ++manifest.multi_fragment;
      continue;
    }
    ++manifest.molecules_encoded;
    for (int s = 0; s < M; ++s) {
      const CamsSequence& view = res.views[s];
      ShardSequence seq = frame_sequence(view.token_ids, opts.frame_single_views);
      writers[s]->append(seq);
      ViewStats& st = manifest.scales[s];
      st.sequences += 1;
      st.tokens += static_cast<int64_t>(seq.token_ids.size());
      st.atom_sum += res.atom_count;
      st.node_sum += view.phase1_node_count;
      st.unk_count += count_unk(view.token_ids);
    }
    const CamsSequence& multi = res.views.back();
    ShardSequence seq = frame_sequence(multi.token_ids, false);
    multi_writer.append(seq);
    manifest.multi.sequences += 1;
    manifest.multi.tokens += static_cast<int64_t>(seq.token_ids.size());
    manifest.multi.atom_sum += res.atom_count;
    manifest.multi.unk_count += count_unk(multi.token_ids);
  }

  for (auto& w : writers) w->finish();
  multi_writer.finish();

  std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::binary);
  if (!mf) throw std::runtime_error("cannot write manifest in " + out_dir);
  mf << manifest_to_json(manifest);
  return manifest;
}

std::string manifest_to_json(const EncodeManifest& m) {
  ordered_json j;
  j["version"] = 1;
  j["molecules_total"] = m.molecules_total;
  j["molecules_encoded"] = m.molecules_encoded;
  j["failures"] = {{"parse_errors", m.parse_errors}, {"multi_fragment", m.multi_fragment}};
  j["views_per_molecule"] = m.views_per_molecule;
  j["vocab_set_hash"] = m.vocab_set_hash;
  j["vocab_files"] = m.vocab_files;
  ordered_json scales = ordered_json::array();
  for (const ViewStats& s : m.scales) scales.push_back(view_stats_to_json(s, true));
  j["scales"] = std::move(scales);
  j["multi"] = view_stats_to_json(m.multi, false);
  return j.dump(2) + "\n";
}

EncodeManifest manifest_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  EncodeManifest m;
  m.molecules_total = j.at("molecules_total").get<int64_t>();
  m.molecules_encoded = j.at("molecules_encoded").get<int64_t>();
  m.parse_errors = j.at("failures").at("parse_errors").get<int64_t>();
  m.multi_fragment = j.at("failures").at("multi_fragment").get<int64_t>();
  m.views_per_molecule = j.at("views_per_molecule").get<int>();
  m.vocab_set_hash = j.at("vocab_set_hash").get<std::string>();
  m.vocab_files = j.at("vocab_files").get<std::vector<std::string>>();
  for (const auto& s : j.at("scales")) m.scales.push_back(view_stats_from_json(s));
  m.multi = view_stats_from_json(j.at("multi"));
  return m;
}

EncodeManifest load_manifest(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest.json in " + dir);
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

CorpusReport corpus_stats(const std::string& dir) {
  EncodeManifest manifest = load_manifest(dir);
  CorpusReport report;

  auto scan = [&](const ViewStats& st, bool is_multi) {
    ShardReader reader((fs::path(dir) / st.file).string());
    int64_t tokens = 0;
    int64_t unk = 0;
    for (size_t i = 0; i < reader.size(); ++i) {
      ShardSequence seq = reader.read(i);
      tokens += static_cast<int64_t>(seq.token_ids.size());
      for (uint32_t id : seq.token_ids) unk += id == Vocabulary::kUnkId;
    }
    if (static_cast<int64_t>(reader.size()) != st.sequences || tokens != st.tokens) {
      throw std::runtime_error("shard " + st.file + " disagrees with manifest counts");
    }
    ScaleReport r;
    r.prefix_k = st.prefix_k;
    r.scale = st.scale;
    r.sequences = st.sequences;
    r.tokens = tokens;
    r.mean_tokens = st.sequences ? static_cast<double>(tokens) / st.sequences : 0.0;
    r.compression_ratio =
        (!is_multi && st.node_sum > 0)
            ? static_cast<double>(st.atom_sum) / static_cast<double>(st.node_sum)
            : 0.0;
    r.unk_count = unk;
    report.sequences += st.sequences;
    report.tokens += tokens;
    report.unk_count += unk;
    return r;
  };

  for (const ViewStats& st : manifest.scales) report.per_scale.push_back(scan(st, false));
  report.multi = scan(manifest.multi, true);
  return report;
}

std::string corpus_report_to_json(const CorpusReport& r) {
  ordered_json j;
  j["sequences"] = r.sequences;
  j["tokens"] = r.tokens;
  j["unk_count"] = r.unk_count;
  ordered_json per_scale = ordered_json::array();
  for (const ScaleReport& s : r.per_scale) {
    per_scale.push_back({{"prefix_k", s.prefix_k},
                         {"scale", s.scale},
                         {"sequences", s.sequences},
                         {"tokens", s.tokens},
                         {"mean_tokens", s.mean_tokens},
                         {"compression_ratio", s.compression_ratio},
                         {"unk_count", s.unk_count}});
  }
  j["per_scale"] = std::move(per_scale);
  j["multi"] = {{"sequences", r.multi.sequences},
                {"tokens", r.multi.tokens},
                {"mean_tokens", r.multi.mean_tokens},
                {"unk_count", r.multi.unk_count}};
  return j.dump(2) + "\n";
}

DensityReport supervision_density(double rho, int views, double t_avg) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("supervision_density: rho must be in (0, 1)");
  }
  if (views < 1) throw std::invalid_argument("supervision_density: views must be >= 1");
  if (!(t_avg > 0.0)) throw std::invalid_argument("supervision_density: t_avg must be > 0");
  DensityReport r;
  r.rho = rho;
  r.views = views;
  r.t_avg = t_avg;
  r.sd_ntp = 1.0;
  r.sd_mnp = rho;
  r.targets_ntp = static_cast<double>(views) * t_avg;
  r.targets_mnp = rho * t_avg;
  r.ratio = r.targets_ntp / r.targets_mnp;
  return r;
}

std::string density_report_to_json(const DensityReport& r) {
  ordered_json j;
  j["rho"] = r.rho;
  j["views"] = r.views;
  j["t_avg"] = r.t_avg;
  j["sd_ntp"] = r.sd_ntp;
  j["sd_mnp"] = r.sd_mnp;
  j["targets_ntp"] = r.targets_ntp;
  j["targets_mnp"] = r.targets_mnp;
  j["ratio"] = r.ratio;
  return j.dump(2) + "\n";
}

}  // namespace cams
