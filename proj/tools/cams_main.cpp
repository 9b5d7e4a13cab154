#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cams/cliffs.hpp"
#include "cams/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cams;

namespace {

std::vector<MolGraph> parse_input_corpus(const std::string& path, int64_t* skipped) {
  std::vector<MolGraph> corpus;
  for (const SmilesRecord& rec : read_smiles_file(path)) {
    try {
      MolGraph g = parse_smiles(rec.smiles);
      if (g.component_count() != 1) {
        ++*skipped;
        continue;
      }
      corpus.push_back(std::move(g));
    } catch (const std::exception&) {
      ++*skipped;
    }
  }
  return corpus;
}

std::vector<std::string> find_vocab_files(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("vocab_k", 0) == 0 && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("no vocab_k*.json files found in " + dir);
  }
  return files;
}

std::vector<Vocabulary> load_vocab_chain(const std::vector<std::string>& files) {
  std::vector<Vocabulary> vocabs;
  for (const std::string& f : files) vocabs.push_back(load_vocabulary(f));
  std::sort(vocabs.begin(), vocabs.end(),
            [](const Vocabulary& a, const Vocabulary& b) { return a.prefix_k < b.prefix_k; });
  return vocabs;
}

int run_train_vocab(const std::string& input, int k, int64_t fmin,
                    std::vector<int> prefixes, const std::string& out_dir,
                    int64_t min_motif_freq) {
  for (size_t i = 1; i < prefixes.size(); ++i) {
    if (prefixes[i] <= prefixes[i - 1]) {
      std::cerr << "error: prefixes must be strictly ascending\n";
      return 1;
    }
  }
  int64_t skipped = 0;
  std::vector<MolGraph> corpus = parse_input_corpus(input, &skipped);
  std::cerr << "corpus: " << corpus.size() << " molecules";
  if (skipped > 0) std::cerr << " (" << skipped << " skipped)";
  std::cerr << "\n";

  MergeList merges = learn_merges(corpus, k, fmin);
  std::cerr << "learned " << merges.k_max << " merge ops (requested " << k << ")\n";
  if (!prefixes.empty() && prefixes.back() > merges.k_max) {
    std::cerr << "error: prefix " << prefixes.back() << " exceeds learned merge count "
              << merges.k_max << "\n";
    return 1;
  }

  fs::create_directories(out_dir);
  save_merge_list(merges, (fs::path(out_dir) / "merges.json").string());
  std::vector<MotifToken> savc = build_savc(SavcConfig::organic_subset());
  for (int prefix : prefixes) {
    Vocabulary v = materialize_vocab(corpus, merges, prefix, savc, min_motif_freq);
    std::string name = "vocab_k" + std::to_string(prefix) + ".json";
    save_vocabulary(v, (fs::path(out_dir) / name).string());
    std::cerr << name << ": scale " << v.scale << "\n";
  }
  return 0;
}

int run_encode(const std::string& input, const std::string& vocab_dir,
               const std::string& out_dir, int workers, bool frame_single) {
  std::vector<std::string> files = find_vocab_files(vocab_dir);
  std::vector<Vocabulary> vocabs = load_vocab_chain(files);
  std::vector<std::string> names;
  for (const std::string& f : files) names.push_back(fs::path(f).filename().string());

  EncodeOptions opts;
  opts.workers = workers;
  opts.frame_single_views = frame_single;
  EncodeManifest manifest = encode_corpus(input, vocabs, names, out_dir, opts);
  std::cerr << "encoded " << manifest.molecules_encoded << "/" << manifest.molecules_total
            << " molecules (" << manifest.parse_errors << " parse errors, "
            << manifest.multi_fragment << " multi-fragment)\n";
  int64_t sequences = manifest.multi.sequences;
  for (const ViewStats& s : manifest.scales) sequences += s.sequences;
  std::cerr << sequences << " sequences in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CamS molecular tokenization toolkit"};
  app.require_subcommand(1);

  // train-vocab
  std::string tv_input, tv_out;
  int tv_k = 685;
  int64_t tv_fmin = 1;
  int64_t tv_min_motif_freq = 1;
  std::vector<int> tv_prefixes;
  CLI::App* train = app.add_subcommand("train-vocab", "learn merges and materialize vocabularies");
  train->add_option("--input", tv_input, "SMILES file, one per line")->required();
  train->add_option("--k", tv_k, "max merge operations");
  train->add_option("--fmin", tv_fmin, "min pair frequency to keep merging");
  train->add_option("--prefixes", tv_prefixes, "ascending merge-prefix lengths")
      ->required()
      ->delimiter(',');
  train->add_option("--out", tv_out, "output directory")->required();
  train->add_option("--min-motif-freq", tv_min_motif_freq, "min motif frequency kept");

  // encode
  std::string en_input, en_vocabs, en_out;
  int en_workers = 1;
  bool en_no_frame = false;
  CLI::App* encode = app.add_subcommand("encode", "encode a corpus into token shards");
  encode->add_option("--input", en_input, "SMILES file, one per line")->required();
  encode->add_option("--vocabs", en_vocabs, "directory with vocab_k*.json")->required();
  encode->add_option("--out", en_out, "output directory")->required();
  encode->add_option("--workers", en_workers, "worker threads");
  encode->add_flag("--no-frame-single", en_no_frame, "do not wrap single-scale views in BOS/EOS");

  // stats
  std::string st_dir, st_out;
  CLI::App* stats = app.add_subcommand("stats", "corpus statistics from shards");
  stats->add_option("--shards", st_dir, "shard directory")->required();
  stats->add_option("--out", st_out, "write the report here instead of stdout");

  // density
  double de_rho = 0.15;
  int de_views = 5;
  double de_tavg = 1.0;
  CLI::App* density = app.add_subcommand("density", "supervision-density arithmetic");
  density->add_option("--rho", de_rho, "mask ratio in (0,1)")->required();
  density->add_option("--views", de_views, "training views per molecule")->required();
  density->add_option("--tavg", de_tavg, "average sequence length")->required();

  // find-pairs
  std::string fp_input, fp_out, fp_split = "test", fp_mode;
  double fp_tau_sim = 0.9, fp_tau_fold = 10.0;
  CLI::App* find_pairs = app.add_subcommand("find-pairs", "activity-cliff pair construction");
  find_pairs->add_option("--input", fp_input, "MoleculeACE-style csv")->required();
  find_pairs->add_option("--out", fp_out, "pairs csv")->required();
  find_pairs->add_option("--tau-sim", fp_tau_sim, "similarity threshold");
  find_pairs->add_option("--tau-fold", fp_tau_fold, "fold-change threshold");
  find_pairs->add_option("--anchor-split", fp_split, "split holding the anchors");
  find_pairs->add_option("--mode", fp_mode, "case-study preset: A, B or C")
      ->check(CLI::IsMember({"A", "B", "C"}));

  // dtap
  std::string dt_pairs, dt_vocabs, dt_attention, dt_out;
  bool dt_skip_empty = false;
  CLI::App* dtap = app.add_subcommand("dtap", "Rel-DTAP attention analysis");
  dtap->add_option("--pairs", dt_pairs, "pairs csv from find-pairs")->required();
  dtap->add_option("--vocabs", dt_vocabs, "directory with vocab_k*.json")->required();
  dtap->add_option("--attention", dt_attention, "attention jsonl")->required();
  dtap->add_option("--out", dt_out, "write the report here instead of stdout");
  dtap->add_flag("--skip-empty-class", dt_skip_empty,
                 "drop region terms with no diff or no shared tokens");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return run_train_vocab(tv_input, tv_k, tv_fmin, tv_prefixes, tv_out, tv_min_motif_freq);
    }
    if (encode->parsed()) {
      return run_encode(en_input, en_vocabs, en_out, en_workers, !en_no_frame);
    }
    if (stats->parsed()) {
      std::string json = corpus_report_to_json(corpus_stats(st_dir));
      if (st_out.empty()) {
        std::cout << json;
      } else {
        std::ofstream(st_out, std::ios::binary) << json;
      }
      return 0;
    }
    if (density->parsed()) {
      std::cout << density_report_to_json(supervision_density(de_rho, de_views, de_tavg));
      return 0;
    }
    if (find_pairs->parsed()) {
      CliffOptions opts;
      opts.tau_sim = fp_tau_sim;
      opts.tau_fold = fp_tau_fold;
      opts.anchor_split = fp_split;
      std::vector<std::string> log;
      std::vector<CliffPair> pairs = find_cliff_pairs(read_activity_csv(fp_input), opts, &log);
      for (const std::string& line : log) std::cerr << line << "\n";
      if (!fp_mode.empty()) {
        CaseMode mode = fp_mode == "A"   ? CaseMode::A
                        : fp_mode == "B" ? CaseMode::B
                                         : CaseMode::C;
        pairs = select_case_pairs(pairs, mode);
      }
      write_pairs_csv(pairs, fp_out);
      std::cerr << pairs.size() << " pairs written to " << fp_out << "\n";
      return 0;
    }
    if (dtap->parsed()) {
      std::vector<Vocabulary> vocabs = load_vocab_chain(find_vocab_files(dt_vocabs));
      DtapOptions opts;
      opts.skip_empty_class = dt_skip_empty;
      std::vector<std::string> log;
      DtapReport report = aggregate_dtap(read_pairs_csv(dt_pairs), vocabs,
                                         read_attention_jsonl(dt_attention), opts, &log);
      for (const std::string& line : log) std::cerr << line << "\n";
      std::string json = dtap_report_to_json(report);
      if (dt_out.empty()) {
        std::cout << json;
      } else {
        std::ofstream(dt_out, std::ios::binary) << json;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
