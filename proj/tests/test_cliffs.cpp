#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cams/cliffs.hpp"
#include "testutil.hpp"

using namespace cams;
namespace fs = std::filesystem;

namespace {

std::vector<Vocabulary> fixture_vocabs() {
  camstest::Rng rng(7100);
  std::vector<MolGraph> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(camstest::random_molecule(rng, 10));
  for (const char* s : {"CCCCO", "CCCCN", "c1ccccc1", "CC(C)O"}) {
    corpus.push_back(parse_smiles(s));
  }
  return camstest::make_scaled_vocabs(corpus, 10, {0, 5, 10});
}

ActivityRecord rec(const std::string& smiles, double y, int cliff, const std::string& split) {
  return ActivityRecord{smiles, y, cliff, split};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("cams_cliffs_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("fold change arithmetic is symmetric") {
  CHECK(fold_change(100.0, 1.0) == doctest::Approx(100.0));
  CHECK(fold_change(1.0, 100.0) == doctest::Approx(100.0));
  CHECK(fold_change(10.0, 10.0) == doctest::Approx(1.0));
}

TEST_CASE("find_cliff_pairs keeps exactly the oracle set") {
  // hand-built fixture: anchors are cliff_mol=1 in the test split
  std::vector<ActivityRecord> records = {
      rec("CCO", 100.0, 1, "test"),        // anchor A0
      rec("CCO", 1.0, 0, "test"),          // identical: sims 1.0, FC 100 -> keep
      rec("CCO", 30.0, 0, "test"),         // identical but FC ~3.3 -> reject for A0
      rec("CCCCCCCCCO", 1.0, 0, "test"),   // ring-free: empty scaffolds tie at 1.0 -> keep
      rec("OCC", 0.5, 0, "test"),          // same molecule permuted -> keep
      rec("CCO", 1.0, 0, "train"),         // wrong split -> never considered
      rec("CCO", 1.0, 1, "test"),          // second anchor
      rec("not-a-smiles", 1.0, 0, "test"), // skipped with a log line
  };
  std::vector<std::string> log;
  std::vector<CliffPair> pairs = find_cliff_pairs(records, CliffOptions{}, &log);

  // oracle set: A0 x {row1, row3, row4}; second anchor (y=1) x {row2 (FC 30)}
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0].anchor.exp_mean_nm == 100.0);
  CHECK(pairs[0].partner.exp_mean_nm == 1.0);
  CHECK(pairs[0].fold_change == doctest::Approx(100.0));
  CHECK(pairs[0].sim_full == doctest::Approx(1.0));

  // both molecules are acyclic, so the scaffold route is vacuously similar
  CHECK(pairs[1].partner.smiles == "CCCCCCCCCO");
  CHECK(pairs[1].sim_scaffold == doctest::Approx(1.0));
  CHECK(pairs[1].sim_full < 0.9);

  CHECK(pairs[2].partner.smiles == "OCC");
  CHECK(pairs[2].fold_change == doctest::Approx(200.0));

  CHECK(pairs[3].anchor.exp_mean_nm == 1.0);
  CHECK(pairs[3].partner.exp_mean_nm == 30.0);
  CHECK(pairs[3].fold_change == doctest::Approx(30.0));
  CHECK(!log.empty());
}

TEST_CASE("find_cliff_pairs respects the soft-consensus rule") {
  // scaffold-similar but string/full dissimilar molecules
  std::vector<ActivityRecord> records = {
      rec("Cc1ccccc1", 1000.0, 1, "test"),
      rec("CCCCCCc1ccccc1", 1.0, 0, "test"),
  };
  std::vector<CliffPair> pairs = find_cliff_pairs(records);
  REQUIRE(pairs.size() == 1);  // identical benzene scaffold carries the pair
  CHECK(pairs[0].sim_scaffold == doctest::Approx(1.0));
  CHECK(pairs[0].sim_full < 0.9);

  // raising tau_sim above 1.0 rejects everything regardless of FC
  CliffOptions strict;
  strict.tau_sim = 1.01;
  CHECK(find_cliff_pairs(records, strict).empty());
}

TEST_CASE("label_fragments marks nothing on identical molecules") {
  std::vector<Vocabulary> vocabs = fixture_vocabs();
  CliffPair pair;
  pair.anchor = rec("CC(C)O", 100.0, 1, "test");
  pair.partner = rec("CC(C)O", 1.0, 0, "test");
  ExplainEncoding ex_a = encode_explain(parse_smiles(pair.anchor.smiles), vocabs);
  ExplainEncoding ex_b = encode_explain(parse_smiles(pair.partner.smiles), vocabs);
  FragmentLabels labels = label_fragments(pair, ex_a, ex_b);
  CHECK(pair.diff_a.empty());
  CHECK(pair.diff_b.empty());
  CHECK(pair.shared_a.size() == 4);
  REQUIRE(pair.atom_map.has_value());
  for (uint8_t d : labels.diff_anchor) CHECK(d == 0);
  for (uint8_t d : labels.diff_partner) CHECK(d == 0);
}

TEST_CASE("label_fragments marks everything when no substructure is shared") {
  std::vector<Vocabulary> vocabs = fixture_vocabs();
  CliffPair pair;
  pair.anchor = rec("c1ccccc1", 100.0, 1, "test");
  pair.partner = rec("C1CCCCC1", 1.0, 0, "test");
  ExplainEncoding ex_a = encode_explain(parse_smiles(pair.anchor.smiles), vocabs);
  ExplainEncoding ex_b = encode_explain(parse_smiles(pair.partner.smiles), vocabs);
  FragmentLabels labels = label_fragments(pair, ex_a, ex_b);
  CHECK(pair.shared_a.empty());
  CHECK(pair.diff_a.size() == 6);
  CHECK(!pair.atom_map.has_value());
  for (size_t t = 0; t < ex_a.token_ids.size(); ++t) {
    bool special = ex_a.token_ids[t] == Vocabulary::kBosId ||
                   ex_a.token_ids[t] == Vocabulary::kEosId ||
                   ex_a.token_ids[t] == Vocabulary::kConcatId;
    CHECK(labels.diff_anchor[t] == (special ? 0 : 1));
  }
}

TEST_CASE("any-diff rule marks multi-atom motifs containing one differential atom") {
  std::vector<Vocabulary> vocabs = fixture_vocabs();
  CliffPair pair;
  pair.anchor = rec("CCCCO", 100.0, 1, "test");
  pair.partner = rec("CCCCN", 1.0, 0, "test");
  ExplainEncoding ex_a = encode_explain(parse_smiles(pair.anchor.smiles), vocabs);
  ExplainEncoding ex_b = encode_explain(parse_smiles(pair.partner.smiles), vocabs);
  FragmentLabels labels = label_fragments(pair, ex_a, ex_b);
  // the carbon chain is shared, the O / N atom differs
  CHECK(pair.diff_a.size() == 1);
  CHECK(pair.diff_b.size() == 1);
  // some region should contain a multi-atom token carrying the diff atom
  bool found_multi_diff = false;
  for (size_t t = 0; t < ex_a.token_ids.size(); ++t) {
    if (labels.diff_anchor[t] && ex_a.atom_sets[t].size() > 1) found_multi_diff = true;
    if (labels.diff_anchor[t]) {
      bool touches = false;
      for (int atom : ex_a.atom_sets[t]) {
        if (atom == pair.diff_a[0]) touches = true;
      }
      CHECK(touches);
    }
  }
  CHECK(found_multi_diff);  // coarse scales merge the chain with the diff atom
}

TEST_CASE("rel_dtap closed-form fixtures") {
  // region of six tokens: two diff summing 0.6, four shared summing 0.4
  std::vector<double> w = {0.3, 0.3, 0.1, 0.1, 0.1, 0.1};
  std::vector<uint8_t> d = {1, 1, 0, 0, 0, 0};
  DtapReport r = rel_dtap(w, d, {{0, 6}});
  REQUIRE(r.regions.size() == 1);
  CHECK(r.regions[0].mdta == doctest::Approx(0.3));
  CHECK(r.regions[0].msta == doctest::Approx(0.1));
  CHECK(r.regions[0].rel_dtap_percent == doctest::Approx(200.0).epsilon(1e-6));

  // MDTA == MSTA -> exactly zero
  std::vector<double> even = {0.25, 0.25, 0.25, 0.25};
  std::vector<uint8_t> half = {1, 0, 1, 0};
  DtapReport rz = rel_dtap(even, half, {{0, 4}});
  CHECK(rz.regions[0].rel_dtap_percent == 0.0);

  // scale invariance: multiplying all weights leaves the report unchanged
  std::vector<double> scaled = w;
  for (double& x : scaled) x *= 37.5;
  DtapReport rs = rel_dtap(scaled, d, {{0, 6}});
  CHECK(rs.regions[0].rel_dtap_percent ==
        doctest::Approx(r.regions[0].rel_dtap_percent));

  // zero-denominator conventions
  std::vector<double> all_shared_w = {0.5, 0.5};
  std::vector<uint8_t> no_diff = {0, 0};
  DtapReport rneg = rel_dtap(all_shared_w, no_diff, {{0, 2}});
  CHECK(rneg.regions[0].mdta == 0.0);
  CHECK(rneg.regions[0].rel_dtap_percent == doctest::Approx(-100.0).epsilon(1e-6));

  std::vector<uint8_t> all_diff = {1, 1};
  DtapReport rpos = rel_dtap(all_shared_w, all_diff, {{0, 2}});
  CHECK(rpos.regions[0].msta == 0.0);
  CHECK(rpos.regions[0].rel_dtap_percent ==
        doctest::Approx(0.5 / 1e-12 * 100.0).epsilon(1e-6));

  // validation
  CHECK_THROWS_AS(rel_dtap({0.5}, {1, 0}, {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(rel_dtap({-0.5, 1.0}, {1, 0}, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("aggregate_dtap averages anchors and partners separately") {
  std::vector<Vocabulary> vocabs = fixture_vocabs();
  CliffPair pair;
  pair.anchor = rec("CCCCO", 100.0, 1, "test");
  pair.partner = rec("CCCCN", 1.0, 0, "test");

  ExplainEncoding ex_a = encode_explain(parse_smiles(pair.anchor.smiles), vocabs);
  ExplainEncoding ex_b = encode_explain(parse_smiles(pair.partner.smiles), vocabs);

  // synthetic attention: uniform weights over the full sequence
  AttentionRow row_a{pair.anchor.smiles, false,
                     std::vector<double>(ex_a.token_ids.size(), 1.0)};
  AttentionRow row_b{pair.partner.smiles, false,
                     std::vector<double>(ex_b.token_ids.size(), 1.0)};

  std::vector<std::string> log;
  DtapReport agg = aggregate_dtap({pair}, vocabs, {row_a, row_b}, {}, &log);
  CHECK(agg.molecule_count == 2);
  REQUIRE(agg.regions.size() == vocabs.size());

  // hand oracle: mean of the two per-molecule reports
  CliffPair scratch = pair;
  FragmentLabels labels = label_fragments(scratch, ex_a, ex_b);
  auto one_side = [&](const ExplainEncoding& ex, const std::vector<uint8_t>& mask,
                      const AttentionRow& row) {
    std::vector<double> w;
    std::vector<uint8_t> d;
    std::vector<std::pair<int, int>> bounds;
    for (auto [begin, end] : ex.region_boundaries) {
      int rb = static_cast<int>(w.size());
      for (int t = begin; t < end; ++t) {
        w.push_back(row.weights[t]);
        d.push_back(mask[t]);
      }
      bounds.emplace_back(rb, static_cast<int>(w.size()));
    }
    return rel_dtap(w, d, bounds);
  };
  DtapReport ra = one_side(ex_a, labels.diff_anchor, row_a);
  DtapReport rb = one_side(ex_b, labels.diff_partner, row_b);
  for (size_t r = 0; r < vocabs.size(); ++r) {
    double expect =
        (ra.regions[r].rel_dtap_percent + rb.regions[r].rel_dtap_percent) / 2.0;
    CHECK(agg.regions[r].rel_dtap_percent == doctest::Approx(expect));
  }
  CHECK(agg.overall.rel_dtap_percent ==
        doctest::Approx((ra.overall.rel_dtap_percent + rb.overall.rel_dtap_percent) / 2.0));

  // fingerprint mode: a leading position that must be dropped
  std::vector<double> fp_weights = row_a.weights;
  fp_weights.insert(fp_weights.begin(), 123456.0);
  AttentionRow row_a_fp{pair.anchor.smiles, true, fp_weights};
  DtapReport agg_fp = aggregate_dtap({pair}, vocabs, {row_a_fp, row_b}, {}, &log);
  CHECK(agg_fp.molecule_count == 2);
  for (size_t r = 0; r < vocabs.size(); ++r) {
    CHECK(agg_fp.regions[r].rel_dtap_percent ==
          doctest::Approx(agg.regions[r].rel_dtap_percent));
  }

  // mismatched length is skipped with a log entry
  AttentionRow bad{pair.anchor.smiles, false, {1.0, 2.0}};
  log.clear();
  DtapReport agg_bad = aggregate_dtap({pair}, vocabs, {bad, row_b}, {}, &log);
  CHECK(agg_bad.molecule_count == 1);
  CHECK(!log.empty());

  // empty input
  DtapReport empty = aggregate_dtap({}, vocabs, {}, {}, nullptr);
  CHECK(empty.molecule_count == 0);
}

TEST_CASE("activity csv, pairs csv and attention jsonl round trips") {
  TempDir dir("io");

  {
    std::ofstream csv(dir.path / "act.csv");
    csv << "smiles,exp_mean [nM],cliff_mol,split\n";
    csv << "CCO,100.5,1,test\n";
    csv << "\"CCN\",2,0,train\n";
  }
  auto records = read_activity_csv((dir.path / "act.csv").string());
  REQUIRE(records.size() == 2);
  CHECK(records[0].smiles == "CCO");
  CHECK(records[0].exp_mean_nm == doctest::Approx(100.5));
  CHECK(records[0].cliff_mol == 1);
  CHECK(records[1].smiles == "CCN");
  CHECK(records[1].split == "train");

  {
    std::ofstream bad(dir.path / "bad.csv");
    bad << "smiles,potency\nCCO,1\n";
  }
  CHECK_THROWS_AS(read_activity_csv((dir.path / "bad.csv").string()), std::runtime_error);

  std::vector<CliffPair> pairs(1);
  pairs[0].anchor.smiles = "CCO";
  pairs[0].partner.smiles = "CC,N";  // comma forces quoting
  pairs[0].fold_change = 42.0;
  pairs[0].sim_full = 0.95;
  pairs[0].sim_scaffold = 0.5;
  pairs[0].sim_string = 0.75;
  write_pairs_csv(pairs, (dir.path / "pairs.csv").string());
  auto back = read_pairs_csv((dir.path / "pairs.csv").string());
  REQUIRE(back.size() == 1);
  CHECK(back[0].anchor.smiles == "CCO");
  CHECK(back[0].partner.smiles == "CC,N");
  CHECK(back[0].fold_change == doctest::Approx(42.0));
  CHECK(back[0].sim_string == doctest::Approx(0.75));

  {
    std::ofstream att(dir.path / "att.jsonl");
    att << R"({"molecule_id": "CCO", "mode": "without_fp", "weights": [0.1, 0.9]})" << "\n";
    att << R"({"molecule_id": "CCN", "mode": "with_fp", "weights": [0.5, 0.1, 0.4]})" << "\n";
  }
  auto rows = read_attention_jsonl((dir.path / "att.jsonl").string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].molecule_id == "CCO");
  CHECK(!rows[0].with_fp);
  CHECK(rows[1].with_fp);
  CHECK(rows[1].weights.size() == 3);

  {
    std::ofstream att(dir.path / "bad.jsonl");
    att << R"({"molecule_id": "CCO", "mode": "sideways", "weights": []})" << "\n";
  }
  CHECK_THROWS_AS(read_attention_jsonl((dir.path / "bad.jsonl").string()),
                  std::runtime_error);
}

TEST_CASE("case-study selection modes") {
  auto mk = [](const std::string& a, const std::string& b, double fc) {
    CliffPair p;
    p.anchor.smiles = a;
    p.partner.smiles = b;
    p.fold_change = fc;
    return p;
  };
  std::vector<CliffPair> pairs = {
      mk("CCCCO", "CCCCN", 50.0),            // tiny edit
      mk("c1ccccc1", "C1CCCCC1", 500.0),     // no shared substructure
      mk("CCO", "CCCCCCCCCCCCCCCCO", 20.0),  // big delta-N
  };

  auto mode_a = select_case_pairs(pairs, CaseMode::A);
  REQUIRE(mode_a.size() >= 1);
  CHECK(mode_a[0].anchor.smiles == "CCCCO");  // smallest edit first

  auto mode_b = select_case_pairs(pairs, CaseMode::B);
  REQUIRE(mode_b.size() == 3);
  CHECK(mode_b[0].fold_change == doctest::Approx(500.0));

  auto mode_c = select_case_pairs(pairs, CaseMode::C);
  CHECK(mode_c.empty());  // nothing here reaches 40 atoms
}
