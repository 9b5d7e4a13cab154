#include "cams/cliffs.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cams {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ActivityRecord> read_activity_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open activity csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty activity csv: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv_line(line);
  int col_smiles = -1, col_y = -1, col_cliff = -1, col_split = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    std::string name = trim(header[i]);
    if (name == "smiles") col_smiles = i;
    else if (name == "exp_mean [nM]") col_y = i;
    else if (name == "cliff_mol") col_cliff = i;
    else if (name == "split") col_split = i;
  }
  if (col_smiles < 0 || col_y < 0 || col_cliff < 0 || col_split < 0) {
    throw std::runtime_error(
        "activity csv must have columns: smiles, exp_mean [nM], cliff_mol, split");
  }

  std::vector<ActivityRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    int needed = std::max({col_smiles, col_y, col_cliff, col_split});
    if (static_cast<int>(fields.size()) <= needed) {
      throw std::runtime_error("activity csv row has too few columns: " + line);
    }
    ActivityRecord rec;
    rec.smiles = trim(fields[col_smiles]);
    rec.exp_mean_nm = std::stod(trim(fields[col_y]));
    rec.cliff_mol = std::stoi(trim(fields[col_cliff]));
    rec.split = trim(fields[col_split]);
    if (rec.exp_mean_nm <= 0) {
      throw std::runtime_error("activity csv potency must be positive: " + line);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CliffPair> find_cliff_pairs(const std::vector<ActivityRecord>& records,
                                        const CliffOptions& opts,
                                        std::vector<std::string>* log) {
  struct Parsed {
    const ActivityRecord* rec;
    std::string canonical;
    FingerprintBits fp;
    FingerprintBits scaffold_fp;
  };

  auto note = [&](const std::string& msg) {
    if (log) log->push_back(msg);
  };

  std::vector<Parsed> anchors;
  std::vector<Parsed> partners;
  for (const ActivityRecord& rec : records) {
    if (rec.split != opts.anchor_split) continue;
    Parsed p;
    p.rec = &rec;
    try {
      MolGraph g = parse_smiles(rec.smiles);
      if (g.component_count() != 1) {
        note("skipped multi-fragment candidate: " + rec.smiles);
        continue;
      }
      p.canonical = canonical_smiles(g);
      p.fp = circular_fingerprint(g, opts.fp_radius, opts.fp_nbits);
      MolGraph scaffold = murcko_scaffold(g);
      if (scaffold.atoms.empty()) {
        FingerprintBits empty;
        empty.nbits = opts.fp_nbits;
        empty.radius = opts.fp_radius;
        empty.words.assign(static_cast<size_t>(std::max(opts.fp_nbits, 64)) / 64, 0);
        p.scaffold_fp = empty;
      } else {
        p.scaffold_fp = circular_fingerprint(scaffold, opts.fp_radius, opts.fp_nbits);
      }
    } catch (const std::exception& e) {
      note("skipped unparseable candidate '" + rec.smiles + "': " + e.what());
      continue;
    }
    if (rec.cliff_mol == 1) anchors.push_back(std::move(p));
    else partners.push_back(std::move(p));
  }

  std::vector<CliffPair> out;
  for (const Parsed& a : anchors) {
    for (const Parsed& p : partners) {
      double fc = fold_change(a.rec->exp_mean_nm, p.rec->exp_mean_nm);
      if (fc < opts.tau_fold) continue;
      double sim_full = tanimoto(a.fp, p.fp);
      double sim_scaffold = tanimoto(a.scaffold_fp, p.scaffold_fp);
      double sim_string = levenshtein_similarity(a.canonical, p.canonical);
      if (std::max({sim_full, sim_scaffold, sim_string}) < opts.tau_sim) continue;
      CliffPair pair;
      pair.anchor = *a.rec;
      pair.partner = *p.rec;
      pair.fold_change = fc;
      pair.sim_full = sim_full;
      pair.sim_scaffold = sim_scaffold;
      pair.sim_string = sim_string;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

FragmentLabels label_fragments(CliffPair& pair, const ExplainEncoding& explain_a,
                               const ExplainEncoding& explain_b,
                               const McsOptions& mcs_opts) {
  MolGraph mol_a = parse_smiles(pair.anchor.smiles);
  MolGraph mol_b = parse_smiles(pair.partner.smiles);
  int n_a = mol_a.atom_count();
  int n_b = mol_b.atom_count();

  std::set<int> shared_a, shared_b;
  pair.atom_map.reset();
  std::optional<McsResult> res = mcs(mol_a, mol_b, mcs_opts);
  if (res && !res->truncated) {
    shared_a.insert(res->matched_a.begin(), res->matched_a.end());
    shared_b.insert(res->matched_b.begin(), res->matched_b.end());
    std::vector<std::pair<int, int>> correspondence;
    for (size_t i = 0; i < res->matched_a.size(); ++i) {
      correspondence.emplace_back(res->matched_a[i], res->matched_b[i]);
    }
    pair.atom_map = std::move(correspondence);
  }
  // empty or truncated search: every atom is differential

  pair.shared_a.assign(shared_a.begin(), shared_a.end());
  pair.shared_b.assign(shared_b.begin(), shared_b.end());
  pair.diff_a.clear();
  pair.diff_b.clear();
  for (int i = 0; i < n_a; ++i) {
    if (!shared_a.count(i)) pair.diff_a.push_back(i);
  }
  for (int i = 0; i < n_b; ++i) {
    if (!shared_b.count(i)) pair.diff_b.push_back(i);
  }

  auto mask_of = [](const ExplainEncoding& ex, const std::vector<int>& diff_atoms) {
    std::set<int> diff(diff_atoms.begin(), diff_atoms.end());
    std::vector<uint8_t> mask(ex.token_ids.size(), 0);
    for (size_t t = 0; t < ex.token_ids.size(); ++t) {
      for (int atom : ex.atom_sets[t]) {
        if (diff.count(atom)) {
          mask[t] = 1;  // any-diff rule
          break;
        }
      }
    }
    return mask;
  };

  FragmentLabels labels;
  labels.diff_anchor = mask_of(explain_a, pair.diff_a);
  labels.diff_partner = mask_of(explain_b, pair.diff_b);
  return labels;
}

DtapReport rel_dtap(const std::vector<double>& attention_row,
                    const std::vector<uint8_t>& diff_mask,
                    const std::vector<std::pair<int, int>>& region_boundaries,
                    double epsilon) {
  if (attention_row.size() != diff_mask.size()) {
    throw std::invalid_argument("rel_dtap: attention and mask lengths differ");
  }
  for (double w : attention_row) {
    if (w < 0) throw std::invalid_argument("rel_dtap: negative attention weight");
  }

  auto region_stats = [&](int begin, int end) {
    RegionDtap r;
    double wsum = 0;
    for (int i = begin; i < end; ++i) wsum += attention_row[i];
    double diff_sum = 0, shared_sum = 0;
    int64_t diff_n = 0, shared_n = 0;
    for (int i = begin; i < end; ++i) {
      double p = wsum > 0 ? attention_row[i] / wsum : 0.0;
      if (diff_mask[i]) {
        diff_sum += p;
        ++diff_n;
      } else {
        shared_sum += p;
        ++shared_n;
      }
    }
    r.mdta = diff_n > 0 ? diff_sum / static_cast<double>(diff_n) : 0.0;
    r.msta = shared_n > 0 ? shared_sum / static_cast<double>(shared_n) : 0.0;
    r.rel_dtap_percent = (r.mdta - r.msta) / (r.msta + epsilon) * 100.0;
    return r;
  };

  DtapReport report;
  report.epsilon = epsilon;
  report.molecule_count = 1;
  for (auto [begin, end] : region_boundaries) {
    if (begin < 0 || end < begin || end > static_cast<int>(attention_row.size())) {
      throw std::invalid_argument("rel_dtap: region boundary out of range");
    }
    report.regions.push_back(region_stats(begin, end));
  }
  report.overall = region_stats(0, static_cast<int>(attention_row.size()));
  return report;
}

std::vector<AttentionRow> read_attention_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open attention file: " + path);
  std::vector<AttentionRow> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("attention file line " + std::to_string(line_no) +
                               " is not valid json: " + e.what());
    }
    AttentionRow row;
    row.molecule_id = j.at("molecule_id").get<std::string>();
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "with_fp") row.with_fp = true;
    else if (mode == "without_fp") row.with_fp = false;
    else throw std::runtime_error("attention file line " + std::to_string(line_no) +
                                  ": mode must be with_fp or without_fp");
    row.weights = j.at("weights").get<std::vector<double>>();
    out.push_back(std::move(row));
  }
  return out;
}

DtapReport aggregate_dtap(const std::vector<CliffPair>& pairs,
                          const std::vector<Vocabulary>& vocabs,
                          const std::vector<AttentionRow>& attention,
                          const DtapOptions& opts, std::vector<std::string>* log) {
  auto note = [&](const std::string& msg) {
    if (log) log->push_back(msg);
  };
  std::map<std::string, const AttentionRow*> by_id;
  for (const AttentionRow& row : attention) by_id[row.molecule_id] = &row;

  size_t n_regions = vocabs.size();
  std::vector<double> rel_sum(n_regions, 0), mdta_sum(n_regions, 0), msta_sum(n_regions, 0);
  std::vector<int64_t> region_n(n_regions, 0);
  double overall_rel = 0, overall_mdta = 0, overall_msta = 0;
  int64_t overall_n = 0;
  int64_t molecule_count = 0;

  for (const CliffPair& source_pair : pairs) {
    CliffPair pair = source_pair;
    ExplainEncoding ex_a, ex_b;
    try {
      ex_a = encode_explain(parse_smiles(pair.anchor.smiles), vocabs);
      ex_b = encode_explain(parse_smiles(pair.partner.smiles), vocabs);
    } catch (const std::exception& e) {
      note("skipped pair (" + pair.anchor.smiles + ", " + pair.partner.smiles +
           "): " + e.what());
      continue;
    }
    FragmentLabels labels = label_fragments(pair, ex_a, ex_b, opts.mcs);

    struct Side {
      const std::string* id;
      const ExplainEncoding* ex;
      const std::vector<uint8_t>* mask;
    };
    for (const Side& side : {Side{&pair.anchor.smiles, &ex_a, &labels.diff_anchor},
                             Side{&pair.partner.smiles, &ex_b, &labels.diff_partner}}) {
      auto it = by_id.find(*side.id);
      if (it == by_id.end()) {
        note("no attention row for molecule: " + *side.id);
        continue;
      }
      const AttentionRow& row = *it->second;
      size_t expected = side.ex->token_ids.size() + (row.with_fp ? 1 : 0);
      if (row.weights.size() != expected) {
        note("attention length mismatch for " + *side.id + ": got " +
             std::to_string(row.weights.size()) + ", expected " + std::to_string(expected));
        continue;
      }
      // drop the fingerprint position, then the framing specials
      size_t fp_offset = row.with_fp ? 1 : 0;
      std::vector<double> weights;
      std::vector<uint8_t> mask;
      std::vector<std::pair<int, int>> boundaries;
      for (auto [begin, end] : side.ex->region_boundaries) {
        int r_begin = static_cast<int>(weights.size());
        for (int t = begin; t < end; ++t) {
          weights.push_back(row.weights[fp_offset + t]);
          mask.push_back((*side.mask)[t]);
        }
        boundaries.emplace_back(r_begin, static_cast<int>(weights.size()));
      }
      DtapReport one = rel_dtap(weights, mask, boundaries, opts.epsilon);
      ++molecule_count;
      for (size_t r = 0; r < n_regions; ++r) {
        if (opts.skip_empty_class) {
          auto [begin, end] = boundaries[r];
          int64_t diff_n = 0, shared_n = 0;
          for (int i = begin; i < end; ++i) {
            if (mask[i]) ++diff_n;
            else ++shared_n;
          }
          if (diff_n == 0 || shared_n == 0) continue;
        }
        rel_sum[r] += one.regions[r].rel_dtap_percent;
        mdta_sum[r] += one.regions[r].mdta;
        msta_sum[r] += one.regions[r].msta;
        ++region_n[r];
      }
      overall_rel += one.overall.rel_dtap_percent;
      overall_mdta += one.overall.mdta;
      overall_msta += one.overall.msta;
      ++overall_n;
    }
  }

  DtapReport report;
  report.epsilon = opts.epsilon;
  report.molecule_count = molecule_count;
  for (size_t r = 0; r < n_regions; ++r) {
    RegionDtap region;
    if (region_n[r] > 0) {
      region.mdta = mdta_sum[r] / static_cast<double>(region_n[r]);
      region.msta = msta_sum[r] / static_cast<double>(region_n[r]);
      region.rel_dtap_percent = rel_sum[r] / static_cast<double>(region_n[r]);
    }
    report.regions.push_back(region);
  }
  if (overall_n > 0) {
    report.overall.mdta = overall_mdta / static_cast<double>(overall_n);
    report.overall.msta = overall_msta / static_cast<double>(overall_n);
    report.overall.rel_dtap_percent = overall_rel / static_cast<double>(overall_n);
  }
  return report;
}

void write_pairs_csv(const std::vector<CliffPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open pairs csv for writing: " + path);
  out << "anchor,partner,fold_change,sim_full,sim_scaffold,sim_string\n";
  out.precision(12);
  for (const CliffPair& p : pairs) {
    out << csv_escape(p.anchor.smiles) << ',' << csv_escape(p.partner.smiles) << ','
        << p.fold_change << ',' << p.sim_full << ',' << p.sim_scaffold << ','
        << p.sim_string << "\n";
  }
}

std::vector<CliffPair> read_pairs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pairs csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty pairs csv: " + path);
  std::vector<CliffPair> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < 6) throw std::runtime_error("pairs csv row too short: " + line);
    CliffPair p;
    p.anchor.smiles = fields[0];
    p.partner.smiles = fields[1];
    p.fold_change = std::stod(fields[2]);
    p.sim_full = std::stod(fields[3]);
    p.sim_scaffold = std::stod(fields[4]);
    p.sim_string = std::stod(fields[5]);
    out.push_back(std::move(p));
  }
  return out;
}

std::string dtap_report_to_json(const DtapReport& r) {
  ordered_json j;
  j["epsilon"] = r.epsilon;
  j["molecule_count"] = r.molecule_count;
  ordered_json regions = ordered_json::array();
  for (size_t i = 0; i < r.regions.size(); ++i) {
    regions.push_back({{"region", i},
                       {"mdta", r.regions[i].mdta},
                       {"msta", r.regions[i].msta},
                       {"rel_dtap_percent", r.regions[i].rel_dtap_percent}});
  }
  j["regions"] = std::move(regions);
  j["overall"] = {{"mdta", r.overall.mdta},
                  {"msta", r.overall.msta},
                  {"rel_dtap_percent", r.overall.rel_dtap_percent}};
  return j.dump(2) + "\n";
}

std::vector<CliffPair> select_case_pairs(const std::vector<CliffPair>& pairs, CaseMode mode,
                                         const McsOptions& mcs_opts) {
  struct Scored {
    CliffPair pair;
    int n_max = 0;
    int delta_n = 0;
    int edit_size = 0;
  };
  std::vector<Scored> scored;
  for (const CliffPair& p : pairs) {
    Scored s;
    s.pair = p;
    try {
      MolGraph a = parse_smiles(p.anchor.smiles);
      MolGraph b = parse_smiles(p.partner.smiles);
      s.n_max = std::max(a.atom_count(), b.atom_count());
      s.delta_n = std::abs(a.atom_count() - b.atom_count());
      if (mode == CaseMode::A) {
        std::optional<McsResult> res = mcs(a, b, mcs_opts);
        int matched = res && !res->truncated ? res->size() : 0;
        s.edit_size = (a.atom_count() - matched) + (b.atom_count() - matched);
      }
    } catch (const std::exception&) {
      continue;
    }
    scored.push_back(std::move(s));
  }

  std::vector<Scored> kept;
  switch (mode) {
    case CaseMode::A:
      for (Scored& s : scored) {
        if (s.delta_n <= 3 && s.n_max <= 100 && s.edit_size <= 5) kept.push_back(std::move(s));
      }
      std::sort(kept.begin(), kept.end(), [](const Scored& x, const Scored& y) {
        if (x.edit_size != y.edit_size) return x.edit_size < y.edit_size;
        return x.pair.fold_change > y.pair.fold_change;
      });
      break;
    case CaseMode::B:
      kept = std::move(scored);
      std::sort(kept.begin(), kept.end(), [](const Scored& x, const Scored& y) {
        return x.pair.fold_change > y.pair.fold_change;
      });
      break;
    case CaseMode::C:
      for (Scored& s : scored) {
        if (s.n_max >= 40 && s.delta_n <= 3) kept.push_back(std::move(s));
      }
      std::sort(kept.begin(), kept.end(), [](const Scored& x, const Scored& y) {
        return x.n_max > y.n_max;
      });
      break;
  }
  std::vector<CliffPair> out;
  out.reserve(kept.size());
  for (Scored& s : kept) out.push_back(std::move(s.pair));
  return out;
}

}  // namespace cams
