#include "cams/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cams {

using ordered_json = nlohmann::ordered_json;

std::string token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Motif: return "motif";
    case TokenKind::Sav: return "sav";
    case TokenKind::SavAltform: return "sav_altform";
    case TokenKind::Special: return "special";
  }
  return "motif";
}

TokenKind token_kind_from_name(const std::string& name) {
  if (name == "motif") return TokenKind::Motif;
  if (name == "sav") return TokenKind::Sav;
  if (name == "sav_altform") return TokenKind::SavAltform;
  if (name == "special") return TokenKind::Special;
  throw std::invalid_argument("unknown token kind: " + name);
}

MergeList learn_merges(const std::vector<MolGraph>& corpus, int K, int64_t f_min) {
  if (K < 0) throw std::invalid_argument("learn_merges: K must be >= 0");
  if (f_min < 1) throw std::invalid_argument("learn_merges: f_min must be >= 1");

  std::vector<MolGraph> canonical;
  canonical.reserve(corpus.size());
  std::vector<std::string> smiles;
  for (const MolGraph& g : corpus) {
    if (g.atoms.empty() || g.component_count() != 1) continue;  // salts are dropped upstream
    CanonicalResult res = canonicalize(g);
    canonical.push_back(relabel_to_ranks(g, *res.graph.canonical_ranks));
    smiles.push_back(std::move(res.smiles));
  }
  std::sort(smiles.begin(), smiles.end());
  uint64_t corpus_hash = 0xcbf29ce484222325ull;
  for (const std::string& s : smiles) {
    corpus_hash = fnv1a64(s + "\n", corpus_hash);
  }

  std::vector<BpeEngine> engines;
  engines.reserve(canonical.size());
  for (const MolGraph& g : canonical) engines.emplace_back(g);

  std::unordered_map<std::string, int64_t> stats;
  for (const BpeEngine& e : engines) e.accumulate_pair_stats(stats);

  MergeList out;
  out.f_min = f_min;
  {
    std::ostringstream oss;
    oss << std::hex << corpus_hash;
    out.corpus_id = oss.str();
  }

  for (int t = 0; t < K; ++t) {
    const std::string* best_code = nullptr;
    int64_t best_count = 0;
    for (const auto& [code, count] : stats) {
      if (count <= 0) continue;
      if (count > best_count || (count == best_count && best_code && code > *best_code)) {
        best_count = count;
        best_code = &code;
      }
    }
    if (!best_code || best_count < f_min) break;
    std::string code = *best_code;

    for (BpeEngine& e : engines) {
      BpeEngine::StatsDelta delta;
      e.apply_op(code, &delta);
      for (const std::string& c : delta.removed) stats[c] -= 1;
      for (const std::string& c : delta.added) stats[c] += 1;
    }
    stats[code] = 0;
    out.ops.push_back({code, best_count});
  }
  out.k_max = static_cast<int>(out.ops.size());
  return out;
}

SavcConfig SavcConfig::organic_subset() {
  SavcConfig cfg;
  cfg.elements = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
  for (const std::string& e : cfg.elements) cfg.valence_table[e] = typical_valences(e);
  cfg.bond_types = {BondOrder::Single, BondOrder::Double, BondOrder::Triple,
                    BondOrder::Aromatic};
  return cfg;
}

namespace {

// Lone atom with the given attachment pattern, canonicalized the same way
// encoder-produced single-atom fragments are.
std::string single_atom_code(const std::string& element, bool aromatic, int hcount,
                             const std::vector<BondOrder>& cuts) {
  MolGraph g;
  Atom core;
  core.element = element;
  core.aromatic = aromatic;
  core.hcount = hcount;
  g.atoms.push_back(core);
  for (BondOrder order : cuts) {
    Atom w;
    w.element = "*";
    g.atoms.push_back(w);
    g.bonds.push_back({0, g.atom_count() - 1, order});
  }
  return canonical_smiles(g);
}

std::string plain_atom_code(const std::string& element, bool aromatic, int hcount) {
  return single_atom_code(element, aromatic, hcount, {});
}

}  // namespace

std::vector<MotifToken> build_savc(const SavcConfig& config) {
  std::vector<MotifToken> out;
  std::set<std::string> seen_codes;

  auto add = [&](MotifToken tok) {
    if (tok.kind != TokenKind::SavAltform && !seen_codes.insert(tok.with_conn).second) return;
    tok.id = static_cast<int>(out.size());
    out.push_back(std::move(tok));
  };

  bool want_single = false, want_double = false, want_triple = false, want_aromatic = false;
  for (BondOrder b : config.bond_types) {
    switch (b) {
      case BondOrder::Single: want_single = true; break;
      case BondOrder::Double: want_double = true; break;
      case BondOrder::Triple: want_triple = true; break;
      case BondOrder::Aromatic: want_aromatic = true; break;
    }
  }

  for (const std::string& elem : config.elements) {
    auto it = config.valence_table.find(elem);
    if (it == config.valence_table.end() || it->second.empty()) {
      throw std::invalid_argument("build_savc: element missing from valence table: " + elem);
    }
    const std::vector<int>& valences = it->second;

    // standalone form: no attachments, hydrogens fill the smallest valence
    MotifToken standalone;
    standalone.kind = TokenKind::Sav;
    standalone.no_conn = plain_atom_code(elem, false, valences.front());
    standalone.with_conn = standalone.no_conn;
    add(std::move(standalone));

    MotifToken altform;
    altform.kind = TokenKind::SavAltform;
    altform.no_conn = "[" + elem + "_AltForm]";
    altform.with_conn = altform.no_conn;
    add(std::move(altform));

    for (int valence : valences) {
      for (int n_arom : {0, 2, 3}) {
        if (n_arom > 0 && (!want_aromatic || !is_aromatic_capable(elem))) continue;
        int arom_units = n_arom + (n_arom > 0 ? 1 : 0);
        for (int n_triple = 0; n_triple * 3 + arom_units <= valence; ++n_triple) {
          if (n_triple > 0 && !want_triple) break;
          for (int n_double = 0; n_triple * 3 + n_double * 2 + arom_units <= valence;
               ++n_double) {
            if (n_double > 0 && !want_double) break;
            int base = n_triple * 3 + n_double * 2 + arom_units;
            for (int n_single = 0; base + n_single <= valence; ++n_single) {
              if (n_single > 0 && !want_single) break;
              int cuts = n_single + n_double + n_triple + n_arom;
              if (cuts == 0) continue;
              int hcount = valence - base - n_single;
              std::vector<BondOrder> pattern;
              for (int i = 0; i < n_arom; ++i) pattern.push_back(BondOrder::Aromatic);
              for (int i = 0; i < n_triple; ++i) pattern.push_back(BondOrder::Triple);
              for (int i = 0; i < n_double; ++i) pattern.push_back(BondOrder::Double);
              for (int i = 0; i < n_single; ++i) pattern.push_back(BondOrder::Single);
              MotifToken tok;
              tok.kind = TokenKind::Sav;
              tok.no_conn = plain_atom_code(elem, n_arom >= 2, hcount);
              tok.with_conn = single_atom_code(elem, n_arom >= 2, hcount, pattern);
              add(std::move(tok));
            }
          }
        }
      }
    }
  }
  return out;
}

Vocabulary materialize_vocab(const std::vector<MolGraph>& corpus, const MergeList& merges,
                             int k, const std::vector<MotifToken>& savc,
                             int64_t min_motif_freq) {
  if (k > merges.k_max) {
    throw std::out_of_range("materialize_vocab: prefix exceeds learned merge list");
  }

  Vocabulary v;
  v.prefix_k = k;
  v.merges.assign(merges.ops.begin(), merges.ops.begin() + k);

  for (const char* name : {"[BOS]", "[EOS]", "[CONCAT]", "[UNK]"}) {
    MotifToken tok;
    tok.kind = TokenKind::Special;
    tok.no_conn = name;
    tok.with_conn = name;
    tok.id = static_cast<int>(v.tokens.size());
    v.tokens.push_back(std::move(tok));
  }

  std::set<std::string> elements;
  for (const MotifToken& tok : savc) {
    MotifToken copy = tok;
    copy.id = static_cast<int>(v.tokens.size());
    if (copy.kind == TokenKind::SavAltform) {
      std::string elem = copy.with_conn.substr(1, copy.with_conn.find("_AltForm") - 1);
      v.altform_ids[elem] = copy.id;
      elements.insert(elem);
    } else {
      if (v.lookup.count(copy.with_conn)) continue;
      v.lookup[copy.with_conn] = copy.id;
    }
    v.tokens.push_back(std::move(copy));
  }
  v.elements.assign(elements.begin(), elements.end());

  struct Candidate {
    std::string no_conn;
    int64_t freq = 0;
  };
  std::map<std::string, Candidate> candidates;  // with_conn -> info
  for (const MolGraph& g : corpus) {
    if (g.atoms.empty() || g.component_count() != 1) continue;
    CanonicalResult res = canonicalize(g);
    MolGraph canon = relabel_to_ranks(g, *res.graph.canonical_ranks);
    BpeEngine engine(canon);
    engine.apply_prefix(merges, k);
    BPEGraph bg = engine.snapshot();
    for (const BPEGraphNode& node : bg.nodes) {
      std::string with_conn = fragment_code(canon, node.atom_indices, true);
      Candidate& c = candidates[with_conn];
      if (c.freq == 0) c.no_conn = fragment_code(canon, node.atom_indices, false);
      c.freq += 1;
    }
  }

  struct Ranked {
    int64_t freq;
    std::string with_conn;
    std::string no_conn;
  };
  std::vector<Ranked> ranked;
  for (auto& [with_conn, c] : candidates) {
    if (c.freq < min_motif_freq) continue;
    if (v.lookup.count(with_conn)) continue;  // covered by SAVC
    ranked.push_back({c.freq, with_conn, std::move(c.no_conn)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.freq != b.freq) return a.freq > b.freq;
    return a.with_conn < b.with_conn;
  });
  for (Ranked& r : ranked) {
    MotifToken tok;
    tok.kind = TokenKind::Motif;
    tok.no_conn = std::move(r.no_conn);
    tok.with_conn = std::move(r.with_conn);
    tok.id = static_cast<int>(v.tokens.size());
    v.lookup[tok.with_conn] = tok.id;
    v.tokens.push_back(std::move(tok));
  }

  v.scale = static_cast<int>(v.tokens.size()) - 4;
  return v;
}

int backoff_lookup(const Vocabulary& v, const std::string& code, int core_atom_count,
                   const std::string& element) {
  auto it = v.lookup.find(code);
  if (it != v.lookup.end()) return it->second;
  if (core_atom_count == 1) {
    auto alt = v.altform_ids.find(element);
    if (alt != v.altform_ids.end()) return alt->second;
  }
  return Vocabulary::kUnkId;
}

std::string vocabulary_to_json(const Vocabulary& v) {
  ordered_json j;
  j["version"] = 1;
  j["prefix_k"] = v.prefix_k;
  j["scale"] = v.scale;
  j["elements"] = v.elements;
  ordered_json tokens = ordered_json::array();
  for (const MotifToken& tok : v.tokens) {
    tokens.push_back({{"id", tok.id},
                      {"kind", token_kind_name(tok.kind)},
                      {"no_conn", tok.no_conn},
                      {"with_conn", tok.with_conn}});
  }
  j["tokens"] = std::move(tokens);
  ordered_json merges = ordered_json::array();
  for (const MergeOp& op : v.merges) {
    merges.push_back({{"code", op.code}, {"frequency", op.learned_frequency}});
  }
  j["merges"] = std::move(merges);
  return j.dump(2) + "\n";
}

Vocabulary vocabulary_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  Vocabulary v;
  v.prefix_k = j.at("prefix_k").get<int>();
  v.scale = j.at("scale").get<int>();
  v.elements = j.at("elements").get<std::vector<std::string>>();
  for (const auto& t : j.at("tokens")) {
    MotifToken tok;
    tok.id = t.at("id").get<int>();
    tok.kind = token_kind_from_name(t.at("kind").get<std::string>());
    tok.no_conn = t.at("no_conn").get<std::string>();
    tok.with_conn = t.at("with_conn").get<std::string>();
    if (tok.id != static_cast<int>(v.tokens.size())) {
      throw std::invalid_argument("vocabulary file: non-contiguous token ids");
    }
    if (tok.kind == TokenKind::SavAltform) {
      std::string elem = tok.with_conn.substr(1, tok.with_conn.find("_AltForm") - 1);
      v.altform_ids[elem] = tok.id;
    } else if (tok.kind != TokenKind::Special) {
      v.lookup.emplace(tok.with_conn, tok.id);
    }
    v.tokens.push_back(std::move(tok));
  }
  for (const auto& m : j.at("merges")) {
    v.merges.push_back({m.at("code").get<std::string>(), m.at("frequency").get<int64_t>()});
  }
  return v;
}

void save_vocabulary(const Vocabulary& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << vocabulary_to_json(v);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return vocabulary_from_json(ss.str());
}

uint64_t vocabulary_hash(const Vocabulary& v) { return fnv1a64(vocabulary_to_json(v)); }

std::string merge_list_to_json(const MergeList& m) {
  ordered_json j;
  j["version"] = 1;
  j["k_max"] = m.k_max;
  j["f_min"] = m.f_min;
  j["corpus_id"] = m.corpus_id;
  ordered_json ops = ordered_json::array();
  for (const MergeOp& op : m.ops) {
    ops.push_back({{"code", op.code}, {"frequency", op.learned_frequency}});
  }
  j["ops"] = std::move(ops);
  return j.dump(2) + "\n";
}

MergeList merge_list_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  MergeList m;
  m.k_max = j.at("k_max").get<int>();
  m.f_min = j.at("f_min").get<int64_t>();
  m.corpus_id = j.at("corpus_id").get<std::string>();
  for (const auto& op : j.at("ops")) {
    m.ops.push_back({op.at("code").get<std::string>(), op.at("frequency").get<int64_t>()});
  }
  if (m.k_max != static_cast<int>(m.ops.size())) {
    throw std::invalid_argument("merge list file: k_max does not match ops length");
  }
  return m;
}

void save_merge_list(const MergeList& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << merge_list_to_json(m);
}

MergeList load_merge_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open merge list file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return merge_list_from_json(ss.str());
}

}  // namespace cams
