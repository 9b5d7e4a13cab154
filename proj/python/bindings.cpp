#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cams/cliffs.hpp"
#include "cams/pipeline.hpp"

namespace py = pybind11;
using namespace cams;

namespace {

MolGraph mol_from_smiles(const std::string& smiles) { return parse_smiles(smiles); }

std::vector<Vocabulary> train_vocabs(const std::vector<std::string>& smiles, int k,
                                     int64_t f_min, const std::vector<int>& prefixes,
                                     int64_t min_motif_freq) {
  std::vector<MolGraph> corpus;
  for (const std::string& s : smiles) {
    MolGraph g = parse_smiles(s);
    if (g.component_count() == 1) corpus.push_back(std::move(g));
  }
  MergeList merges = learn_merges(corpus, k, f_min);
  std::vector<MotifToken> savc = build_savc(SavcConfig::organic_subset());
  std::vector<Vocabulary> out;
  for (int prefix : prefixes) {
    if (prefix > merges.k_max) {
      throw std::out_of_range("prefix " + std::to_string(prefix) +
                              " exceeds learned merge count " + std::to_string(merges.k_max));
    }
    out.push_back(materialize_vocab(corpus, merges, prefix, savc, min_motif_freq));
  }
  return out;
}

py::dict view_to_dict(const CamsSequence& seq) {
  py::dict d;
  d["kind"] = seq.kind == CamsSequence::Kind::MultiScale ? "multi" : "single";
  d["scale"] = seq.scale;
  d["ids"] = seq.token_ids;
  d["regions"] = seq.region_boundaries;
  d["phase1_nodes"] = seq.phase1_node_count;
  return d;
}

py::list encode_multiscale_py(const std::string& smiles,
                              const std::vector<Vocabulary>& vocabs) {
  py::list out;
  for (const CamsSequence& seq : encode_multiscale(parse_smiles(smiles), vocabs)) {
    out.append(view_to_dict(seq));
  }
  return out;
}

py::dict encode_explain_py(const std::string& smiles,
                           const std::vector<Vocabulary>& vocabs) {
  ExplainEncoding ex = encode_explain(parse_smiles(smiles), vocabs);
  py::dict d;
  d["ids"] = ex.token_ids;
  d["atom_sets"] = ex.atom_sets;
  d["regions"] = ex.region_boundaries;
  return d;
}

py::object mcs_py(const std::string& a, const std::string& b, bool complete_rings_only,
                  bool ring_matches_ring, bool compare_elements, bool compare_order,
                  int64_t node_budget, double time_budget_seconds) {
  McsOptions opts;
  opts.complete_rings_only = complete_rings_only;
  opts.ring_matches_ring = ring_matches_ring;
  opts.compare_elements = compare_elements;
  opts.compare_order = compare_order;
  opts.node_budget = node_budget;
  opts.time_budget_seconds = time_budget_seconds;
  auto res = mcs(parse_smiles(a), parse_smiles(b), opts);
  if (!res) return py::none();
  py::dict d;
  d["matched_a"] = res->matched_a;
  d["matched_b"] = res->matched_b;
  d["code"] = res->smarts_like_code;
  d["truncated"] = res->truncated;
  return d;
}

std::vector<int> fingerprint_bits_py(const std::string& smiles, int radius, int nbits) {
  FingerprintBits fp = circular_fingerprint(parse_smiles(smiles), radius, nbits);
  std::vector<int> bits;
  for (int i = 0; i < fp.nbits; ++i) {
    if (fp.test(i)) bits.push_back(i);
  }
  return bits;
}

double tanimoto_py(const std::string& a, const std::string& b, int radius, int nbits) {
  return tanimoto(circular_fingerprint(parse_smiles(a), radius, nbits),
                  circular_fingerprint(parse_smiles(b), radius, nbits));
}

std::string murcko_py(const std::string& smiles) {
  MolGraph scaffold = murcko_scaffold(parse_smiles(smiles));
  if (scaffold.atoms.empty()) return "";
  return canonical_smiles(scaffold);
}

py::list find_cliff_pairs_py(const std::vector<py::dict>& records, double tau_sim,
                             double tau_fold, const std::string& anchor_split) {
  std::vector<ActivityRecord> recs;
  for (const py::dict& d : records) {
    ActivityRecord r;
    r.smiles = d["smiles"].cast<std::string>();
    r.exp_mean_nm = d["exp_mean_nm"].cast<double>();
    r.cliff_mol = d["cliff_mol"].cast<int>();
    r.split = d["split"].cast<std::string>();
    recs.push_back(std::move(r));
  }
  CliffOptions opts;
  opts.tau_sim = tau_sim;
  opts.tau_fold = tau_fold;
  opts.anchor_split = anchor_split;
  py::list out;
  for (const CliffPair& p : find_cliff_pairs(recs, opts)) {
    py::dict d;
    d["anchor"] = p.anchor.smiles;
    d["partner"] = p.partner.smiles;
    d["fold_change"] = p.fold_change;
    d["sim_full"] = p.sim_full;
    d["sim_scaffold"] = p.sim_scaffold;
    d["sim_string"] = p.sim_string;
    out.append(d);
  }
  return out;
}

py::dict label_pair_py(const std::string& anchor, const std::string& partner,
                       const std::vector<Vocabulary>& vocabs) {
  ExplainEncoding ex_a = encode_explain(parse_smiles(anchor), vocabs);
  ExplainEncoding ex_b = encode_explain(parse_smiles(partner), vocabs);
  CliffPair pair;
  pair.anchor.smiles = anchor;
  pair.partner.smiles = partner;
  FragmentLabels labels = label_fragments(pair, ex_a, ex_b);
  py::dict d;
  d["ids_anchor"] = ex_a.token_ids;
  d["ids_partner"] = ex_b.token_ids;
  d["regions_anchor"] = ex_a.region_boundaries;
  d["regions_partner"] = ex_b.region_boundaries;
  d["diff_mask_anchor"] = labels.diff_anchor;
  d["diff_mask_partner"] = labels.diff_partner;
  d["shared_a"] = pair.shared_a;
  d["diff_a"] = pair.diff_a;
  d["shared_b"] = pair.shared_b;
  d["diff_b"] = pair.diff_b;
  return d;
}

py::dict region_to_dict(const RegionDtap& r) {
  py::dict d;
  d["mdta"] = r.mdta;
  d["msta"] = r.msta;
  d["rel_dtap_percent"] = r.rel_dtap_percent;
  return d;
}

py::dict rel_dtap_py(const std::vector<double>& weights, const std::vector<int>& diff_mask,
                     const std::vector<std::pair<int, int>>& regions, double epsilon) {
  std::vector<uint8_t> mask(diff_mask.begin(), diff_mask.end());
  DtapReport rep = rel_dtap(weights, mask, regions, epsilon);
  py::dict d;
  py::list region_list;
  for (const RegionDtap& r : rep.regions) region_list.append(region_to_dict(r));
  d["regions"] = region_list;
  d["overall"] = region_to_dict(rep.overall);
  d["epsilon"] = rep.epsilon;
  return d;
}

py::dict density_py(double rho, int views, double t_avg) {
  DensityReport r = supervision_density(rho, views, t_avg);
  py::dict d;
  d["rho"] = r.rho;
  d["views"] = r.views;
  d["t_avg"] = r.t_avg;
  d["sd_ntp"] = r.sd_ntp;
  d["sd_mnp"] = r.sd_mnp;
  d["targets_ntp"] = r.targets_ntp;
  d["targets_mnp"] = r.targets_mnp;
  d["ratio"] = r.ratio;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CamS molecular tokenization core";

  py::register_exception<ParseError>(m, "SmilesParseError", PyExc_ValueError);

  py::class_<MolGraph>(m, "Molecule")
      .def_property_readonly("atom_count", &MolGraph::atom_count)
      .def_property_readonly("bond_count", &MolGraph::bond_count)
      .def("__repr__", [](const MolGraph& g) {
        return "<Molecule atoms=" + std::to_string(g.atom_count()) +
               " bonds=" + std::to_string(g.bond_count()) + ">";
      });

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_readonly("prefix_k", &Vocabulary::prefix_k)
      .def_readonly("scale", &Vocabulary::scale)
      .def_property_readonly("size",
                             [](const Vocabulary& v) { return v.tokens.size(); })
      .def("token_string",
           [](const Vocabulary& v, int id) {
             return v.tokens.at(static_cast<size_t>(id)).with_conn;
           })
      .def("lookup",
           [](const Vocabulary& v, const std::string& code) -> py::object {
             auto it = v.lookup.find(code);
             if (it == v.lookup.end()) return py::none();
             return py::int_(it->second);
           })
      .def("to_json", &vocabulary_to_json)
      .def_static("from_json", &vocabulary_from_json)
      .def("save", &save_vocabulary)
      .def_static("load", &load_vocabulary)
      .def("__repr__", [](const Vocabulary& v) {
        return "<Vocabulary prefix_k=" + std::to_string(v.prefix_k) +
               " scale=" + std::to_string(v.scale) + ">";
      });

  m.attr("BOS_ID") = Vocabulary::kBosId;
  m.attr("EOS_ID") = Vocabulary::kEosId;
  m.attr("CONCAT_ID") = Vocabulary::kConcatId;
  m.attr("UNK_ID") = Vocabulary::kUnkId;

  m.def("parse_smiles", &mol_from_smiles, py::arg("smiles"));
  m.def(
      "canonical_smiles",
      [](const std::string& s) { return canonical_smiles(parse_smiles(s)); },
      py::arg("smiles"));
  m.def(
      "fragment_code",
      [](const std::string& s, const std::vector<int>& atoms, bool with_connections) {
        return fragment_code(parse_smiles(s), atoms, with_connections);
      },
      py::arg("smiles"), py::arg("atoms"), py::arg("with_connections") = true);

  m.def("train_vocabs", &train_vocabs, py::arg("smiles"), py::arg("k"),
        py::arg("f_min") = 1, py::arg("prefixes") = std::vector<int>{0},
        py::arg("min_motif_freq") = 1);
  m.def(
      "encode",
      [](const std::string& s, const Vocabulary& v) {
        return encode_scale(parse_smiles(s), v).token_ids;
      },
      py::arg("smiles"), py::arg("vocab"));
  m.def("encode_multiscale", &encode_multiscale_py, py::arg("smiles"), py::arg("vocabs"));
  m.def("encode_explain", &encode_explain_py, py::arg("smiles"), py::arg("vocabs"));

  m.def("fingerprint_bits", &fingerprint_bits_py, py::arg("smiles"), py::arg("radius") = 2,
        py::arg("nbits") = 2048);
  m.def("tanimoto", &tanimoto_py, py::arg("smiles_a"), py::arg("smiles_b"),
        py::arg("radius") = 2, py::arg("nbits") = 2048);
  m.def("murcko_scaffold", &murcko_py, py::arg("smiles"));
  m.def("levenshtein_similarity", &levenshtein_similarity, py::arg("s1"), py::arg("s2"));
  m.def("mcs", &mcs_py, py::arg("smiles_a"), py::arg("smiles_b"),
        py::arg("complete_rings_only") = true, py::arg("ring_matches_ring") = true,
        py::arg("compare_elements") = true, py::arg("compare_order") = true,
        py::arg("node_budget") = int64_t{1000000}, py::arg("time_budget_seconds") = 5.0);

  m.def("find_cliff_pairs", &find_cliff_pairs_py, py::arg("records"),
        py::arg("tau_sim") = 0.9, py::arg("tau_fold") = 10.0,
        py::arg("anchor_split") = "test");
  m.def("label_pair", &label_pair_py, py::arg("anchor"), py::arg("partner"),
        py::arg("vocabs"));
  m.def("rel_dtap", &rel_dtap_py, py::arg("weights"), py::arg("diff_mask"),
        py::arg("regions"), py::arg("epsilon") = 1e-12);
  m.def("supervision_density", &density_py, py::arg("rho"), py::arg("views"),
        py::arg("t_avg"));
}
