#include "cams/encoder.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace cams {

namespace {

struct CanonContext {
  MolGraph canon;
  std::vector<int> orig_of_rank;
};

CanonContext make_canon_context(const MolGraph& g) {
  CanonicalResult res = canonicalize(g);
  const std::vector<int>& ranks = *res.graph.canonical_ranks;
  CanonContext ctx;
  ctx.canon = relabel_to_ranks(g, ranks);
  ctx.orig_of_rank.assign(ranks.size(), -1);
  for (int i = 0; i < static_cast<int>(ranks.size()); ++i) ctx.orig_of_rank[ranks[i]] = i;
  return ctx;
}

void resolve_node(const BPEGraph& bg, int tree_index, const std::string* known_code,
                  const MolGraph& canon, const Vocabulary& v, std::vector<int>& ids,
                  std::vector<std::vector<int>>* atom_sets) {
  const MergeTreeNode& t = bg.tree_arena[tree_index];
  std::vector<int> atoms = bg.leaf_atoms(tree_index);
  std::string code = known_code ? *known_code : fragment_code(canon, atoms, true);

  if (t.is_leaf()) {
    int id = backoff_lookup(v, code, 1, canon.atoms[t.atom].element);
    ids.push_back(id);
    if (atom_sets) atom_sets->push_back(std::move(atoms));
    return;
  }
  auto it = v.lookup.find(code);
  if (it != v.lookup.end()) {
    ids.push_back(it->second);
    if (atom_sets) atom_sets->push_back(std::move(atoms));
    return;
  }
  resolve_node(bg, t.left, nullptr, canon, v, ids, atom_sets);
  resolve_node(bg, t.right, nullptr, canon, v, ids, atom_sets);
}

struct ScaleEncoding {
  std::vector<int> ids;
  std::vector<std::vector<int>> atom_sets;
  int phase1_nodes = 0;
};

ScaleEncoding encode_snapshot(const BPEGraph& bg, const MolGraph& canon, const Vocabulary& v,
                              bool want_atom_sets) {
  ScaleEncoding enc;
  enc.phase1_nodes = static_cast<int>(bg.nodes.size());
  std::vector<int> order = scaffold_bfs(bg);
  for (int pos : order) {
    const BPEGraphNode& node = bg.nodes[pos];
    resolve_node(bg, node.tree, &node.code, canon, v, enc.ids,
                 want_atom_sets ? &enc.atom_sets : nullptr);
  }
  return enc;
}

}  // namespace

BPEGraph apply_merges(const MolGraph& canonical_g, const MergeList& merges, int k) {
  if (!canonical_g.canonical_ranks.has_value()) {
    throw std::invalid_argument("apply_merges: graph lacks canonical ranks");
  }
  BpeEngine engine(canonical_g);
  engine.apply_prefix(merges, k);
  return engine.snapshot();
}

void validate_vocab_chain(const std::vector<Vocabulary>& vocabs) {
  if (vocabs.empty()) throw std::invalid_argument("encode: empty vocabulary list");
  for (size_t i = 1; i < vocabs.size(); ++i) {
    const Vocabulary& a = vocabs[i - 1];
    const Vocabulary& b = vocabs[i];
    if (a.prefix_k > b.prefix_k || a.scale > b.scale) {
      throw std::invalid_argument("encode: vocabularies must be sorted by ascending scale");
    }
    for (int k = 0; k < a.prefix_k; ++k) {
      if (a.merges[k].code != b.merges[k].code) {
        throw std::invalid_argument(
            "encode: vocabulary merge lists are not prefixes of one another");
      }
    }
  }
}

std::vector<int> scaffold_bfs(const BPEGraph& bg) {
  int n = static_cast<int>(bg.nodes.size());
  if (n == 0) return {};
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : bg.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  // order depends on node ids alone, not on node-list positions
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end(),
              [&](int x, int y) { return bg.nodes[x].node_id() < bg.nodes[y].node_id(); });
  }

  // root maximizes (atom_count, -node_id)
  int root = 0;
  for (int i = 1; i < n; ++i) {
    int ca = bg.nodes[i].atom_count();
    int cb = bg.nodes[root].atom_count();
    if (ca > cb || (ca == cb && bg.nodes[i].node_id() < bg.nodes[root].node_id())) root = i;
  }

  std::vector<int> order;
  order.reserve(n);
  std::vector<bool> visited(n, false);
  std::deque<int> queue{root};
  visited[root] = true;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (int x : adj[u]) {
      if (!visited[x]) {
        visited[x] = true;
        queue.push_back(x);
      }
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw std::invalid_argument("scaffold_bfs: motif graph is disconnected");
  }
  return order;
}

std::vector<int> resolve_tokens(const BPEGraph& bg, const std::vector<int>& order,
                                const MolGraph& canonical_g, const Vocabulary& v,
                                std::vector<std::vector<int>>* atom_sets) {
  std::vector<int> ids;
  for (int pos : order) {
    const BPEGraphNode& node = bg.nodes[pos];
    const std::string* code = node.code.empty() ? nullptr : &node.code;
    resolve_node(bg, node.tree, code, canonical_g, v, ids, atom_sets);
  }
  return ids;
}

CamsSequence encode_scale(const MolGraph& g, const Vocabulary& v) {
  CanonContext ctx = make_canon_context(g);
  BpeEngine engine(ctx.canon);
  MergeList prefix{v.merges, v.prefix_k, 1, ""};
  engine.apply_prefix(prefix, v.prefix_k);
  BPEGraph bg = engine.snapshot();
  ScaleEncoding enc = encode_snapshot(bg, ctx.canon, v, false);

  CamsSequence seq;
  seq.kind = CamsSequence::Kind::SingleScale;
  seq.scale = v.scale;
  seq.token_ids = std::move(enc.ids);
  seq.region_boundaries = {{0, static_cast<int>(seq.token_ids.size())}};
  seq.phase1_node_count = enc.phase1_nodes;
  return seq;
}

namespace {

std::vector<ScaleEncoding> encode_all_scales(const CanonContext& ctx,
                                             const std::vector<Vocabulary>& vocabs,
                                             bool want_atom_sets) {
  validate_vocab_chain(vocabs);
  BpeEngine engine(ctx.canon);
  const Vocabulary& widest = vocabs.back();
  MergeList full{widest.merges, widest.prefix_k, 1, ""};
  std::vector<ScaleEncoding> encodings;
  encodings.reserve(vocabs.size());
  for (const Vocabulary& v : vocabs) {
    engine.apply_prefix(full, v.prefix_k);
    BPEGraph bg = engine.snapshot();
    encodings.push_back(encode_snapshot(bg, ctx.canon, v, want_atom_sets));
  }
  return encodings;
}

}  // namespace

std::vector<CamsSequence> encode_multiscale(const MolGraph& g,
                                            const std::vector<Vocabulary>& vocabs) {
  CanonContext ctx = make_canon_context(g);
  std::vector<ScaleEncoding> encodings = encode_all_scales(ctx, vocabs, false);

  std::vector<CamsSequence> out;
  out.reserve(vocabs.size() + 1);
  for (size_t i = 0; i < encodings.size(); ++i) {
    CamsSequence seq;
    seq.kind = CamsSequence::Kind::SingleScale;
    seq.scale = vocabs[i].scale;
    seq.token_ids = encodings[i].ids;
    seq.region_boundaries = {{0, static_cast<int>(seq.token_ids.size())}};
    seq.phase1_node_count = encodings[i].phase1_nodes;
    out.push_back(std::move(seq));
  }

  CamsSequence multi;
  multi.kind = CamsSequence::Kind::MultiScale;
  multi.token_ids.push_back(Vocabulary::kBosId);
  for (size_t i = 0; i < encodings.size(); ++i) {
    int start = static_cast<int>(multi.token_ids.size());
    multi.token_ids.insert(multi.token_ids.end(), encodings[i].ids.begin(),
                           encodings[i].ids.end());
    multi.region_boundaries.emplace_back(start, static_cast<int>(multi.token_ids.size()));
    if (i + 1 < encodings.size()) multi.token_ids.push_back(Vocabulary::kConcatId);
  }
  multi.token_ids.push_back(Vocabulary::kEosId);
  out.push_back(std::move(multi));
  return out;
}

ExplainEncoding encode_explain(const MolGraph& g, const std::vector<Vocabulary>& vocabs) {
  CanonContext ctx = make_canon_context(g);
  std::vector<ScaleEncoding> encodings = encode_all_scales(ctx, vocabs, true);

  ExplainEncoding out;
  out.token_ids.push_back(Vocabulary::kBosId);
  out.atom_sets.emplace_back();
  for (size_t i = 0; i < encodings.size(); ++i) {
    int start = static_cast<int>(out.token_ids.size());
    for (size_t t = 0; t < encodings[i].ids.size(); ++t) {
      out.token_ids.push_back(encodings[i].ids[t]);
      std::vector<int> orig;
      orig.reserve(encodings[i].atom_sets[t].size());
      for (int rank : encodings[i].atom_sets[t]) orig.push_back(ctx.orig_of_rank[rank]);
      std::sort(orig.begin(), orig.end());
      out.atom_sets.push_back(std::move(orig));
    }
    out.region_boundaries.emplace_back(start, static_cast<int>(out.token_ids.size()));
    if (i + 1 < encodings.size()) {
      out.token_ids.push_back(Vocabulary::kConcatId);
      out.atom_sets.emplace_back();
    }
  }
  out.token_ids.push_back(Vocabulary::kEosId);
  out.atom_sets.emplace_back();
  return out;
}

}  // namespace cams
