#include "cams/simil.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "cams/vocab.hpp"

namespace cams {

int FingerprintBits::popcount() const {
  int n = 0;
  for (uint64_t w : words) n += std::popcount(w);
  return n;
}

FingerprintBits circular_fingerprint(const MolGraph& g, int radius, int nbits) {
  if (nbits <= 0 || (nbits & (nbits - 1)) != 0) {
    throw std::invalid_argument("circular_fingerprint: nbits must be a power of two");
  }
  if (radius < 0) throw std::invalid_argument("circular_fingerprint: negative radius");

  FingerprintBits fp;
  fp.nbits = nbits;
  fp.radius = radius;
  fp.words.assign(static_cast<size_t>(std::max(nbits, 64)) / 64, 0);

  auto adj = g.adjacency();
  int n = g.atom_count();
  std::vector<int> dist(n);
  for (int center = 0; center < n; ++center) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[center] = 0;
    std::vector<int> frontier{center};
    std::vector<int> ball{center};
    for (int r = 0; r <= radius; ++r) {
      std::string code = fragment_code(g, ball, false);
      fp.set(static_cast<int>(fnv1a64(code) % static_cast<uint64_t>(nbits)));
      if (r == radius) break;
      std::vector<int> next;
      for (int u : frontier) {
        for (int v : adj[u]) {
          if (dist[v] < 0) {
            dist[v] = r + 1;
            next.push_back(v);
            ball.push_back(v);
          }
        }
      }
      if (next.empty()) break;  // ball saturated, larger radii repeat the code
      frontier = std::move(next);
    }
  }
  return fp;
}

double tanimoto(const FingerprintBits& a, const FingerprintBits& b) {
  if (a.nbits != b.nbits) {
    throw std::invalid_argument("tanimoto: fingerprint widths differ");
  }
  int64_t inter = 0;
  int64_t uni = 0;
  for (size_t i = 0; i < a.words.size(); ++i) {
    inter += std::popcount(a.words[i] & b.words[i]);
    uni += std::popcount(a.words[i] | b.words[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MolGraph murcko_scaffold(const MolGraph& g) {
  int n = g.atom_count();
  std::vector<bool> kept(n, true);
  std::vector<bool> lost_neighbor(n, false);

  for (;;) {
    std::vector<int> degree(n, 0);
    for (const Bond& b : g.bonds) {
      if (kept[b.a] && kept[b.b]) {
        ++degree[b.a];
        ++degree[b.b];
      }
    }
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      if (kept[i] && degree[i] <= 1) {
        kept[i] = false;
        changed = true;
      }
    }
    if (!changed) break;
    for (const Bond& b : g.bonds) {
      if (kept[b.a] != kept[b.b]) lost_neighbor[kept[b.a] ? b.a : b.b] = true;
    }
  }

  MolGraph out;
  std::vector<int> remap(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!kept[i]) continue;
    remap[i] = out.atom_count();
    out.atoms.push_back(g.atoms[i]);
  }
  for (const Bond& b : g.bonds) {
    if (kept[b.a] && kept[b.b]) out.bonds.push_back({remap[b.a], remap[b.b], b.order});
  }
  for (int i = 0; i < n; ++i) {
    if (kept[i] && lost_neighbor[i]) {
      int h = default_hcount(out, remap[i]);
      out.atoms[remap[i]].hcount = h < 0 ? 0 : h;
    }
  }
  return out;
}

double levenshtein_similarity(const std::string& s1, const std::string& s2) {
  size_t n = s1.size();
  size_t m = s2.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<size_t> prev(m + 1);
  std::vector<size_t> cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      size_t sub = prev[j - 1] + (s1[i - 1] == s2[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  double dist = static_cast<double>(prev[m]);
  return 1.0 - dist / static_cast<double>(std::max(n, m));
}

}  // namespace cams
