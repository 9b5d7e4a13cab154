#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cams {

enum class BondOrder : uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

// Heavy atom. hcount is the total attached hydrogen count, either taken
// from bracket notation or filled from the organic-subset valence table.
struct Atom {
  std::string element;   // "C", "Cl", ... or "*" for a wildcard attachment point
  int formal_charge = 0;
  int hcount = 0;
  bool aromatic = false;

  bool is_wildcard() const { return element == "*"; }
};

struct Bond {
  int a = -1;
  int b = -1;
  BondOrder order = BondOrder::Single;

  int other(int idx) const { return idx == a ? b : a; }
};

// Molecular graph. canonical_ranks, when present, maps atom index ->
// canonical rank (a permutation of 0..N-1) and is invariant under any
// relabeling of the input atoms.
struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::optional<std::vector<int>> canonical_ranks;

  int atom_count() const { return static_cast<int>(atoms.size()); }
  int bond_count() const { return static_cast<int>(bonds.size()); }

  std::vector<std::vector<int>> adjacency() const;  // neighbor atom indices
  std::vector<std::vector<int>> incidence() const;  // incident bond indices
  int component_count() const;
  bool connected() const { return component_count() <= 1; }
};

enum class ParseErrorKind {
  EmptyInput,
  UnbalancedParenthesis,
  UnmatchedRingClosure,
  UnknownElement,
  ValenceOverflow,
  BadSyntax,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, size_t offset, const std::string& what)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  ParseErrorKind kind() const { return kind_; }
  size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  size_t offset_;
};

struct ParseOptions {
  // Collects one message per stripped construct (stereo marks, isotopes,
  // atom maps). Parsing itself never depends on these.
  std::vector<std::string>* warnings = nullptr;
};

// Organic-subset SMILES parser. Supported: B C N O P S F Cl Br I (+ aromatic
// b c n o p s), bracket atoms with charge and explicit H, ring closures
// (1-9 and %nn), branches, bond symbols - = # :, wildcard *, and '.' for
// fragment separators. Stereo and isotopes are stripped with a warning.
MolGraph parse_smiles(const std::string& text, const ParseOptions& opts = {});

// Typical valences for the organic subset, smallest first.
const std::vector<int>& typical_valences(const std::string& element);
bool is_supported_element(const std::string& element);
bool is_aromatic_capable(const std::string& element);

// Bond order contribution used for implicit-H fill; aromatic bonds count 1
// each plus one extra unit for the aromatic system itself.
int valence_sum(const MolGraph& g, int atom_idx);
// Hydrogen count a bare (organic-subset) atom would receive at parse time
// given its current bonds, or -1 when every typical valence overflows.
int default_hcount(const MolGraph& g, int atom_idx);

struct CanonicalResult {
  MolGraph graph;          // input graph with canonical_ranks filled in
  std::string smiles;      // canonical SMILES, identical for any atom relabeling
};

// Deterministic Morgan-style canonicalization with branch-and-min tie
// resolution. Rejects multi-fragment inputs.
CanonicalResult canonicalize(const MolGraph& g);
std::string canonical_smiles(const MolGraph& g);

// Graph physically reordered so that atom index == canonical rank.
MolGraph relabel_to_ranks(const MolGraph& g, const std::vector<int>& ranks);

// Canonical code of the connected fragment induced by atom_subset. With
// with_connections, each bond crossing the subset boundary is replaced by a
// wildcard atom carrying the original bond order, so two fragments get equal
// codes iff topology, atom types and attachment configuration all match.
std::string fragment_code(const MolGraph& g, const std::vector<int>& atom_subset,
                          bool with_connections);

}  // namespace cams
