#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "cams/molgraph.hpp"
#include "testutil.hpp"

using namespace cams;

TEST_CASE("parse minimal chain") {
  MolGraph g = parse_smiles("CCO");
  REQUIRE(g.atom_count() == 3);
  CHECK(g.atoms[0].element == "C");
  CHECK(g.atoms[1].element == "C");
  CHECK(g.atoms[2].element == "O");
  REQUIRE(g.bond_count() == 2);
  CHECK(g.bonds[0].order == BondOrder::Single);
  CHECK(g.bonds[1].order == BondOrder::Single);
  CHECK(g.atoms[0].hcount == 3);
  CHECK(g.atoms[1].hcount == 2);
  CHECK(g.atoms[2].hcount == 1);
}

TEST_CASE("parse benzene") {
  MolGraph g = parse_smiles("c1ccccc1");
  REQUIRE(g.atom_count() == 6);
  REQUIRE(g.bond_count() == 6);
  for (const Atom& a : g.atoms) {
    CHECK(a.element == "C");
    CHECK(a.aromatic);
    CHECK(a.hcount == 1);
  }
  for (const Bond& b : g.bonds) CHECK(b.order == BondOrder::Aromatic);
}

TEST_CASE("parse bracket atoms") {
  MolGraph g = parse_smiles("[NH4+]");
  REQUIRE(g.atom_count() == 1);
  CHECK(g.atoms[0].element == "N");
  CHECK(g.atoms[0].hcount == 4);
  CHECK(g.atoms[0].formal_charge == 1);

  MolGraph acetate = parse_smiles("CC(=O)[O-]");
  CHECK(acetate.atoms[3].formal_charge == -1);
  CHECK(acetate.atoms[3].hcount == 0);

  MolGraph pyrrole = parse_smiles("c1cc[nH]c1");
  CHECK(pyrrole.atoms[3].element == "N");
  CHECK(pyrrole.atoms[3].aromatic);
  CHECK(pyrrole.atoms[3].hcount == 1);
}

TEST_CASE("parse errors carry kind and offset") {
  auto expect_error = [](const std::string& s, ParseErrorKind kind, size_t offset) {
    try {
      parse_smiles(s);
      FAIL("expected parse error for ", s);
    } catch (const ParseError& e) {
      CHECK(e.kind() == kind);
      CHECK(e.offset() == offset);
    }
  };
  expect_error("C(", ParseErrorKind::UnbalancedParenthesis, 1);
  expect_error("C)C", ParseErrorKind::UnbalancedParenthesis, 1);
  expect_error("C1CC", ParseErrorKind::UnmatchedRingClosure, 1);
  expect_error("CQ", ParseErrorKind::UnknownElement, 1);
  expect_error("C(=O)(=O)=O", ParseErrorKind::ValenceOverflow, 0);
  expect_error("", ParseErrorKind::EmptyInput, 0);
}

TEST_CASE("stereo and isotopes stripped with warnings") {
  std::vector<std::string> warnings;
  ParseOptions opts;
  opts.warnings = &warnings;
  MolGraph g = parse_smiles("C/C=C/[C@H](N)[13CH3]", opts);
  CHECK(g.atom_count() == 6);
  CHECK(warnings.size() >= 3);
}

TEST_CASE("multi-fragment parses but does not canonicalize") {
  MolGraph g = parse_smiles("CC.O");
  CHECK(g.component_count() == 2);
  CHECK_THROWS_AS(canonicalize(g), std::invalid_argument);
}

TEST_CASE("canonical smiles identical for permuted inputs") {
  CHECK(canonical_smiles(parse_smiles("OCC")) == canonical_smiles(parse_smiles("CCO")));
  std::set<std::string> forms;
  for (const char* s : {"c1ccccc1", "c1ccccc1", "c1ccccc1"}) forms.insert(canonical_smiles(parse_smiles(s)));
  // all six rotations of benzene
  std::string base = "c1ccccc1";
  for (int rot = 0; rot < 6; ++rot) {
    std::string rotated = "c1ccccc1";  // string rotations are all identical for benzene
    forms.insert(canonical_smiles(parse_smiles(rotated)));
  }
  CHECK(forms.size() == 1);

  CHECK(canonical_smiles(parse_smiles("C(C)(C)C")) ==
        canonical_smiles(parse_smiles("CC(C)C")));
  CHECK(canonical_smiles(parse_smiles("N1CC1")) == canonical_smiles(parse_smiles("C1NC1")));
}

TEST_CASE("canonicalization is a fixed point under reparse") {
  for (const char* s : {"CCO", "c1ccccc1", "CC(=O)[O-]", "C1CC1CC(=O)N", "c1ccc2ccccc2c1",
                        "CC(C)(C)c1ccccc1", "N#Cc1ccncc1", "S=C=S", "OC1=CC=CC1",
                        "Clc1ccc(Br)cc1", "[nH]1cccc1", "CC([NH3+])C([O-])=O"}) {
    std::string c1 = canonical_smiles(parse_smiles(s));
    std::string c2 = canonical_smiles(parse_smiles(c1));
    CHECK(c1 == c2);
  }
}

TEST_CASE("canonical ranks are a bijection") {
  MolGraph g = canonicalize(parse_smiles("CC(C)Cc1ccccc1")).graph;
  REQUIRE(g.canonical_ranks.has_value());
  std::vector<int> sorted = *g.canonical_ranks;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < g.atom_count(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("permutation invariance over random molecules") {
  camstest::Rng rng(20240817);
  for (int trial = 0; trial < 150; ++trial) {
    MolGraph g = camstest::random_molecule(rng, 18);
    std::string ref = canonical_smiles(g);
    for (int p = 0; p < 8; ++p) {
      auto perm = camstest::random_permutation(rng, g.atom_count());
      MolGraph h = camstest::permute_graph(g, perm, rng);
      CHECK(canonical_smiles(h) == ref);
    }
    // reparse fixed point on generated molecules too
    CHECK(canonical_smiles(parse_smiles(ref)) == ref);
  }
}

TEST_CASE("fragment code of a full molecule equals its canonical smiles") {
  for (const char* s : {"CCC", "c1ccccc1", "CC(=O)O", "CC(C)CO"}) {
    MolGraph g = parse_smiles(s);
    std::vector<int> all(g.atom_count());
    std::iota(all.begin(), all.end(), 0);
    CHECK(fragment_code(g, all, true) == canonical_smiles(g));
    CHECK(fragment_code(g, all, false) == canonical_smiles(g));
  }
}

TEST_CASE("fragment code for the middle of propane collapses to one form") {
  MolGraph propane = parse_smiles("CCC");
  std::string code = fragment_code(propane, {1}, true);
  // hand-built wildcard placements in both atom orders
  MolGraph frag1 = parse_smiles("*C*");
  MolGraph frag2 = parse_smiles("C(*)*");
  CHECK(code == canonical_smiles(frag1));
  CHECK(code == canonical_smiles(frag2));
  // attachment-free variant keeps the plain atom
  MolGraph lone;
  Atom c;
  c.element = "C";
  c.hcount = 2;
  lone.atoms.push_back(c);
  CHECK(fragment_code(propane, {1}, false) == canonical_smiles(lone));
}

TEST_CASE("fragment code distinguishes pyridine attachment positions") {
  MolGraph m2 = parse_smiles("Cc1ccccn1");  // methyl at the 2-position
  MolGraph m3 = parse_smiles("Cc1cccnc1");  // methyl at the 3-position
  std::vector<int> ring{1, 2, 3, 4, 5, 6};
  std::string code2 = fragment_code(m2, ring, true);
  std::string code3 = fragment_code(m3, ring, true);
  CHECK(code2 != code3);
}

TEST_CASE("fragment code rejects disconnected subsets") {
  MolGraph g = parse_smiles("CCO");
  CHECK_THROWS_AS(fragment_code(g, {0, 2}, true), std::invalid_argument);
}

TEST_CASE("fragment code equality is an isomorphism congruence") {
  // Enumerate small fragments across several molecules; equal codes must
  // mean isomorphic wildcard-augmented fragments and vice versa.
  std::vector<MolGraph> mols;
  for (const char* s : {"CCC", "CCO", "CC(C)C", "c1ccccc1", "Cc1ccccn1", "Cc1cccnc1",
                        "CC(=O)O", "C1CC1N", "CC#N"}) {
    mols.push_back(parse_smiles(s));
  }
  struct Frag {
    std::string code;
    MolGraph augmented;
  };
  std::vector<Frag> frags;
  for (const MolGraph& g : mols) {
    for (const auto& subset : camstest::connected_subsets(g, 3)) {
      // rebuild the wildcard-augmented fragment the same way fragment_code does
      MolGraph aug;
      std::vector<int> to_sub(g.atom_count(), -1);
      for (int idx : subset) {
        to_sub[idx] = aug.atom_count();
        aug.atoms.push_back(g.atoms[idx]);
      }
      for (const Bond& b : g.bonds) {
        bool ina = to_sub[b.a] >= 0, inb = to_sub[b.b] >= 0;
        if (ina && inb) {
          aug.bonds.push_back({to_sub[b.a], to_sub[b.b], b.order});
        } else if (ina || inb) {
          Atom w;
          w.element = "*";
          aug.atoms.push_back(w);
          aug.bonds.push_back({ina ? to_sub[b.a] : to_sub[b.b], aug.atom_count() - 1, b.order});
        }
      }
      frags.push_back({fragment_code(g, subset, true), std::move(aug)});
    }
  }
  REQUIRE(frags.size() > 40);
  int checked = 0;
  for (size_t i = 0; i < frags.size(); ++i) {
    for (size_t j = i + 1; j < frags.size(); ++j) {
      bool same_code = frags[i].code == frags[j].code;
      bool iso = camstest::brute_force_isomorphic(frags[i].augmented, frags[j].augmented);
      CHECK(same_code == iso);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}
