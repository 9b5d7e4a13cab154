#include "cams/molgraph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <unordered_map>

namespace cams {

std::vector<std::vector<int>> MolGraph::adjacency() const {
  std::vector<std::vector<int>> adj(atoms.size());
  for (const Bond& b : bonds) {
    adj[b.a].push_back(b.b);
    adj[b.b].push_back(b.a);
  }
  return adj;
}

std::vector<std::vector<int>> MolGraph::incidence() const {
  std::vector<std::vector<int>> inc(atoms.size());
  for (int i = 0; i < bond_count(); ++i) {
    inc[bonds[i].a].push_back(i);
    inc[bonds[i].b].push_back(i);
  }
  return inc;
}

int MolGraph::component_count() const {
  if (atoms.empty()) return 0;
  std::vector<int> comp(atoms.size(), -1);
  auto adj = adjacency();
  int n_comp = 0;
  std::vector<int> stack;
  for (int start = 0; start < atom_count(); ++start) {
    if (comp[start] >= 0) continue;
    stack.push_back(start);
    comp[start] = n_comp;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (comp[v] < 0) {
          comp[v] = n_comp;
          stack.push_back(v);
        }
      }
    }
    ++n_comp;
  }
  return n_comp;
}

const std::vector<int>& typical_valences(const std::string& element) {
  static const std::map<std::string, std::vector<int>> table = {
      {"B", {3}},  {"C", {4}},        {"N", {3, 5}}, {"O", {2}},
      {"P", {3, 5}}, {"S", {2, 4, 6}}, {"F", {1}},    {"Cl", {1}},
      {"Br", {1}}, {"I", {1}},
  };
  static const std::vector<int> none;
  auto it = table.find(element);
  return it == table.end() ? none : it->second;
}

bool is_supported_element(const std::string& element) {
  return element == "*" || !typical_valences(element).empty();
}

bool is_aromatic_capable(const std::string& element) {
  return element == "B" || element == "C" || element == "N" ||
         element == "O" || element == "P" || element == "S";
}

int valence_sum(const MolGraph& g, int atom_idx) {
  int sum = 0;
  bool any_aromatic = false;
  for (const Bond& b : g.bonds) {
    if (b.a != atom_idx && b.b != atom_idx) continue;
    switch (b.order) {
      case BondOrder::Single: sum += 1; break;
      case BondOrder::Double: sum += 2; break;
      case BondOrder::Triple: sum += 3; break;
      case BondOrder::Aromatic:
        sum += 1;
        any_aromatic = true;
        break;
    }
  }
  if (g.atoms[atom_idx].aromatic || any_aromatic) sum += 1;
  return sum;
}

int default_hcount(const MolGraph& g, int atom_idx) {
  const Atom& a = g.atoms[atom_idx];
  if (a.is_wildcard()) return 0;
  int sum = valence_sum(g, atom_idx);
  for (int v : typical_valences(a.element)) {
    if (sum <= v) return v - sum;
  }
  return -1;
}

namespace {

struct RingClosure {
  int atom = -1;
  std::optional<BondOrder> order;
  size_t offset = 0;
};

struct Parser {
  const std::string& text;
  const ParseOptions& opts;
  size_t pos = 0;
  MolGraph g;
  // Offsets of bare organic-subset atoms, for valence diagnostics.
  std::vector<std::pair<int, size_t>> bare_atoms;
  std::vector<bool> explicit_h;  // per atom: hcount fixed by brackets

  explicit Parser(const std::string& t, const ParseOptions& o) : text(t), opts(o) {}

  void warn(const std::string& msg) {
    if (opts.warnings) opts.warnings->push_back(msg);
  }

  [[noreturn]] void fail(ParseErrorKind kind, size_t at, const std::string& msg) {
    throw ParseError(kind, at, msg);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  int add_atom(Atom a) {
    g.atoms.push_back(std::move(a));
    explicit_h.push_back(false);
    return g.atom_count() - 1;
  }

  void add_bond(int a, int b, BondOrder order, size_t at) {
    if (a == b) fail(ParseErrorKind::BadSyntax, at, "self-bond");
    for (const Bond& existing : g.bonds) {
      if ((existing.a == a && existing.b == b) || (existing.a == b && existing.b == a)) {
        fail(ParseErrorKind::BadSyntax, at, "duplicate bond between atoms");
      }
    }
    g.bonds.push_back({a, b, order});
  }

  BondOrder resolve_order(std::optional<BondOrder> explicit_order, int a, int b) {
    if (explicit_order) return *explicit_order;
    if (g.atoms[a].aromatic && g.atoms[b].aromatic) return BondOrder::Aromatic;
    return BondOrder::Single;
  }

  // One- or two-letter element at pos, organic subset only.
  std::string read_bare_element() {
    size_t at = pos;
    char c = text[pos];
    if (c == '*') {
      ++pos;
      return "*";
    }
    if (c == 'C' && pos + 1 < text.size() && text[pos + 1] == 'l') {
      pos += 2;
      return "Cl";
    }
    if (c == 'B' && pos + 1 < text.size() && text[pos + 1] == 'r') {
      pos += 2;
      return "Br";
    }
    static const std::string uppers = "BCNOPSFI";
    static const std::string lowers = "bcnops";
    if (uppers.find(c) != std::string::npos) {
      ++pos;
      return std::string(1, c);
    }
    if (lowers.find(c) != std::string::npos) {
      ++pos;
      return std::string(1, c);
    }
    fail(ParseErrorKind::UnknownElement, at,
         std::string("unknown element symbol '") + c + "'");
  }

  int parse_bracket_atom() {
    size_t open_at = pos;
    ++pos;  // consume '['
    Atom atom;
    // isotope prefix: stripped
    size_t iso_start = pos;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
    if (pos > iso_start) warn("isotope label ignored at offset " + std::to_string(iso_start));

    if (eof()) fail(ParseErrorKind::BadSyntax, open_at, "unterminated bracket atom");
    size_t elem_at = pos;
    char c = peek();
    if (c == '*') {
      atom.element = "*";
      ++pos;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      ++pos;
      if (!eof() && std::islower(static_cast<unsigned char>(peek())) && peek() != 'h') {
        // two-letter candidate; only accept if it names a supported element
        std::string two = sym + peek();
        if (is_supported_element(two)) {
          sym = two;
          ++pos;
        }
      }
      if (!is_supported_element(sym)) {
        fail(ParseErrorKind::UnknownElement, elem_at, "unknown element symbol '" + sym + "'");
      }
      atom.element = sym;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      std::string sym(1, std::toupper(static_cast<unsigned char>(c)));
      ++pos;
      if (!is_supported_element(sym) || !is_aromatic_capable(sym)) {
        fail(ParseErrorKind::UnknownElement, elem_at,
             std::string("unknown aromatic element symbol '") + c + "'");
      }
      atom.element = sym;
      atom.aromatic = true;
    } else {
      fail(ParseErrorKind::BadSyntax, pos, "expected element symbol in bracket atom");
    }

    // chirality: stripped
    while (!eof() && peek() == '@') {
      ++pos;
      warn("stereo marker ignored at offset " + std::to_string(pos - 1));
    }
    // explicit hydrogens
    int h = 0;
    bool has_h = false;
    if (!eof() && peek() == 'H') {
      ++pos;
      has_h = true;
      h = 1;
      size_t digits = 0;
      int val = 0;
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
        val = val * 10 + (peek() - '0');
        ++pos;
        ++digits;
      }
      if (digits > 0) h = val;
    }
    atom.hcount = h;
    // charge
    if (!eof() && (peek() == '+' || peek() == '-')) {
      char sign = peek();
      int unit = sign == '+' ? 1 : -1;
      int charge = 0;
      while (!eof() && peek() == sign) {
        charge += unit;
        ++pos;
      }
      if (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
        int mag = 0;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
          mag = mag * 10 + (peek() - '0');
          ++pos;
        }
        charge = unit * mag;
      }
      atom.formal_charge = charge;
    }
    // atom map: stripped
    if (!eof() && peek() == ':') {
      size_t map_at = pos;
      ++pos;
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
      warn("atom map ignored at offset " + std::to_string(map_at));
    }
    if (eof() || peek() != ']') {
      fail(ParseErrorKind::BadSyntax, open_at, "unterminated bracket atom");
    }
    ++pos;  // consume ']'
    int idx = add_atom(std::move(atom));
    explicit_h[idx] = true;
    (void)has_h;
    return idx;
  }

  MolGraph run() {
    if (text.empty()) fail(ParseErrorKind::EmptyInput, 0, "empty SMILES");

    // (previous atom, paren open offset) frames
    std::vector<std::pair<int, size_t>> branch_stack;
    std::unordered_map<int, RingClosure> ring_map;
    int prev = -1;
    std::optional<BondOrder> pending_order;
    size_t pending_order_at = 0;

    auto attach = [&](int atom_idx, size_t at) {
      if (prev >= 0) {
        add_bond(prev, atom_idx, resolve_order(pending_order, prev, atom_idx), at);
      } else if (pending_order) {
        fail(ParseErrorKind::BadSyntax, pending_order_at, "bond symbol without preceding atom");
      }
      pending_order.reset();
      prev = atom_idx;
    };

    auto handle_ring_digit = [&](int digit, size_t at) {
      if (prev < 0) fail(ParseErrorKind::BadSyntax, at, "ring closure before any atom");
      auto it = ring_map.find(digit);
      if (it == ring_map.end()) {
        ring_map[digit] = RingClosure{prev, pending_order, at};
      } else {
        RingClosure rc = it->second;
        ring_map.erase(it);
        std::optional<BondOrder> order;
        if (rc.order && pending_order && *rc.order != *pending_order) {
          fail(ParseErrorKind::BadSyntax, at, "conflicting ring-closure bond orders");
        }
        order = rc.order ? rc.order : pending_order;
        add_bond(rc.atom, prev, resolve_order(order, rc.atom, prev), at);
      }
      pending_order.reset();
    };

    while (!eof()) {
      char c = peek();
      size_t at = pos;
      if (c == '(') {
        if (prev < 0) fail(ParseErrorKind::UnbalancedParenthesis, at, "branch before any atom");
        branch_stack.emplace_back(prev, at);
        ++pos;
      } else if (c == ')') {
        if (branch_stack.empty()) {
          fail(ParseErrorKind::UnbalancedParenthesis, at, "unbalanced parenthesis");
        }
        prev = branch_stack.back().first;
        branch_stack.pop_back();
        ++pos;
      } else if (c == '-' || c == '=' || c == '#' || c == ':') {
        if (pending_order) fail(ParseErrorKind::BadSyntax, at, "repeated bond symbol");
        switch (c) {
          case '-': pending_order = BondOrder::Single; break;
          case '=': pending_order = BondOrder::Double; break;
          case '#': pending_order = BondOrder::Triple; break;
          case ':': pending_order = BondOrder::Aromatic; break;
        }
        pending_order_at = at;
        ++pos;
      } else if (c == '/' || c == '\\') {
        warn("stereo bond ignored at offset " + std::to_string(at));
        if (!pending_order) {
          pending_order = BondOrder::Single;
          pending_order_at = at;
        }
        ++pos;
      } else if (c == '.') {
        if (pending_order) fail(ParseErrorKind::BadSyntax, at, "bond symbol before fragment separator");
        prev = -1;
        ++pos;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        handle_ring_digit(c - '0', at);
        ++pos;
      } else if (c == '%') {
        if (pos + 2 >= text.size() ||
            !std::isdigit(static_cast<unsigned char>(text[pos + 1])) ||
            !std::isdigit(static_cast<unsigned char>(text[pos + 2]))) {
          fail(ParseErrorKind::BadSyntax, at, "malformed %nn ring closure");
        }
        handle_ring_digit((text[pos + 1] - '0') * 10 + (text[pos + 2] - '0'), at);
        pos += 3;
      } else if (c == '[') {
        int idx = parse_bracket_atom();
        attach(idx, at);
      } else if (c == '*' || std::isalpha(static_cast<unsigned char>(c))) {
        std::string sym = read_bare_element();
        Atom atom;
        if (sym != "*" && std::islower(static_cast<unsigned char>(c))) {
          atom.element = sym;
          atom.element[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sym[0])));
          atom.aromatic = true;
        } else {
          atom.element = sym;
        }
        int idx = add_atom(std::move(atom));
        bare_atoms.emplace_back(idx, at);
        attach(idx, at);
      } else {
        fail(ParseErrorKind::BadSyntax, at, std::string("unexpected character '") + c + "'");
      }
    }

    if (!branch_stack.empty()) {
      fail(ParseErrorKind::UnbalancedParenthesis, branch_stack.back().second,
           "unbalanced parenthesis");
    }
    if (!ring_map.empty()) {
      size_t first = text.size();
      for (const auto& [digit, rc] : ring_map) first = std::min(first, rc.offset);
      fail(ParseErrorKind::UnmatchedRingClosure, first, "unmatched ring-closure digit");
    }
    if (pending_order) {
      fail(ParseErrorKind::BadSyntax, pending_order_at, "dangling bond symbol");
    }
    if (g.atoms.empty()) fail(ParseErrorKind::EmptyInput, 0, "no atoms in SMILES");

    // implicit hydrogen fill + valence check for bare atoms
    for (const auto& [idx, at] : bare_atoms) {
      int h = default_hcount(g, idx);
      if (h < 0) {
        fail(ParseErrorKind::ValenceOverflow, at,
             "valence overflow on atom '" + g.atoms[idx].element + "'");
      }
      g.atoms[idx].hcount = h;
    }
    return g;
  }
};

}  // namespace

MolGraph parse_smiles(const std::string& text, const ParseOptions& opts) {
  Parser p(text, opts);
  return p.run();
}

}  // namespace cams
