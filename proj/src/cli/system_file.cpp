#include "flattri/cli/system_file.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flattri/errors.hpp"
#include "flattri/symx/parse.hpp"

namespace flattri::cli {

using symx::Expr;
using symx::Symbol;

namespace {

struct Pos {
  std::size_t line;
  std::size_t column;
};

// A value with the source position of every character.
struct Text {
  std::string chars;
  std::vector<Pos> pos;

  void append(std::string_view s, std::size_t line, std::size_t column) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      chars.push_back(s[i]);
      pos.push_back({line, column + i});
    }
  }
  Pos at(std::size_t i) const { return i < pos.size() ? pos[i] : (pos.empty() ? Pos{0, 1} : pos.back()); }
};

struct Entry {
  std::string key;
  Pos where;
  Text value;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

int bracket_depth(std::string_view s) {
  int d = 0;
  for (char c : s) {
    if (c == '[') ++d;
    if (c == ']') --d;
  }
  return d;
}

std::vector<Entry> split_entries(std::string_view text) {
  std::vector<Entry> out;
  std::size_t line_no = 0, start = 0;
  int depth = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (depth > 0) {
      out.back().value.append("\n", line_no, 0);
      out.back().value.append(line, line_no, 1);
      depth += bracket_depth(line);
    } else {
      std::size_t first = 0;
      while (first < line.size() && is_space(line[first])) ++first;
      if (first < line.size()) {
        std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) throw ParseError("expected 'key: value'", line_no, first + 1);
        Entry e;
        std::string_view key = line.substr(first, colon - first);
        while (!key.empty() && is_space(key.back())) key.remove_suffix(1);
        e.key = std::string(key);
        e.where = {line_no, first + 1};
        e.value.append(line.substr(colon + 1), line_no, colon + 2);
        depth = bracket_depth(line.substr(colon + 1));
        out.push_back(std::move(e));
      }
    }
    if (depth < 0) throw ParseError("unbalanced ']'", line_no, 1);
    if (end == text.size()) break;
    start = end + 1;
  }
  if (depth > 0) throw ParseError("unterminated '['", out.back().where.line, out.back().where.column);
  return out;
}

struct Item {
  std::string text;
  Pos where;
};

Item trimmed(const Text& t, std::size_t b, std::size_t e) {
  while (b < e && is_space(t.chars[b])) ++b;
  while (e > b && is_space(t.chars[e - 1])) --e;
  return {t.chars.substr(b, e - b), t.at(b)};
}

Item scalar(const Entry& e) { return trimmed(e.value, 0, e.value.chars.size()); }

std::vector<Item> list(const Entry& e) {
  const Text& t = e.value;
  std::size_t b = 0, end = t.chars.size();
  while (b < end && is_space(t.chars[b])) ++b;
  while (end > b && is_space(t.chars[end - 1])) --end;
  if (b == end || t.chars[b] != '[' || t.chars[end - 1] != ']') {
    Pos p = t.at(b);
    throw ParseError("expected a bracketed list for '" + e.key + "'", p.line, p.column);
  }
  std::vector<Item> items;
  int depth = 0;
  std::size_t item_start = b + 1;
  const std::size_t close = end - 1;
  for (std::size_t i = b + 1; i <= close; ++i) {
    const bool last = i == close;
    const char c = t.chars[i];
    if (!last && (c == '(' || c == '[')) ++depth;
    if (!last && (c == ')' || c == ']')) --depth;
    if (last || (c == ',' && depth == 0)) {
      Item it = trimmed(t, item_start, i);
      if (it.text.empty()) {
        if (last && items.empty()) break;  // "[]"
        throw ParseError("empty list element in '" + e.key + "'", it.where.line, it.where.column);
      }
      items.push_back(std::move(it));
      item_start = i + 1;
    }
  }
  return items;
}

Expr parse_item(const Item& it, const symx::Vocabulary& vocab) {
  // Left padding makes parser columns match the file.
  std::string padded(it.where.column > 0 ? it.where.column - 1 : 0, ' ');
  padded += it.text;
  return symx::parse(padded, vocab, it.where.line);
}

std::vector<Symbol> identifiers(const Entry& e) {
  std::vector<Symbol> out;
  for (const auto& it : list(e)) {
    if (!symx::is_identifier(it.text)) {
      throw ParseError("'" + it.text + "' is not an identifier", it.where.line, it.where.column);
    }
    Symbol s(it.text);
    for (Symbol other : out) {
      if (other == s) throw ParseError("duplicate name '" + it.text + "'", it.where.line, it.where.column);
    }
    out.push_back(s);
  }
  return out;
}

geom::VectorField field(const Entry& e, const symx::Vocabulary& vocab, std::size_t n) {
  auto items = list(e);
  if (items.size() != n) {
    throw ParseError("'" + e.key + "' has " + std::to_string(items.size()) + " components for " +
                         std::to_string(n) + " states",
                     e.where.line, e.where.column);
  }
  fieldla::Vector v;
  for (const auto& it : items) v.push_back(parse_item(it, vocab));
  return geom::VectorField(std::move(v));
}

CoordChangeEntry coord_entry(const Item& it, const symx::Vocabulary& vocab) {
  auto arrow = it.text.find("->");
  auto eq = it.text.find('=');
  if (arrow == std::string::npos || eq == std::string::npos || eq < arrow) {
    throw ParseError("expected 'old -> new = expression'", it.where.line, it.where.column);
  }
  auto strip = [](std::string s) {
    while (!s.empty() && is_space(s.back())) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && is_space(s[b])) ++b;
    return s.substr(b);
  };
  std::string old = strip(it.text.substr(0, arrow));
  std::string fresh = strip(it.text.substr(arrow + 2, eq - arrow - 2));
  if (!symx::is_identifier(old) || !vocab.declares(old)) {
    throw UndeclaredIdentifier(old, it.where.line, it.where.column);
  }
  if (!symx::is_identifier(fresh)) {
    throw ParseError("'" + fresh + "' is not an identifier", it.where.line, it.where.column);
  }
  Item def{it.text.substr(eq + 1), {it.where.line, it.where.column + eq + 1}};
  return {Symbol(old), Symbol(fresh), parse_item(def, vocab)};
}

}  // namespace

SystemFile parse_system(std::string_view text, const std::string& default_name) {
  auto entries = split_entries(text);
  SystemFile out;
  out.system.name = default_name;
  const Entry *states = nullptr, *params = nullptr, *drift = nullptr, *flat = nullptr, *coord = nullptr;
  std::vector<const Entry*> inputs;
  for (const auto& e : entries) {
    auto once = [&](const Entry*& slot) {
      if (slot) throw ParseError("duplicate key '" + e.key + "'", e.where.line, e.where.column);
      slot = &e;
    };
    if (e.key == "name") {
      out.system.name = scalar(e).text;
    } else if (e.key == "states") {
      once(states);
    } else if (e.key == "params") {
      once(params);
    } else if (e.key == "drift") {
      once(drift);
    } else if (e.key.rfind("input", 0) == 0) {
      inputs.push_back(&e);
    } else if (e.key == "flat_output") {
      once(flat);
    } else if (e.key == "coord_change") {
      once(coord);
    } else {
      throw ParseError("unknown key '" + e.key + "'", e.where.line, e.where.column);
    }
  }
  if (!states) throw ParseError("missing 'states'", 0, 1);
  out.system.states = identifiers(*states);
  if (out.system.states.empty()) throw ParseError("no states declared", states->where.line, states->where.column);
  if (params) out.system.params = identifiers(*params);
  for (Symbol p : out.system.params) {
    for (Symbol s : out.system.states) {
      if (p == s) throw ParseError("'" + p.name() + "' declared as state and parameter", params->where.line, 1);
    }
  }
  symx::Symbols all = out.system.states;
  all.insert(all.end(), out.system.params.begin(), out.system.params.end());
  auto vocab = symx::Vocabulary::from_symbols(all);
  const std::size_t n = out.system.states.size();

  if (inputs.size() != 2) {
    const Entry* at = inputs.size() > 2 ? inputs[2] : (inputs.empty() ? states : inputs.back());
    throw ParseError("expected exactly two inputs, found " + std::to_string(inputs.size()), at->where.line,
                     at->where.column);
  }
  out.system.drift = drift ? field(*drift, vocab, n) : geom::VectorField::zero(n);
  out.system.b1 = field(*inputs[0], vocab, n);
  out.system.b2 = field(*inputs[1], vocab, n);
  if (flat) {
    for (const auto& it : list(*flat)) out.flat_output.push_back(parse_item(it, vocab));
    if (out.flat_output.size() > 2) {
      throw ParseError("flat_output takes at most two functions", flat->where.line, flat->where.column);
    }
  }
  if (coord) {
    auto step_vocab = vocab;
    for (const auto& it : list(*coord)) {
      out.coord_change.push_back(coord_entry(it, step_vocab));
      step_vocab.add(out.coord_change.back().fresh.name());
    }
  }
  return out;
}

SystemFile load_system(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str(), std::filesystem::path(path).stem().string());
}

std::string format_system(const flatness::AffineSystem& sys) {
  std::ostringstream os;
  auto names = [&](const symx::Symbols& s) {
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i].name();
    os << "]\n";
  };
  auto fld = [&](const char* key, const geom::VectorField& f) {
    std::string indent(std::string(key).size() + 3, ' ');
    os << key << ": [";
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? ",\n" + indent : "") << symx::to_string(f[i]);
    os << "]\n";
  };
  os << "name: " << sys.name << '\n';
  os << "states: ";
  names(sys.states);
  if (!sys.params.empty()) {
    os << "params: ";
    names(sys.params);
  }
  fld("drift", sys.drift);
  fld("input b1", sys.b1);
  fld("input b2", sys.b2);
  return os.str();
}

}  // namespace flattri::cli
