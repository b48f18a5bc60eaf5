#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flattri/symx/expr.hpp"

namespace flattri::symx {

/// The set of names an expression may refer to.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& names);
  static Vocabulary from_symbols(const Symbols& symbols);

  /// Accepts any identifier (used by tests and the REPL-style helpers).
  static Vocabulary open();

  void add(const std::string& name);
  bool declares(std::string_view name) const;
  bool is_open() const noexcept { return open_; }

 private:
  std::unordered_map<std::string, Symbol> names_;
  bool open_ = false;
};

/// Parses `text`. Errors carry a 1-based column; `line` is copied into them
/// so that file loaders can report positions.
Expr parse(std::string_view text, const Vocabulary& vocabulary, std::size_t line = 0);

/// True when `name` is a valid identifier for the grammar.
bool is_identifier(std::string_view name);

}  // namespace flattri::symx
