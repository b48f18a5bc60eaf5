#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flattri/flatness/system.hpp"

namespace flattri::cli {

/// `old -> fresh = definition`: introduces `fresh` in place of `old`.
struct CoordChangeEntry {
  symx::Symbol old;
  symx::Symbol fresh;
  symx::Expr definition;
};

struct SystemFile {
  flatness::AffineSystem system;
  std::vector<symx::Expr> flat_output;
  std::vector<CoordChangeEntry> coord_change;
};

/// Line-oriented `key: value` text; lists are bracketed and may span lines.
SystemFile parse_system(std::string_view text, const std::string& default_name = "system");
SystemFile load_system(const std::string& path);

/// Renders a system in the same format, so the output re-loads.
std::string format_system(const flatness::AffineSystem& sys);

}  // namespace flattri::cli
