#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bnexplain/network.hpp"

namespace bnexplain {

/// Reads the discrete subset of BIF 0.3: `network`, `variable` blocks with
/// `type discrete`, and `probability` blocks using `table`, per-row
/// `(parent states) values;` entries or `default`. Names may be bare
/// identifiers or double-quoted strings (for labels containing spaces).
///
/// A `table` on a block with parents lists values child-state-major, parent
/// configurations varying with the last parent fastest.
///
/// Syntax errors report line and column; semantic errors name the block.
BayesianNetwork parse_bif(std::string_view text, std::string fallback_name = "network");

/// Loads a file; a missing or "unknown" network name falls back to the file stem.
BayesianNetwork load_bif_file(const std::filesystem::path& path);

/// Serializes with full double precision so that parse_bif(write_bif(bn)) == bn.
std::string write_bif(const BayesianNetwork& bn);

}  // namespace bnexplain
