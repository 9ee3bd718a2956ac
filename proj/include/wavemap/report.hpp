#pragma once

#include <string>

namespace wavemap::report {

// Creates `dir` and its parents when missing.
void ensure_directory(const std::string& dir);

// Writes `content` to `path` via a temporary sibling and an atomic rename.
void write_atomic(const std::string& path, const std::string& content);

// JSON object describing the dyadic ladder and the exponent-pair families
// used by the norms, for embedding in reports.
std::string families_json(int n, int N);

}  // namespace wavemap::report
