#pragma once

#include <string>
#include <vector>

#include "wavemap/fields.hpp"

namespace wavemap {

// Binary snapshot "GWF1": magic, u32 n, u32 N, f64 L, u32 array count, then
// `count` row-major arrays of N^n little-endian f64 values.
struct Snapshot {
  int n = 0;
  int N = 0;
  double L = 1.0;
  std::vector<RealArray> arrays;
};

// Written to a temporary file and renamed into place.
void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

// Three arrays per field, in field order.
Snapshot snapshot_of(const std::vector<LieAlgebraField>& fields);
// Inverse of snapshot_of; the array count must be a multiple of 3.
std::vector<LieAlgebraField> fields_of(const Snapshot& snap);

}  // namespace wavemap
