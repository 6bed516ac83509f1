#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "torus/grid.hpp"

namespace mfg {

/// Flat binary snapshot: u32 dim, u32 M, then M^dim little-endian doubles
/// (row-major). A path is a sequence of snapshots in one file.
void write_snapshot(const std::string& path, const Field& f);
void write_snapshots(const std::string& path, const std::vector<Field>& fields);
std::vector<Field> read_snapshots(const std::string& path);

/// CSV with index columns (i or i,j) and a value column, preceded by a
/// comment line carrying the config hash when non-empty.
void write_field_csv(const std::string& path, const Field& f, const std::string& config_hash = "");

}  // namespace mfg
