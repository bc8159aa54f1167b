#pragma once

#include <string>

#include "vpflow/grid.hpp"

namespace vpflow {

/// Field snapshot file: 64-byte header (magic "VPFLOW01", grid dims and
/// topology, cell sizes, time; little-endian) followed by row-major (x
/// fastest) little-endian float64 arrays in the order u, v, w faces, the five
/// S coordinates, pressure.
void write_snapshot(const std::string& path, const SimState& state);

/// Reads a snapshot written by write_snapshot; throws std::runtime_error on a
/// malformed file.
SimState read_snapshot(const std::string& path);

}  // namespace vpflow
