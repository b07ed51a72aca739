#pragma once

#include <filesystem>
#include <iosfwd>

#include "distlab/nn.hpp"

namespace distlab {

// Binary checkpoint container:
//   "DFCK1"
//   u64 n_dims, then n_dims x u64 layer dims
//   per layer: weights (row-major) then bias, as f64
// All integers and floats little-endian.
void write_checkpoint(std::ostream& out, const MlpModel& model);
MlpModel read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace distlab
