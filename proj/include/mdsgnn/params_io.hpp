#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdsgnn/matrix.hpp"

namespace mdsgnn {

// Flat checkpoint format, a sequence of entries until EOF:
//   u32 LE  name byte length
//   bytes   name (UTF-8)
//   u32 LE  rank
//   u32 LE  dims[rank]
//   f64 LE  values (row-major, prod(dims) of them)
// Matrices are written rank 2; rank 1 is accepted on load as a single row.

void save_params(const std::string& path,
                 const std::vector<std::pair<std::string, const Matrix*>>& entries);

std::vector<std::pair<std::string, Matrix>> load_params(const std::string& path);

}  // namespace mdsgnn
