#pragma once

#include <string>

#include "bernquant/tensor.h"

namespace bernquant {

// Tensor file: "BQT1", u32 rank, rank x u64 extents, then the values as
// row-major little-endian doubles.
void save_tensor(const Tensor& t, const std::string& path);
Tensor load_tensor(const std::string& path);

}  // namespace bernquant
