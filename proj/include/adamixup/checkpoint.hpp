#ifndef ADAMIXUP_CHECKPOINT_HPP
#define ADAMIXUP_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "adamixup/tensor.hpp"

namespace adamixup {

// Flat binary parameter checkpoint. Layout: magic "AMX1", then per-tensor
// records: u32 name length, name bytes, u32 rank, u32 extents, raw
// little-endian float64 payload. Integers are little-endian.
void save_checkpoint(const std::string& path, const std::vector<TensorPtr>& tensors);

// Reads records until EOF. Throws FormatError on bad magic or truncation.
std::vector<TensorPtr> load_checkpoint(const std::string& path);

} // namespace adamixup

#endif
