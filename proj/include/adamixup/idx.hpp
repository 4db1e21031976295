#ifndef ADAMIXUP_IDX_HPP
#define ADAMIXUP_IDX_HPP

#include <string>

#include "adamixup/dataset.hpp"

namespace adamixup {

// IDX binary format as published: big-endian u32 dimensions, unsigned byte
// payload. Image magic 0x00000803, label magic 0x00000801. Pixels are scaled
// to [0,1] by dividing by 255; features come out as [1,H,W].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Test/tooling helper: writes a dataset of single-channel images as an IDX
// pair with 8-bit pixels (values rounded from [0,1]*255).
void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path);

} // namespace adamixup

#endif
