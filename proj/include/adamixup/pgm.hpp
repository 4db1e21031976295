#ifndef ADAMIXUP_PGM_HPP
#define ADAMIXUP_PGM_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace adamixup {

// Binary PGM (P5, maxval 255); values are clamped from [0,1].
void write_pgm(const std::string& path, int64_t height, int64_t width,
               const std::vector<double>& values);

std::vector<double> read_pgm(const std::string& path, int64_t& height, int64_t& width);

} // namespace adamixup

#endif
