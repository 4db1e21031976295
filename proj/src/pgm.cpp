#include "adamixup/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "adamixup/errors.hpp"

namespace adamixup {

void write_pgm(const std::string& path, int64_t height, int64_t width,
               const std::vector<double>& values) {
    if (static_cast<size_t>(height * width) != values.size()) {
        throw ContractError("write_pgm: dimensions do not match value count");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("write_pgm: cannot open '" + path + "'");
    os << "P5\n" << width << " " << height << "\n255\n";
    for (double v : values) {
        os.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
}

std::vector<double> read_pgm(const std::string& path, int64_t& height, int64_t& width) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("read_pgm: cannot open '" + path + "'");
    std::string magic;
    int maxval = 0;
    is >> magic >> width >> height >> maxval;
    if (magic != "P5" || maxval != 255 || width < 1 || height < 1) {
        throw FormatError("read_pgm: '" + path + "' is not an 8-bit P5 file");
    }
    is.get(); // single whitespace after the header
    std::vector<double> values(static_cast<size_t>(width * height));
    for (auto& v : values) {
        const int c = is.get();
        if (c == EOF) throw FormatError("read_pgm: '" + path + "' truncated");
        v = static_cast<double>(c) / 255.0;
    }
    return values;
}

} // namespace adamixup
