#include "adamixup/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace adamixup {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'X', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_u32(std::ofstream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::ifstream& is, const char* field) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw FormatError(std::string("checkpoint: truncated while reading ") + field);
    return v;
}

} // namespace

void save_checkpoint(const std::string& path, const std::vector<TensorPtr>& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    for (const auto& t : tensors) {
        if (t->name.empty()) throw ContractError("checkpoint: tensor without a name");
        write_u32(os, static_cast<uint32_t>(t->name.size()));
        os.write(t->name.data(), static_cast<std::streamsize>(t->name.size()));
        write_u32(os, static_cast<uint32_t>(t->shape.size()));
        for (int64_t e : t->shape) write_u32(os, static_cast<uint32_t>(e));
        os.write(reinterpret_cast<const char*>(t->values.data()),
                 static_cast<std::streamsize>(t->values.size() * sizeof(double)));
    }
    if (!os) throw FormatError("checkpoint: write to '" + path + "' failed");
}

std::vector<TensorPtr> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("checkpoint: cannot open '" + path + "'");
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("checkpoint: bad magic in '" + path + "' (expected AMX1)");
    }
    std::vector<TensorPtr> tensors;
    for (;;) {
        uint32_t name_len = 0;
        is.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        if (is.eof()) break;
        if (!is) throw FormatError("checkpoint: truncated while reading name length");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) throw FormatError("checkpoint: truncated while reading name");
        uint32_t rank = read_u32(is, "rank");
        if (rank > 8) throw FormatError("checkpoint: implausible rank for tensor '" + name + "'");
        std::vector<int64_t> shape(rank);
        for (uint32_t d = 0; d < rank; ++d) {
            shape[d] = static_cast<int64_t>(read_u32(is, "extent"));
        }
        const int64_t n = Tensor::extent_product(shape);
        std::vector<double> values(static_cast<size_t>(n));
        is.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!is) throw FormatError("checkpoint: truncated payload for tensor '" + name + "'");
        auto t = Tensor::create(std::move(shape), std::move(values));
        t->name = name;
        tensors.push_back(std::move(t));
    }
    return tensors;
}

} // namespace adamixup
