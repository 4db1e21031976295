#include "adamixup/idx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace adamixup {

namespace {

constexpr uint32_t kImageMagic = 0x00000803;
constexpr uint32_t kLabelMagic = 0x00000801;

uint32_t read_be_u32(std::ifstream& is, const std::string& file, const char* field) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError("idx: '" + file + "' truncated while reading " + field);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

void write_be_u32(std::ofstream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<char*>(b), 4);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("idx: cannot open images file '" + images_path + "'");
    const uint32_t img_magic = read_be_u32(img, images_path, "magic");
    if (img_magic != kImageMagic) {
        throw FormatError("idx: images file '" + images_path + "' has magic " +
                          std::to_string(img_magic) + ", expected 2051 (0x00000803)");
    }
    const uint32_t count = read_be_u32(img, images_path, "image count");
    const uint32_t rows = read_be_u32(img, images_path, "rows");
    const uint32_t cols = read_be_u32(img, images_path, "cols");

    std::ifstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw FormatError("idx: cannot open labels file '" + labels_path + "'");
    const uint32_t lbl_magic = read_be_u32(lbl, labels_path, "magic");
    if (lbl_magic != kLabelMagic) {
        throw FormatError("idx: labels file '" + labels_path + "' has magic " +
                          std::to_string(lbl_magic) + ", expected 2049 (0x00000801)");
    }
    const uint32_t lbl_count = read_be_u32(lbl, labels_path, "label count");
    if (lbl_count != count) {
        throw FormatError("idx: image count " + std::to_string(count) + " != label count " +
                          std::to_string(lbl_count));
    }
    if (count == 0) throw FormatError("idx: '" + images_path + "' declares zero images");

    const size_t pixels = static_cast<size_t>(rows) * cols;
    std::vector<unsigned char> img_buf(static_cast<size_t>(count) * pixels);
    img.read(reinterpret_cast<char*>(img_buf.data()),
             static_cast<std::streamsize>(img_buf.size()));
    if (!img) throw FormatError("idx: '" + images_path + "' truncated pixel payload");

    std::vector<unsigned char> lbl_buf(count);
    lbl.read(reinterpret_cast<char*>(lbl_buf.data()), count);
    if (!lbl) throw FormatError("idx: '" + labels_path + "' truncated label payload");

    Dataset ds;
    ds.name = "idx";
    int max_label = 0;
    ds.examples.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        std::vector<double> vals(pixels);
        const unsigned char* src = img_buf.data() + static_cast<size_t>(i) * pixels;
        for (size_t p = 0; p < pixels; ++p) vals[p] = static_cast<double>(src[p]) / 255.0;
        LabeledExample ex;
        ex.features = Tensor::create({1, static_cast<int64_t>(rows), static_cast<int64_t>(cols)},
                                     std::move(vals));
        ex.label = static_cast<int>(lbl_buf[i]);
        max_label = std::max(max_label, ex.label);
        ds.examples.push_back(std::move(ex));
    }
    ds.num_classes = max_label + 1;
    return ds;
}

void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path) {
    const auto& shape = ds.feature_shape();
    if (shape.size() != 3 || shape[0] != 1) {
        throw ContractError("write_idx: expects single-channel [1,H,W] features");
    }
    std::ofstream img(images_path, std::ios::binary);
    std::ofstream lbl(labels_path, std::ios::binary);
    if (!img || !lbl) throw FormatError("write_idx: cannot open output files");
    write_be_u32(img, kImageMagic);
    write_be_u32(img, static_cast<uint32_t>(ds.size()));
    write_be_u32(img, static_cast<uint32_t>(shape[1]));
    write_be_u32(img, static_cast<uint32_t>(shape[2]));
    write_be_u32(lbl, kLabelMagic);
    write_be_u32(lbl, static_cast<uint32_t>(ds.size()));
    for (const auto& ex : ds.examples) {
        for (double v : ex.features->values) {
            const double clamped = std::clamp(v, 0.0, 1.0);
            img.put(static_cast<char>(std::lround(clamped * 255.0)));
        }
        lbl.put(static_cast<char>(ex.label));
    }
}

} // namespace adamixup
