#include "adamixup/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adamixup {

Dataset load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw FormatError("csv: '" + path + "' is empty");

    Dataset ds;
    ds.name = "csv";
    int max_label = 0;
    size_t feature_count = 0;
    size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                fields.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("csv: '" + path + "' row " + std::to_string(row) +
                                  ": non-numeric cell '" + cell + "'");
            }
        }
        if (fields.size() < 2) {
            throw FormatError("csv: '" + path + "' row " + std::to_string(row) +
                              ": need at least one feature and a label");
        }
        if (feature_count == 0) feature_count = fields.size() - 1;
        if (fields.size() - 1 != feature_count) {
            throw FormatError("csv: '" + path + "' row " + std::to_string(row) +
                              ": inconsistent column count");
        }
        const double label_field = fields.back();
        fields.pop_back();
        if (label_field != std::floor(label_field) || label_field < 0) {
            throw FormatError("csv: '" + path + "' row " + std::to_string(row) +
                              ": label column must be a non-negative integer");
        }
        for (size_t c = 0; c < fields.size(); ++c) {
            if (fields[c] < 0.0 || fields[c] > 1.0) {
                throw FormatError("csv: '" + path + "' row " + std::to_string(row) + " column " +
                                  std::to_string(c) + ": feature outside [0,1]");
            }
        }
        LabeledExample ex;
        ex.label = static_cast<int>(label_field);
        max_label = std::max(max_label, ex.label);
        ex.features = Tensor::vector(std::move(fields));
        ds.examples.push_back(std::move(ex));
    }
    if (ds.examples.empty()) throw FormatError("csv: '" + path + "' has no data rows");
    ds.num_classes = max_label + 1;
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("csv: cannot open '" + path + "' for writing");
    const size_t nf = ds.examples.front().features->values.size();
    for (size_t c = 0; c < nf; ++c) os << "f" << c << ",";
    os << "label\n";
    char buf[32];
    for (const auto& ex : ds.examples) {
        for (double v : ex.features->values) {
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            os << buf << ",";
        }
        os << ex.label << "\n";
    }
}

} // namespace adamixup
