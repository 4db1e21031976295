#ifndef ADAMIXUP_CSV_HPP
#define ADAMIXUP_CSV_HPP

#include <string>

#include "adamixup/dataset.hpp"

namespace adamixup {

// CSV dataset: header row, feature columns, then an integer label column.
// Features must already lie in [0,1].
Dataset load_csv(const std::string& path);

void write_csv(const Dataset& ds, const std::string& path);

} // namespace adamixup

#endif
