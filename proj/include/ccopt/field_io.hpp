#pragma once

#include <string>

#include "ccopt/grid.hpp"

namespace ccopt {

/// Field dump: plain-text header (magic, dim, cells, spacing, time index)
/// followed by the raw little-endian 64-bit cell values in lexicographic
/// order. Round trips are bit exact.
void write_field(const std::string& path, const ScalarField& field, int time_index);

struct LoadedField {
    ScalarField field;
    int time_index = 0;
};

LoadedField read_field(const std::string& path);

/// Reads a field and checks it lives on the expected grid.
ScalarField read_field_on_grid(const std::string& path, const Grid& grid);

}  // namespace ccopt
