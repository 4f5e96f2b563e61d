#pragma once

#include <string>

#include "oblab/grid.hpp"

namespace oblab {

// Text field snapshot: a one-line JSON header with the problem parameters
// followed by an index,coordinates,value table covering every lattice node,
// 17 significant digits throughout.
void write_snapshot(const ScalarField& f, const std::string& path);

struct LoadedField {
  ProblemParams params;
  std::vector<double> values;
};

LoadedField read_snapshot(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

std::string format_g17(double v);

} // namespace oblab
