#pragma once

#include <string>
#include <vector>

#include "lsvcal/types.hpp"

namespace lsv {

// Self-describing text tensor:
//   lsvfield 1
//   tag <semantic tag>
//   dims <n_slices> <nz> <nv>
//   dt <step>
//   zaxis <nz values>
//   vaxis <nv values>
//   data
//   <n_slices * nz lines of nv values>
// All numbers are printed with %.17g, so save/load round-trips exactly and
// identical fields produce byte-identical files.
struct FieldFile {
    Grid3Field field;
    double dt = 0.0;
    std::vector<double> zaxis, vaxis;
};

void save_field(const Grid3Field& f, const Grid2D& g, double dt, const std::string& path);
FieldFile load_field(const std::string& path);

// dimension + axis agreement between a loaded field and the working grid
void check_field_matches(const FieldFile& ff, const Grid2D& g, double dt);

}  // namespace lsv
