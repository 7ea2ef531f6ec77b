#pragma once

#include <string>

#include "tic/field.hpp"

namespace tic {

// Flat binary field format: 32-byte header (magic "TIC4", four little-endian
// u32 extents n_t,n_s,n_x,n_y, 12 zero pad bytes), then row-major (t,s,x,y)
// 64-bit floats.  Field2 is stored with n_t = n_x = 1.
void write_t4b(const std::string& path, const Field4& u);
void write_t4b(const std::string& path, const Field2& v);
Field4 read_t4b(const std::string& path);
Field2 read_t4b_2(const std::string& path);

// CSV for 2-index fields: header row "s,y,<value_name>", one row per node.
void write_csv(const std::string& path, const SpaceTimeGrid& g, const Field2& v,
               const std::string& value_name);

// Multi-column CSV: columns s,y then one named column per field.
void write_csv(const std::string& path, const SpaceTimeGrid& g,
               const std::vector<std::pair<std::string, const Field2*>>& cols);

} // namespace tic
