#pragma once

#include <string>

#include "degen/bvp.hpp"

namespace degen {

// 17 significant digits: enough for bit-exact double round trips.
std::string format_g17(double v);

// Layout: idx,i,j,x1,x2,tag,value
void write_field_csv(const std::string& path, const Grid& g, const Field& u);

// Reads back the value column of write_field_csv output.
Field read_field_csv_values(const std::string& path);

// Layout: level,h,err_interior,err_degenerate,order_interior,order_degenerate
void write_convergence_csv(const std::string& path, const ConvergenceTable& t);

}  // namespace degen
