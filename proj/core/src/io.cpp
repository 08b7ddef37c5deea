#include "degen/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace degen {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(const std::string& path, const Grid& g, const Field& u) {
  if (static_cast<int>(u.size()) != g.n())
    throw std::invalid_argument("write_field_csv: field size must match the grid");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  out << "idx,i,j,x1,x2,tag,value\n";
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      const int k = g.idx(i, j);
      out << k << ',' << i << ',' << j << ',' << format_g17(g.x1[i]) << ','
          << format_g17(g.x2[j]) << ',' << node_tag_name(g.tag[k]) << ','
          << format_g17(u[k]) << '\n';
    }
  if (!out) throw std::runtime_error("write_field_csv: write failed for " + path);
}

Field read_field_csv_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field_csv_values: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "idx,i,j,x1,x2,tag,value")
    throw std::runtime_error("read_field_csv_values: unexpected header in " + path);
  Field vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos)
      throw std::runtime_error("read_field_csv_values: malformed row in " + path);
    vals.push_back(std::strtod(line.c_str() + pos + 1, nullptr));
  }
  return vals;
}

void write_convergence_csv(const std::string& path, const ConvergenceTable& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_convergence_csv: cannot open " + path);
  out << "level,h,err_interior,err_degenerate,order_interior,order_degenerate\n";
  for (const auto& r : t.rows)
    out << r.level << ',' << format_g17(r.h) << ',' << format_g17(r.err_interior)
        << ',' << format_g17(r.err_degenerate) << ',' << format_g17(r.order_interior)
        << ',' << format_g17(r.order_degenerate) << '\n';
  if (!out) throw std::runtime_error("write_convergence_csv: write failed for " + path);
}

}  // namespace degen
