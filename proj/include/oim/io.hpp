#ifndef OIM_IO_HPP_
#define OIM_IO_HPP_

#include <string>
#include <vector>

#include "oim/embedder.hpp"
#include "oim/matrix.hpp"
#include "oim/memory_bank.hpp"

namespace oim {

// Deterministic double formatting shared by every CSV/JSON writer, so that
// identical runs produce byte-identical outputs.
std::string fmt_double(double x);

void write_text_file(const std::string& path, const std::string& content);

// CSV with a header row; every cell already stringified by the caller.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Bank checkpoint schema: "rows,cols,cursor,fill_count" header line, then one
// CSV line of row-major values per row. LUT dumps use cursor=0, fill=rows.
void save_bank_csv(const Matrix& bank, int cursor, int fill, const std::string& path);
struct BankDump {
  Matrix data;
  int cursor = 0;
  int fill = 0;
};
BankDump load_bank_csv(const std::string& path);

void save_lut(const LookupTable& lut, const std::string& path);
void save_queue(const CircularQueue& queue, const std::string& path);
void save_params(const EmbedderParams& params, const std::string& path);

// Minimal direct-SVG emitters, no plotting dependency.
struct SvgPoint {
  double x, y;
  int cls;
};
void write_svg_scatter(const std::string& path, const std::vector<SvgPoint>& points, double x_min,
                       double x_max, double y_min, double y_max, int size_px = 480);
void write_svg_grid(const std::string& path, const std::vector<std::vector<int>>& grid,
                    int cell_px = 8);

}  // namespace oim

#endif  // OIM_IO_HPP_
