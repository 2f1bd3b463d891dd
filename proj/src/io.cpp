#include "oim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oim {

std::string fmt_double(double x) {
  // shortest representation that parses back to the same value
  char buf[40];
  for (int prec = 12; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  write_text_file(path, out.str());
}

void save_bank_csv(const Matrix& bank, int cursor, int fill, const std::string& path) {
  std::ostringstream out;
  out << bank.rows() << "," << bank.cols() << "," << cursor << "," << fill << "\n";
  for (int r = 0; r < bank.rows(); ++r) {
    for (int c = 0; c < bank.cols(); ++c) out << (c ? "," : "") << fmt_double(bank(r, c));
    out << "\n";
  }
  write_text_file(path, out.str());
}

BankDump load_bank_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty bank file: " + path);
  int rows, cols;
  BankDump dump;
  if (std::sscanf(line.c_str(), "%d,%d,%d,%d", &rows, &cols, &dump.cursor, &dump.fill) != 4)
    throw std::runtime_error("bad bank header in " + path);
  dump.data = Matrix(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated bank file: " + path);
    std::istringstream ss(line);
    std::string cell;
    for (int c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("short row in " + path);
      dump.data(r, c) = std::stod(cell);
    }
  }
  return dump;
}

void save_lut(const LookupTable& lut, const std::string& path) {
  save_bank_csv(lut.entries(), 0, lut.num_ids(), path);
}

void save_queue(const CircularQueue& queue, const std::string& path) {
  save_bank_csv(queue.buffer(), queue.write_cursor(), queue.fill_count(), path);
}

void save_params(const EmbedderParams& params, const std::string& path) {
  std::ostringstream out;
  auto dump_mat = [&](const Matrix& m) {
    out << m.rows() << "," << m.cols() << "\n";
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt_double(m(r, c));
      out << "\n";
    }
  };
  auto dump_vec = [&](const Vec& v) {
    out << 1 << "," << v.size() << "\n";
    for (size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << fmt_double(v[i]);
    out << "\n";
  };
  dump_mat(params.w1);
  dump_vec(params.b1);
  dump_mat(params.w2);
  dump_vec(params.b2);
  write_text_file(path, out.str());
}

namespace {

const char* kPalette[] = {"#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
                          "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff"};
constexpr int kPaletteSize = 12;

}  // namespace

void write_svg_scatter(const std::string& path, const std::vector<SvgPoint>& points, double x_min,
                       double x_max, double y_min, double y_max, int size_px) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
      << size_px << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const SvgPoint& p : points) {
    const double px = (p.x - x_min) / (x_max - x_min) * size_px;
    const double py = size_px - (p.y - y_min) / (y_max - y_min) * size_px;
    out << "<circle cx=\"" << fmt_double(px) << "\" cy=\"" << fmt_double(py)
        << "\" r=\"3\" fill=\"" << kPalette[((p.cls % kPaletteSize) + kPaletteSize) % kPaletteSize]
        << "\"/>\n";
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

void write_svg_grid(const std::string& path, const std::vector<std::vector<int>>& grid,
                    int cell_px) {
  const int rows = static_cast<int>(grid.size());
  const int cols = rows ? static_cast<int>(grid[0].size()) : 0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell_px << "\" height=\""
      << rows * cell_px << "\">\n";
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out << "<rect x=\"" << j * cell_px << "\" y=\"" << (rows - 1 - i) * cell_px << "\" width=\""
          << cell_px << "\" height=\"" << cell_px << "\" fill=\""
          << kPalette[((grid[i][j] % kPaletteSize) + kPaletteSize) % kPaletteSize] << "\"/>\n";
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace oim
