#include "adass/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "adass/errors.hpp"

namespace adass {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

CsvMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");

  CsvMatrix result;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    double first = 0.0;
    if (rows == 0 && result.header.empty() && !parse_double(cells[0], first)) {
      result.header = std::move(cells);
      cols = result.header.size();
      continue;
    }
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                       " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double x = 0.0;
      if (!parse_double(cells[c], x)) {
        throw InputError(path + ":" + std::to_string(line_no) + ": column " + std::to_string(c + 1) +
                         ": not a number: '" + cells[c] + "'");
      }
      values.push_back(x);
    }
    ++rows;
  }
  result.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      result.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values[i * cols + c];
    }
  }
  return result;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
  if (!out) throw InputError("write failed for '" + path + "'");
}

void center_columns(Matrix& m) {
  const Eigen::RowVectorXd means = m.colwise().mean();
  m.rowwise() -= means;
}

}  // namespace adass
