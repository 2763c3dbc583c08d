#include "adass/trace_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "adass/csv.hpp"
#include "adass/errors.hpp"

namespace adass {

namespace {

static_assert(std::endian::native == std::endian::little, "SFTR I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'S', 'F', 'T', 'R'};

void put_u32(std::ofstream& out, std::uint32_t x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t x = 0;
  in.read(reinterpret_cast<char*>(&x), sizeof x);
  return x;
}

}  // namespace

void write_sftr(const std::string& path, const std::vector<Matrix>& matrices) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  const auto rows = matrices.empty() ? 0 : matrices.front().rows();
  const auto cols = matrices.empty() ? 0 : matrices.front().cols();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
  put_u32(out, static_cast<std::uint32_t>(matrices.size()));
  for (const Matrix& m : matrices) {
    if (m.rows() != rows || m.cols() != cols) throw InputError("write_sftr: matrices differ in shape");
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = m;
    out.write(reinterpret_cast<const char*>(row_major.data()),
              static_cast<std::streamsize>(sizeof(double) * row_major.size()));
  }
  if (!out) throw InputError("write failed for '" + path + "'");
}

std::vector<Matrix> read_sftr(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InputError("'" + path + "' is not an SFTR file");
  const auto rows = get_u32(in);
  const auto cols = get_u32(in);
  const auto count = get_u32(in);
  if (!in) throw InputError("'" + path + "': truncated header");
  std::vector<Matrix> out;
  out.reserve(count);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf(rows, cols);
  for (std::uint32_t c = 0; c < count; ++c) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(sizeof(double) * buf.size()));
    if (!in) throw InputError("'" + path + "': truncated payload");
    out.emplace_back(buf);
  }
  return out;
}

void write_trace_csv(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "iteration,xi,support_size,psi\n";
  for (std::size_t t = 0; t < trace.retained(); ++t) {
    out << trace.iteration[t] << ',' << trace.xi[t] << ',' << trace.support_size[t] << ','
        << format_double(trace.psi[t]) << '\n';
  }
  if (!out) throw InputError("write failed for '" + path + "'");
}

ChainTrace read_trace_csv(const std::string& path) {
  const CsvMatrix csv = read_matrix_csv(path);
  if (csv.values.cols() != 4) throw InputError("'" + path + "': expected 4 trace columns");
  ChainTrace trace;
  for (Eigen::Index t = 0; t < csv.values.rows(); ++t) {
    trace.iteration.push_back(static_cast<int>(csv.values(t, 0)));
    trace.xi.push_back(static_cast<int>(csv.values(t, 1)));
    trace.support_size.push_back(static_cast<int>(csv.values(t, 2)));
    trace.psi.push_back(csv.values(t, 3));
  }
  return trace;
}

}  // namespace adass
