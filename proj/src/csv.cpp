#include "unotb/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "unotb/error.hpp"

namespace unotb {

void write_csv(const std::string& path, const Tensor& matrix,
               const std::vector<std::string>& header) {
  if (matrix.rank() != 2)
    throw IoError("csv writer expects a matrix, got shape " +
                  matrix.shape_str());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (!header.empty()) {
    if (int64_t(header.size()) != matrix.cols())
      throw IoError("header has " + std::to_string(header.size()) +
                    " fields for " + std::to_string(matrix.cols()) +
                    " columns");
    for (size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << header[i];
    out << '\n';
  }
  char buf[40];
  for (int64_t r = 0; r < matrix.rows(); ++r) {
    for (int64_t c = 0; c < matrix.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.at(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

Tensor read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> data;
  int64_t cols = -1, rows = 0;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int64_t fields = 0;
    size_t pos = 0;
    while (pos <= line.size()) {
      size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      double v = 0.0;
      const auto [ptr, ec] =
          std::from_chars(line.data() + pos, line.data() + comma, v);
      if (ec != std::errc{} || ptr != line.data() + comma) {
        if (rows == 0 && fields == 0)
          break;  // presumably a header line; skip it
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": cannot parse field '" +
                      line.substr(pos, comma - pos) + "'");
      }
      data.push_back(v);
      ++fields;
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (fields == 0) continue;  // skipped header
    if (cols < 0) cols = fields;
    if (fields != cols)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(cols) + " fields, got " +
                    std::to_string(fields));
    ++rows;
  }
  if (rows == 0) throw IoError("no data rows in '" + path + "'");
  Tensor out({rows, cols});
  std::memcpy(out.data(), data.data(), data.size() * sizeof(double));
  return out;
}

void write_labels(const std::string& path,
                  const std::vector<int32_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const int32_t l : labels) out << l << '\n';
  if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<int32_t> read_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<int32_t> out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int32_t v = 0;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size())
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": cannot parse label '" + line + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace unotb
