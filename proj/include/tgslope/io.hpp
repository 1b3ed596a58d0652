#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tgslope/core.hpp"
#include "tgslope/experiments.hpp"
#include "tgslope/penalty.hpp"
#include "tgslope/tensor.hpp"

namespace tgslope {
namespace detail {

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc{})
    throw NumericalError("format_double: conversion failed");
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view token, const std::string& where) {
  // Tolerate surrounding spaces and an explicit leading '+'.
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
    token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                            token.back() == '\r'))
    token.remove_suffix(1);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw IoError(where + ": cannot parse number '" + std::string(token) + "'");
  return v;
}

inline bool skippable_line(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '#';
  }
  return true;  // blank
}

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i)
    b[static_cast<std::size_t>(i)] =
        static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}

inline void write_f64_le(std::ostream& os, double v) {
  write_u64_le(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint64_t read_u64_le(std::istream& is, const std::string& where) {
  std::array<char, 8> b{};
  is.read(b.data(), 8);
  if (is.gcount() != 8) throw IoError(where + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i)
    v = (v << 8) |
        static_cast<std::uint64_t>(
            static_cast<unsigned char>(b[static_cast<std::size_t>(i)]));
  return v;
}

inline double read_f64_le(std::istream& is, const std::string& where) {
  return std::bit_cast<double>(read_u64_le(is, where));
}

}  // namespace detail

/// Trailing comment stamped onto CSV outputs.
inline std::string metadata_line(std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << ", version=" << kVersion;
  return os.str();
}

/// Plain numeric CSV: one row per line, commas, no header.  An optional
/// metadata comment goes after the data.
inline void write_matrix_csv(const std::string& path, const Mat& m,
                             const std::string& trailing_comment = "") {
  std::ofstream os(path);
  if (!os) throw IoError("write_matrix_csv: cannot open '" + path + "'");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      os << detail::format_double(m(i, j));
    }
    os << '\n';
  }
  if (!trailing_comment.empty()) os << trailing_comment << '\n';
  if (!os) throw IoError("write_matrix_csv: write failed for '" + path + "'");
}

/// Reads a numeric CSV, skipping blank lines and '#' comments anywhere.
/// All data rows must have the same number of fields.
inline Mat read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_matrix_csv: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skippable_line(line)) continue;
    std::vector<double> row;
    std::size_t start = 0;
    const std::string where =
        "read_matrix_csv: '" + path + "' line " + std::to_string(lineno);
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string_view token =
          std::string_view(line).substr(start, comma == std::string::npos
                                                   ? std::string::npos
                                                   : comma - start);
      row.push_back(detail::parse_double(token, where));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(where + ": expected " +
                    std::to_string(rows.front().size()) + " fields, got " +
                    std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw IoError("read_matrix_csv: '" + path + "' has no data rows");
  Mat m(static_cast<Index>(rows.size()),
        static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline constexpr char kT3dMagic[8] = {'T', '3', 'D', 'E', 'N', 'S', 'E', '1'};

/// Dense third-order tensor container: 8-byte magic "T3DENSE1", the three
/// dimensions as little-endian uint64, then the payload as little-endian
/// float64 in storage order (slice-major, column-major within a slice).
inline void write_tensor_t3d(const std::string& path, const Tensor3& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_tensor_t3d: cannot open '" + path + "'");
  os.write(kT3dMagic, 8);
  detail::write_u64_le(os, static_cast<std::uint64_t>(t.dim1()));
  detail::write_u64_le(os, static_cast<std::uint64_t>(t.dim2()));
  detail::write_u64_le(os, static_cast<std::uint64_t>(t.dim3()));
  for (Index i = 0; i < t.size(); ++i) detail::write_f64_le(os, t.data()[i]);
  if (!os) throw IoError("write_tensor_t3d: write failed for '" + path + "'");
}

inline Tensor3 read_tensor_t3d(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_tensor_t3d: cannot open '" + path + "'");
  const std::string where = "read_tensor_t3d: '" + path + "'";
  std::array<char, 8> magic{};
  is.read(magic.data(), 8);
  if (is.gcount() != 8 ||
      !std::equal(magic.begin(), magic.end(), std::begin(kT3dMagic)))
    throw IoError(where + ": bad magic, not a t3d file");
  std::uint64_t dims[3];
  for (auto& d : dims) d = detail::read_u64_le(is, where);
  constexpr std::uint64_t kMaxElems = (1ull << 31);  // 16 GiB payload cap
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0)
    throw IoError(where + ": zero dimension");
  if (dims[0] > kMaxElems || dims[1] > kMaxElems || dims[2] > kMaxElems ||
      dims[0] * dims[1] > kMaxElems ||
      dims[0] * dims[1] * dims[2] > kMaxElems)
    throw IoError(where + ": dimensions too large");
  Tensor3 t(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]),
            static_cast<Index>(dims[2]));
  for (Index i = 0; i < t.size(); ++i)
    t.data()[i] = detail::read_f64_le(is, where);
  char extra = 0;
  if (is.read(&extra, 1); is.gcount() != 0)
    throw IoError(where + ": trailing bytes after payload");
  return t;
}

/// Penalty file: one nonnegative value per line, nonincreasing from top to
/// bottom.  Blank lines and '#' comments are skipped.  Ordering/sign
/// violations surface as IoError so the CLI maps them to the format
/// exit code.
inline LambdaSeq read_lambda_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_lambda_file: cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skippable_line(line)) continue;
    values.push_back(detail::parse_double(
        line, "read_lambda_file: '" + path + "' line " +
                  std::to_string(lineno)));
  }
  try {
    return LambdaSeq(Eigen::Map<const Vec>(values.data(),
                                           static_cast<Index>(values.size())));
  } catch (const InvalidArgument& e) {
    throw IoError("read_lambda_file: '" + path + "': " + e.what());
  }
}

/// Aggregated study table: header row, one line per (grid point, method),
/// trailing seed/version comment.  Wall-clock timings are deliberately not
/// written: fixed-seed reruns must be byte-identical.
inline void write_summary_csv(const std::string& path,
                              const SummaryTable& table, std::uint64_t seed) {
  std::ofstream os(path);
  if (!os) throw IoError("write_summary_csv: cannot open '" + path + "'");
  os << "grid,method,reps,failures,"
        "fdp_mean,fdp_sd,fdp_se,tp_mean,tp_sd,tp_se,"
        "rgee_mean,rgee_sd,rgee_se,mse_mean,mse_sd,mse_se\n";
  const auto put = [&os](const MetricStats& st) {
    os << ',' << detail::format_double(st.mean) << ','
       << detail::format_double(st.sd) << ',' << detail::format_double(st.se);
  };
  for (const SummaryRow& row : table) {
    os << row.grid << ',' << row.method << ',' << row.reps << ','
       << row.failures;
    put(row.fdp);
    put(row.tp);
    put(row.rgee);
    put(row.mse);
    os << '\n';
  }
  os << metadata_line(seed) << '\n';
  if (!os) throw IoError("write_summary_csv: write failed for '" + path + "'");
}

/// Per-replication table behind a summary: header row, one line per rep,
/// trailing seed/version comment.  No timings, as with write_summary_csv.
inline void write_reps_csv(const std::string& path,
                           const std::vector<std::pair<std::string, StudyResult>>& studies,
                           std::uint64_t seed) {
  std::ofstream os(path);
  if (!os) throw IoError("write_reps_csv: cannot open '" + path + "'");
  os << "grid,method,rep,fdp,tp,rgee,mse,iterations,converged,failed\n";
  for (const auto& [grid, study] : studies) {
    for (std::size_t r = 0; r < study.reps.size(); ++r) {
      const ReplicationResult& rr = study.reps[r];
      os << grid << ',' << method_name(study.method) << ',' << r << ','
         << detail::format_double(rr.fdp) << ','
         << detail::format_double(rr.tp) << ','
         << detail::format_double(rr.rgee) << ','
         << detail::format_double(rr.mse) << ',' << rr.iterations << ','
         << (rr.converged ? 1 : 0) << ',' << (rr.failed ? 1 : 0) << '\n';
    }
  }
  os << metadata_line(seed) << '\n';
  if (!os) throw IoError("write_reps_csv: write failed for '" + path + "'");
}

}  // namespace tgslope
