#include "rcs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "rcs/errors.hpp"

namespace rcs {

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_stream_text(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << format_real(v) << '\n';
  if (!out) throw IoError("stream: write failed");
}

std::vector<double> read_stream_text(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    if (*b == '+') ++b;
    double v = 0.0;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e || !std::isfinite(v))
      throw IoError("stream: line " + std::to_string(lineno) + " is not a finite real");
    out.push_back(v);
  }
  return out;
}

void write_stream_file(const std::string& path, std::span<const double> values) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_stream_text(out, values);
}

std::vector<double> read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_stream_text(in);
}

void write_emission_header(std::ostream& out) {
  out << "global_index,x_bar,votes,recoveries,finalized_at_window\n";
}

void write_emission(std::ostream& out, const Emission& e) {
  out << e.index << ',' << format_real(e.x_bar) << ',' << e.votes << ',' << e.recoveries << ','
      << e.finalized_at_window << '\n';
}

void write_trace_header(std::ostream& out, std::size_t m) {
  out << "window_index";
  for (std::size_t r = 0; r < m; ++r) out << ",y" << r;
  out << '\n';
}

void write_trace_row(std::ostream& out, std::uint64_t window, std::span<const double> y) {
  out << window;
  for (double v : y) out << ',' << format_real(v);
  out << '\n';
}

}  // namespace rcs
