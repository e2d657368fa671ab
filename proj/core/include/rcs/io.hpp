#pragma once

// Text formats: the stream format (one ASCII real per line) and the CSV
// records emitted by the decoder and encoder.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rcs/decoder.hpp"
#include "rcs/numkernel.hpp"

namespace rcs {

/// Shortest decimal text that parses back to the identical double.
std::string format_real(double v);

void write_stream_text(std::ostream& out, std::span<const double> values);
/// Blank lines are skipped; anything else that is not a finite real is an IoError.
std::vector<double> read_stream_text(std::istream& in);
void write_stream_file(const std::string& path, std::span<const double> values);
std::vector<double> read_stream_file(const std::string& path);

/// global_index,x_bar,votes,recoveries,finalized_at_window
void write_emission_header(std::ostream& out);
void write_emission(std::ostream& out, const Emission& e);

/// window_index,y0,...,y{m-1}
void write_trace_header(std::ostream& out, std::size_t m);
void write_trace_row(std::ostream& out, std::uint64_t window, std::span<const double> y);

}  // namespace rcs
