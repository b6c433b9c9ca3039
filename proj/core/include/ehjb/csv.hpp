#ifndef EHJB_CSV_HPP
#define EHJB_CSV_HPP

// Small helpers for the CSV and binary artifacts. Numbers are written in
// shortest round-trip form so reruns produce identical bytes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ehjb {

std::string format_number(double x);
std::string format_number(std::int64_t x);

/// Joins already-formatted fields with commas and a trailing newline.
std::string csv_line(const std::vector<std::string>& fields);

void append_u64_le(std::string& out, std::uint64_t v);
void append_f64_le(std::string& out, double v);

/// Writes `contents` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace ehjb

#endif  // EHJB_CSV_HPP
