#pragma once

// File formats.
//
// Series CSV: one header row `name[unit],...`, then one row per sample,
// every number printed with 17 significant digits (%.17g).
// Grid CSV:   `re_axis,v...`, `im_axis,v...`, `values`, then one row per
// im_axis entry holding the values along re_axis.
// Key-value:  `key=value` lines; `#` starts a comment line.

#include "iontrap/phasespace.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iontrap {

class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string format_double(double value);
/// Inverse of format_double (accepts nan/inf); throws std::invalid_argument.
double parse_double(const std::string& text);

struct Column {
  std::string name;
  std::string unit;
  std::vector<double> values;
};

struct Series {
  std::vector<Column> columns;

  Series& add(std::string name, std::string unit, std::vector<double> values);
  std::size_t rows() const;
  const Column& column(const std::string& name) const;
};

std::string series_csv(const Series& series);
std::string grid_csv(const WignerGrid& grid);
std::string series_json(const Series& series);
std::string grid_json(const WignerGrid& grid);

void write_series(const Series& series, const std::filesystem::path& path);
void write_grid(const WignerGrid& grid, const std::filesystem::path& path);
Series read_series(const std::filesystem::path& path);
WignerGrid read_grid(const std::filesystem::path& path);

/// Write to a sibling temporary file, then rename over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "<string>");
KeyValues read_key_values(const std::filesystem::path& path);
std::string key_values_text(const KeyValues& kv);

}  // namespace iontrap
