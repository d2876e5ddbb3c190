#include "iontrap/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace iontrap {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

Series& Series::add(std::string name, std::string unit, std::vector<double> values) {
  if (!columns.empty() && values.size() != rows())
    throw std::invalid_argument("column '" + name + "' length differs from the series");
  columns.push_back({std::move(name), std::move(unit), std::move(values)});
  return *this;
}

std::size_t Series::rows() const { return columns.empty() ? 0 : columns.front().values.size(); }

const Column& Series::column(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw std::out_of_range("no column named " + name);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join_numbers(const RealVector& v) {
  std::string s;
  for (Index k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    s += format_double(v(k));
  }
  return s;
}

std::vector<double> parse_numbers(const std::vector<std::string>& cells, std::size_t from,
                                  const fs::path& path) {
  std::vector<double> out;
  try {
    for (std::size_t k = from; k < cells.size(); ++k) out.push_back(parse_double(cells[k]));
  } catch (const std::invalid_argument& e) {
    throw IoError(path, e.what());
  }
  return out;
}

RealVector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::string series_csv(const Series& series) {
  std::string out;
  for (std::size_t c = 0; c < series.columns.size(); ++c) {
    if (c) out += ',';
    out += series.columns[c].name + "[" + series.columns[c].unit + "]";
  }
  out += '\n';
  for (std::size_t r = 0; r < series.rows(); ++r) {
    for (std::size_t c = 0; c < series.columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(series.columns[c].values[r]);
    }
    out += '\n';
  }
  return out;
}

std::string grid_csv(const WignerGrid& grid) {
  std::string out = "re_axis," + join_numbers(grid.re_axis) + "\nim_axis," + join_numbers(grid.im_axis) +
                    "\nvalues\n";
  for (Index i = 0; i < grid.values.rows(); ++i) out += join_numbers(grid.values.row(i).transpose()) + '\n';
  return out;
}

std::string series_json(const Series& series) {
  nlohmann::ordered_json j;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : series.columns) j["columns"].push_back({{"name", c.name}, {"unit", c.unit}, {"values", c.values}});
  return j.dump(1) + '\n';
}

std::string grid_json(const WignerGrid& grid) {
  nlohmann::ordered_json j;
  j["re_axis"] = std::vector<double>(grid.re_axis.data(), grid.re_axis.data() + grid.re_axis.size());
  j["im_axis"] = std::vector<double>(grid.im_axis.data(), grid.im_axis.data() + grid.im_axis.size());
  auto rows = nlohmann::ordered_json::array();
  for (Index i = 0; i < grid.values.rows(); ++i) {
    const RealVector r = grid.values.row(i).transpose();
    rows.push_back(std::vector<double>(r.data(), r.data() + r.size()));
  }
  j["values"] = std::move(rows);
  return j.dump() + '\n';
}

void write_series(const Series& series, const fs::path& path) { write_atomic(path, series_csv(series)); }

void write_grid(const WignerGrid& grid, const fs::path& path) { write_atomic(path, grid_csv(grid)); }

Series read_series(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  Series s;
  if (!std::getline(in, line)) throw IoError(path, "missing header");
  if (!line.empty() && line != "\r") {
    for (const auto& cell : split(line, ',')) {
      const auto open = cell.rfind('[');
      if (open == std::string::npos || cell.back() != ']') throw IoError(path, "malformed header cell '" + cell + "'");
      s.columns.push_back({cell.substr(0, open), cell.substr(open + 1, cell.size() - open - 2), {}});
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto values = parse_numbers(split(line, ','), 0, path);
    if (values.size() != s.columns.size()) throw IoError(path, "row width differs from header");
    for (std::size_t c = 0; c < values.size(); ++c) s.columns[c].values.push_back(values[c]);
  }
  return s;
}

WignerGrid read_grid(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  auto expect = [&](const std::string& tag) {
    if (!std::getline(in, line)) throw IoError(path, "truncated grid file");
    auto cells = split(line, ',');
    if (cells.front() != tag) throw IoError(path, "expected '" + tag + "' block");
    return cells;
  };
  WignerGrid g;
  g.re_axis = to_vector(parse_numbers(expect("re_axis"), 1, path));
  g.im_axis = to_vector(parse_numbers(expect("im_axis"), 1, path));
  expect("values");
  g.values.resize(g.im_axis.size(), g.re_axis.size());
  for (Index i = 0; i < g.im_axis.size(); ++i) {
    if (!std::getline(in, line)) throw IoError(path, "missing grid rows");
    const auto row = parse_numbers(split(line, ','), 0, path);
    if (static_cast<Index>(row.size()) != g.re_axis.size()) throw IoError(path, "grid row width mismatch");
    g.values.row(i) = to_vector(row).transpose();
  }
  return g;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path(), "cannot create directory: " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp, "cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw IoError(tmp, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(path, "rename failed: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
  return hex.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(origin, "line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw IoError(origin, "line " + std::to_string(lineno) + ": empty key");
    kv.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) { return parse_key_values(read_file(path), path.string()); }

std::string key_values_text(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

}  // namespace iontrap
