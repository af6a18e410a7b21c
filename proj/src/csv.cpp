#include "ftrack/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ftrack {
namespace {

std::vector<std::string> SplitFields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (std::string& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

}  // namespace

CsvTable ParseCsv(std::string_view text, ErrorCode on_error) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<std::string> fields = SplitFields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(on_error, "line " + std::to_string(line_no) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(on_error, "missing CSV header");
  return table;
}

std::string ReadTextFile(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& file, std::string_view text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + file.string());
}

double ParseDouble(std::string_view field, ErrorCode on_error) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw Error(on_error, "not a number: '" + std::string(field) + "'");
  }
  return v;
}

std::string FormatExact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string FormatShort(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<Waypoint> LoadWaypoints(const std::filesystem::path& file) {
  try {
    const CsvTable t = ParseCsv(ReadTextFile(file), ErrorCode::kPathLoadError);
    if (t.header != std::vector<std::string>{"x", "y"}) {
      throw Error(ErrorCode::kPathLoadError, "expected header 'x,y'");
    }
    std::vector<Waypoint> points;
    points.reserve(t.rows.size());
    for (const auto& row : t.rows) {
      points.push_back({ParseDouble(row[0], ErrorCode::kPathLoadError),
                        ParseDouble(row[1], ErrorCode::kPathLoadError)});
    }
    return points;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kPathLoadError) throw;
    throw Error(ErrorCode::kPathLoadError, file.string() + ": " + e.what());
  }
}

std::string WaypointsToCsv(std::span<const Waypoint> points) {
  std::string out = "x,y\n";
  for (const Waypoint& p : points) {
    out += FormatExact(p.x);
    out += ',';
    out += FormatExact(p.y);
    out += '\n';
  }
  return out;
}

}  // namespace ftrack
