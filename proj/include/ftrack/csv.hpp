#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftrack/error.hpp"
#include "ftrack/refpath.hpp"

namespace ftrack {

// Header plus rows of raw fields. Every row has as many fields as the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Accepts LF or CRLF line endings and a leading UTF-8 BOM; blank lines are
// skipped. Failures are reported with the given code.
CsvTable ParseCsv(std::string_view text, ErrorCode on_error = ErrorCode::kMalformedCsv);

// Throws kIoError if the file cannot be read.
std::string ReadTextFile(const std::filesystem::path& file);
void WriteTextFile(const std::filesystem::path& file, std::string_view text);

double ParseDouble(std::string_view field, ErrorCode on_error = ErrorCode::kMalformedCsv);

// Shortest text that parses back to the same double.
std::string FormatExact(double v);
// Fixed 10 significant digits, used for metrics.
std::string FormatShort(double v);

// Waypoint CSV with header "x,y". Any failure throws kPathLoadError.
std::vector<Waypoint> LoadWaypoints(const std::filesystem::path& file);
std::string WaypointsToCsv(std::span<const Waypoint> points);

}  // namespace ftrack
