#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepex/harness/metrics.hpp"

namespace deepex::harness {

inline constexpr int kRecordSchemaVersion = 1;

/// Header of the life-cycle record file.
const std::vector<std::string>& record_columns();

/// Shortest round-trip decimal for a double.
std::string format_double(double x);

void write_records(std::ostream& out, const std::vector<RunRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records);

/// Throws ValidationError on a header that is not the record schema or on a
/// malformed row.
std::vector<RunRecord> read_records(std::istream& in, const std::string& source = "<stream>");
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// Rows of comma-separated values; no quoting (fields never contain commas).
std::vector<std::vector<std::string>> read_csv_rows(std::istream& in);

}  // namespace deepex::harness
