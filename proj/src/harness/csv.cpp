#include "deepex/harness/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "deepex/errors.hpp"

namespace deepex::harness {
namespace {

template <class T>
T parse_number(const std::string& field, const std::string& what) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError("malformed " + what + " '" + field + "'");
  return value;
}

}  // namespace

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {"schema_version", "run_id", "agent",  "seed",
                                                "user",           "life_cycle", "reward", "steps"};
  return cols;
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_records(std::ostream& out, const std::vector<RunRecord>& records) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << kRecordSchemaVersion << ',' << r.run_id << ',' << r.agent << ',' << r.seed << ',' << r.user << ','
        << r.life_cycle << ',' << format_double(r.reward) << ',' << r.steps << '\n';
  }
}

void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_records(out, records);
}

std::vector<std::vector<std::string>> read_csv_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::vector<RunRecord> read_records(std::istream& in, const std::string& source) {
  const auto rows = read_csv_rows(in);
  if (rows.empty()) throw ValidationError(source + " is empty");
  if (rows.front() != record_columns()) throw ValidationError(source + " does not have the life-cycle record schema");
  std::vector<RunRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::string where = source + " row " + std::to_string(i + 1);
    if (f.size() != record_columns().size()) throw ValidationError(where + " has the wrong number of fields");
    if (parse_number<int>(f[0], "schema version") != kRecordSchemaVersion)
      throw ValidationError(where + " has an unsupported schema version");
    RunRecord r;
    r.run_id = f[1];
    r.agent = f[2];
    r.seed = parse_number<std::uint64_t>(f[3], "seed in " + where);
    r.user = parse_number<std::size_t>(f[4], "user in " + where);
    r.life_cycle = parse_number<std::size_t>(f[5], "life_cycle in " + where);
    r.reward = parse_number<double>(f[6], "reward in " + where);
    r.steps = parse_number<std::size_t>(f[7], "steps in " + where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_records(in, path.string());
}

}  // namespace deepex::harness
