#include "rkde/io.hpp"

#include "rkde/errors.hpp"

#include <openssl/sha.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rkde {

std::string
git_blob_hash(std::string_view content)
{
  std::string buf = "blob " + std::to_string(content.size());
  buf.push_back('\0');
  buf.append(content);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(buf.data()), buf.size(), digest);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA_DIGEST_LENGTH);
  for (unsigned char c : digest) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 0xf]);
  }
  return out;
}

std::size_t
CsvTable::column(const std::string& name) const
{
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return i;
  throw InputError("no column named '" + name + "'", 1);
}

CsvTable
parse_csv(std::string_view text)
{
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF")
    text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      records.push_back(std::move(record));
      record_lines.push_back(record_line);
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty())
          throw InputError("stray quote inside an unquoted field", line);
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
    }
  }
  if (quoted)
    throw InputError("unterminated quoted field", record_line);
  if (!field.empty() || !record.empty() || field_started)
    end_record();

  if (records.empty())
    throw InputError("empty CSV input: a header row is required", 1);

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw InputError("expected " + std::to_string(table.header.size()) + " fields, found " +
                         std::to_string(records[r].size()),
                       record_lines[r]);
    table.rows.push_back(std::move(records[r]));
    table.lines.push_back(record_lines[r]);
  }
  return table;
}

CsvTable
read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

namespace {

std::string_view
trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

double
parse_number(std::string_view s, std::size_t line, const std::string& column)
{
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InputError("column '" + column + "': cannot parse '" + std::string(s) + "' as a finite number", line);
  return v;
}

} // namespace

std::vector<Observation>
load_observations(const CsvTable& table, const ColumnSelection& columns)
{
  const std::size_t vc = table.column(columns.value);
  const std::optional<std::size_t> fc = columns.flag ? std::optional(table.column(*columns.flag)) : std::nullopt;
  const std::optional<std::size_t> ac = columns.aux ? std::optional(table.column(*columns.aux)) : std::nullopt;

  std::vector<Observation> out;
  out.reserve(table.rows.size());
  std::size_t observed = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.lines[r];
    const auto cell = trim(row[vc]);

    bool seen = !cell.empty() && !(columns.sentinel && cell == *columns.sentinel);
    if (fc) {
      const auto flag = trim(row[*fc]);
      if (flag == "1")
        seen = true;
      else if (flag == "0")
        seen = false;
      else
        throw InputError("column '" + *columns.flag + "': flag must be 0 or 1", line);
      if (seen && (cell.empty() || (columns.sentinel && cell == *columns.sentinel)))
        throw InputError("column '" + columns.value + "': flagged observed but the value is missing", line);
    }

    std::optional<double> aux;
    if (ac)
      aux = parse_number(row[*ac], line, *columns.aux);

    if (seen) {
      out.push_back(Observation::observed(parse_number(cell, line, columns.value), aux));
      ++observed;
    } else {
      out.push_back(Observation::missing(std::nullopt, aux));
    }
  }
  if (out.empty())
    throw InputError("no data rows", 1);
  if (observed == 0)
    throw InputError("column '" + columns.value + "' has no observed values", table.lines.back());
  return out;
}

std::string
RunManifest::hash() const
{
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["inputs"] = input_hashes;
  return git_blob_hash(j.dump());
}

nlohmann::json
RunManifest::to_json() const
{
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["inputs"] = input_hashes;
  j["outputs"] = outputs;
  j["hash"] = hash();
  return j;
}

} // namespace rkde
