#pragma once

#include "rkde/propensity.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rkde {

//! Git blob object id: SHA-1 of "blob <size>\0" followed by the content.
std::string
git_blob_hash(std::string_view content);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  //! 1-based source line of each row.
  std::vector<std::size_t> lines;

  //! Throws InputError when the column is absent.
  std::size_t column(const std::string& name) const;
};

//! RFC 4180 fields with a required header row. Throws InputError with the
//! offending line.
CsvTable
parse_csv(std::string_view text);

CsvTable
read_csv(const std::filesystem::path& path);

struct ColumnSelection
{
  std::string value;
  //! 1 = observed, 0 = missing.
  std::optional<std::string> flag;
  //! Cell text that marks a missing value; empty cells are always missing.
  std::optional<std::string> sentinel;
  std::optional<std::string> aux;
};

//! Rows to observations. Throws InputError for unparseable numbers, bad flags
//! or a column without observed values.
std::vector<Observation>
load_observations(const CsvTable& table, const ColumnSelection& columns);

//! What a run did, with a content hash over the command, the resolved
//! configuration and any input files.
struct RunManifest
{
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> input_hashes;
  std::vector<std::string> outputs;

  //! Hash of command, config, seed and input hashes; output paths are not
  //! part of it.
  std::string hash() const;
  nlohmann::json to_json() const;
};

} // namespace rkde
