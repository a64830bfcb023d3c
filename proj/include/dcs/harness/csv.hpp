#pragma once

// Epoch time series as CSV. Column order is part of the file format.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/harness/config.hpp"
#include "dcs/metrics.hpp"

namespace dcs::harness {

inline constexpr std::array<std::string_view, 11> kCsvColumns = {
    "epoch",           "users",       "demand_rate", "active_participants",
    "throughput_rate", "avg_power_historical",       "min_cartel_size",
    "cartel_prob",     "gini",        "decentralized", "round_success"};

inline std::string to_csv(const ScenarioResult& result) {
  using dcs::detail::format_double;
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  out += '\n';
  for (const auto& r : result.records) {
    out += std::to_string(r.epoch) + ',' + std::to_string(r.users) + ',' +
           format_double(r.demand_rate) + ',' + std::to_string(r.active_participants) + ',' +
           format_double(r.throughput_rate) + ',' + format_double(r.avg_power_historical) + ',' +
           std::to_string(r.min_cartel_size) + ',' + format_double(r.cartel_prob) + ',' +
           format_double(r.gini) + ',' + (r.decentralized ? "true" : "false") + ',' +
           (r.round_success ? "true" : "false") + '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view text, std::string_view column, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(std::string(column),
                      "line " + std::to_string(line) + ": bad value '" + std::string(text) + "'");
  return value;
}

inline bool parse_bool(std::string_view text, std::string_view column, std::size_t line) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(std::string(column),
                    "line " + std::to_string(line) + ": bad boolean '" + std::string(text) + "'");
}

}  // namespace detail

// Parses a harness CSV back into epoch records. Columns are located by name;
// a missing column is an error naming it.
inline ScenarioResult from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : detail::split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ConfigError("", "empty CSV");

  const auto header = detail::split(lines[0], ',');
  std::array<std::size_t, kCsvColumns.size()> at{};
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kCsvColumns[c]);
    if (it == header.end()) throw ConfigError(std::string(kCsvColumns[c]), "missing CSV column");
    at[c] = static_cast<std::size_t>(it - header.begin());
  }

  ScenarioResult result;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = detail::split(lines[i], ',');
    if (cells.size() != header.size())
      throw ConfigError("", "line " + std::to_string(i + 1) + ": expected " +
                                std::to_string(header.size()) + " fields");
    auto cell = [&](std::size_t c) { return cells[at[c]]; };
    auto col = [&](std::size_t c) { return kCsvColumns[c]; };
    EpochRecord r;
    r.epoch = detail::parse_field<std::uint32_t>(cell(0), col(0), i + 1);
    r.users = detail::parse_field<std::uint64_t>(cell(1), col(1), i + 1);
    r.demand_rate = detail::parse_field<double>(cell(2), col(2), i + 1);
    r.active_participants = detail::parse_field<std::uint64_t>(cell(3), col(3), i + 1);
    r.throughput_rate = detail::parse_field<double>(cell(4), col(4), i + 1);
    r.avg_power_historical = detail::parse_field<double>(cell(5), col(5), i + 1);
    r.min_cartel_size = detail::parse_field<std::uint64_t>(cell(6), col(6), i + 1);
    r.cartel_prob = detail::parse_field<double>(cell(7), col(7), i + 1);
    r.gini = detail::parse_field<double>(cell(8), col(8), i + 1);
    r.decentralized = detail::parse_bool(cell(9), col(9), i + 1);
    r.round_success = detail::parse_bool(cell(10), col(10), i + 1);
    result.records.push_back(r);
  }
  return result;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dcs::harness
