#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "incmom/errors.hpp"

namespace incmom::csv {

struct DatasetSpec {
  std::filesystem::path path;
  // Column name, or a 1-based column index when the file has no header.
  std::string value_column;
  std::optional<std::string> group_column;
  char delimiter = ',';
  bool header = true;
  // Skip (and count) rows whose value is non-positive or unparseable instead
  // of failing.
  bool skip_invalid = false;
};

struct Group {
  std::string name;
  std::vector<double> values;
};

struct Dataset {
  std::vector<Group> groups;  // in order of first appearance
  std::size_t rows = 0;
  std::size_t skipped_nonpositive = 0;
  std::size_t skipped_unparseable = 0;

  [[nodiscard]] const Group* find(std::string_view name) const {
    for (const auto& g : groups) {
      if (g.name == name) return &g;
    }
    return nullptr;
  }
};

/// RFC 4180 style record splitter: quoted fields may contain the delimiter,
/// doubled quotes and line breaks. CRLF line endings are accepted.
[[nodiscard]] inline std::vector<std::vector<std::string>> parse_records(std::string_view text,
                                                                         char delimiter = ',') {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (row_has_content || row.size() > 1 || !row.front().empty()) records.push_back(std::move(row));
    row.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      row_has_content = true;
    } else if (c == delimiter) {
      end_field();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_row();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty() || !row.empty() || row_has_content) end_row();
  return records;
}

[[nodiscard]] inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[nodiscard]] inline std::optional<double> parse_double(std::string_view s) noexcept {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

namespace detail {

inline std::size_t resolve_column(const std::vector<std::string>& header, const std::string& name,
                                  bool has_header) {
  if (has_header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
  }
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (ec != std::errc{} || ptr != name.data() + name.size() || idx == 0) {
    throw Error(ErrorCode::MissingColumn,
                "without a header, columns are addressed by 1-based index, got '" + name + "'");
  }
  return idx - 1;
}

}  // namespace detail

/// Splits the value column into groups keyed by the group column (one
/// anonymous group when there is none). Throws EmptyGroup when no usable
/// values remain.
[[nodiscard]] inline Dataset parse_text(std::string_view text, const DatasetSpec& spec) {
  const auto records = parse_records(text, spec.delimiter);
  Dataset out;
  std::size_t first = 0;
  std::vector<std::string> header;
  if (spec.header) {
    if (records.empty()) throw Error(ErrorCode::EmptyGroup, "file is empty");
    header = records.front();
    first = 1;
  }
  const std::size_t vcol = detail::resolve_column(header, spec.value_column, spec.header);
  std::optional<std::size_t> gcol;
  if (spec.group_column) gcol = detail::resolve_column(header, *spec.group_column, spec.header);

  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    ++out.rows;
    const std::size_t line = r + 1;
    if (vcol >= rec.size() || (gcol && *gcol >= rec.size())) {
      if (spec.skip_invalid) {
        ++out.skipped_unparseable;
        continue;
      }
      throw Error(ErrorCode::MissingColumn, "record " + std::to_string(line) + " is too short");
    }
    const auto value = parse_double(rec[vcol]);
    if (!value) {
      if (spec.skip_invalid) {
        ++out.skipped_unparseable;
        continue;
      }
      throw Error(ErrorCode::UnparseableValue,
                  "record " + std::to_string(line) + ": cannot parse '" + rec[vcol] + "'");
    }
    if (!(*value > 0.0)) {
      if (spec.skip_invalid) {
        ++out.skipped_nonpositive;
        continue;
      }
      throw Error(ErrorCode::NonPositiveValues,
                  "record " + std::to_string(line) + ": value " + rec[vcol] +
                      " is not positive (pass --skip-nonpositive to drop such rows)");
    }
    const std::string key = gcol ? std::string(trim(rec[*gcol])) : std::string();
    Group* group = nullptr;
    for (auto& g : out.groups) {
      if (g.name == key) {
        group = &g;
        break;
      }
    }
    if (!group) group = &out.groups.emplace_back(Group{key, {}});
    group->values.push_back(*value);
  }
  if (out.groups.empty()) throw Error(ErrorCode::EmptyGroup, "no usable observations");
  return out;
}

[[nodiscard]] inline Dataset parse_csv(const DatasetSpec& spec) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(spec.path, ec)) {
    throw Error(ErrorCode::FileNotFound, "cannot open '" + spec.path.string() + "'");
  }
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + spec.path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), spec);
}

}  // namespace incmom::csv
