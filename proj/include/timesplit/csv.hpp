#ifndef TIMESPLIT_CSV_HPP
#define TIMESPLIT_CSV_HPP

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "timesplit/eventlog.hpp"

namespace timesplit {

namespace detail {

/// RFC 4180 reader: comma-separated, double-quoted fields may contain commas,
/// newlines and doubled quotes. Accepts both \n and \r\n row endings.
inline std::vector<std::vector<std::string>> read_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  size_t line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty())
          throw ParseError("line " + std::to_string(line) + ": quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break; // consumed with the \n
        end_row();
        ++line;
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field at end of input");
  if (field_started || !row.empty()) end_row();
  return rows;
}

inline void write_csv_field(std::string& out, std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

} // namespace detail

/// Column mapping for CSV ingestion. With no id column, ids are synthesized
/// as 1-based data-row ordinals. With no attribute list, every column other
/// than id/timestamp/label becomes an attribute.
struct CsvColumns {
  std::optional<std::string> id;
  std::string timestamp = "timestamp";
  std::string label = "label";
  std::optional<std::vector<std::string>> attributes;
};

/// Parses CSV text into a flat event set (row order preserved).
inline std::vector<Event> parse_csv(std::string_view text, const CsvColumns& columns = {},
                                    std::string_view timestamp_format = kDefaultTimestampFormat) {
  auto rows = detail::read_csv_rows(text);
  if (rows.empty()) throw ParseError("CSV input has no header row");
  const auto& header = rows.front();
  auto column_index = [&](const std::string& name) -> size_t {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("CSV header has no column '" + name + "'");
  };
  size_t ts_col = column_index(columns.timestamp);
  size_t label_col = column_index(columns.label);
  std::optional<size_t> id_col;
  if (columns.id) id_col = column_index(*columns.id);

  std::vector<std::pair<std::string, size_t>> attr_cols;
  if (columns.attributes) {
    for (const auto& name : *columns.attributes) attr_cols.emplace_back(name, column_index(name));
  } else {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i == ts_col || i == label_col || (id_col && i == *id_col)) continue;
      attr_cols.emplace_back(header[i], i);
    }
  }

  std::vector<Event> events;
  std::set<EventId> seen_ids;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue; // trailing blank line
    auto field = [&](size_t col, const std::string& name) -> const std::string& {
      if (col >= row.size())
        throw ParseError("row " + std::to_string(r) + ": missing column '" + name + "'");
      return row[col];
    };
    Event ev;
    ev.id = id_col ? field(*id_col, *columns.id) : std::to_string(r);
    if (!seen_ids.insert(ev.id).second)
      throw ParseError("row " + std::to_string(r) + ": duplicate event id '" + ev.id + "'");
    try {
      ev.timestamp = parse_timestamp(field(ts_col, columns.timestamp), timestamp_format);
    } catch (const ParseError& e) {
      throw ParseError("row " + std::to_string(r) + ", column '" + columns.timestamp +
                       "': " + e.what());
    }
    ev.label = field(label_col, columns.label);
    for (const auto& [name, col] : attr_cols)
      ev.attributes.emplace_back(name, field(col, name));
    events.push_back(std::move(ev));
  }
  return events;
}

/// Serializes events losslessly (id, timestamp, label, attributes). Attribute
/// columns appear in first-seen order.
inline std::string write_csv(const std::vector<Event>& events,
                             std::string_view timestamp_format = kDefaultTimestampFormat) {
  std::vector<std::string> attr_names;
  for (const auto& ev : events)
    for (const auto& [k, v] : ev.attributes)
      if (std::find(attr_names.begin(), attr_names.end(), k) == attr_names.end())
        attr_names.push_back(k);

  std::string out = "id,timestamp,label";
  for (const auto& name : attr_names) {
    out.push_back(',');
    detail::write_csv_field(out, name);
  }
  out.push_back('\n');
  for (const auto& ev : events) {
    detail::write_csv_field(out, ev.id);
    out.push_back(',');
    detail::write_csv_field(out, format_timestamp(ev.timestamp, timestamp_format));
    out.push_back(',');
    detail::write_csv_field(out, ev.label);
    for (const auto& name : attr_names) {
      out.push_back(',');
      const std::string* v = ev.attribute(name);
      detail::write_csv_field(out, v ? *v : "");
    }
    out.push_back('\n');
  }
  return out;
}

inline std::string write_csv(const EventLog& log,
                             std::string_view timestamp_format = kDefaultTimestampFormat) {
  return write_csv(log.flat_events(), timestamp_format);
}

} // namespace timesplit

#endif // TIMESPLIT_CSV_HPP
