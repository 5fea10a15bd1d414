#ifndef TIMESPLIT_XES_HPP
#define TIMESPLIT_XES_HPP

#include <sstream>
#include <string>
#include <string_view>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "timesplit/eventlog.hpp"

namespace timesplit {

namespace detail {

inline void append_xml_escaped(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c); break;
    }
  }
}

inline void append_xes_attribute(std::string& out, std::string_view element,
                                 std::string_view key, std::string_view value,
                                 std::string_view indent) {
  out += indent;
  out += '<';
  out += element;
  out += " key=\"";
  append_xml_escaped(out, key);
  out += "\" value=\"";
  append_xml_escaped(out, value);
  out += "\"/>\n";
}

} // namespace detail

/// Reads the XES subset used for interchange: log/trace/event elements with a
/// string "concept:name" and a date "time:timestamp" per event. Unknown
/// elements and extensions are ignored. Missing ids are synthesized as
/// "<trace index>-<event index>".
inline EventLog parse_xes(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("XES: malformed XML: ") + e.what());
  }
  auto log_node = tree.get_child_optional("log");
  if (!log_node) throw ParseError("XES: no <log> root element");

  std::vector<Trace> traces;
  size_t trace_index = 0;
  for (const auto& [tag, trace_node] : *log_node) {
    if (tag != "trace") continue;
    Trace trace;
    size_t event_index = 0;
    for (const auto& [etag, node] : trace_node) {
      if (etag == "string" &&
          node.get<std::string>("<xmlattr>.key", "") == "concept:name") {
        trace.key = node.get<std::string>("<xmlattr>.value", "");
        continue;
      }
      if (etag != "event") continue;
      Event ev;
      bool have_label = false, have_time = false;
      for (const auto& [atag, attr] : node) {
        if (atag == "<xmlattr>") continue;
        auto key = attr.get<std::string>("<xmlattr>.key", "");
        auto value = attr.get<std::string>("<xmlattr>.value", "");
        if (key == "concept:name") {
          ev.label = value;
          have_label = true;
        } else if (key == "time:timestamp") {
          try {
            ev.timestamp = parse_iso8601(value);
          } catch (const ParseError& e) {
            throw ParseError("XES: trace " + std::to_string(trace_index) + ", event " +
                             std::to_string(event_index) + ": " + e.what());
          }
          have_time = true;
        } else if (key == "id") {
          ev.id = value;
        } else {
          ev.attributes.emplace_back(key, value);
        }
      }
      if (!have_label)
        throw ParseError("XES: trace " + std::to_string(trace_index) + ", event " +
                         std::to_string(event_index) + ": missing concept:name");
      if (!have_time)
        throw ParseError("XES: trace " + std::to_string(trace_index) + ", event " +
                         std::to_string(event_index) + ": missing time:timestamp");
      if (ev.id.empty())
        ev.id = std::to_string(trace_index) + "-" + std::to_string(event_index);
      trace.events.push_back(std::move(ev));
      ++event_index;
    }
    if (trace.key.empty()) trace.key = "trace-" + std::to_string(trace_index);
    traces.push_back(std::move(trace));
    ++trace_index;
  }
  return EventLog::from_traces(std::move(traces));
}

/// Writes the same XES subset; concept:name and time:timestamp are emitted per
/// event, remaining attributes as string elements.
inline std::string write_xes(const EventLog& log) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<log xes.version=\"1.0\" xmlns=\"http://www.xes-standard.org/\">\n";
  for (const auto& trace : log.traces()) {
    out += "  <trace>\n";
    detail::append_xes_attribute(out, "string", "concept:name", trace.key, "    ");
    for (const auto& ev : trace.events) {
      out += "    <event>\n";
      detail::append_xes_attribute(out, "string", "concept:name", ev.label, "      ");
      detail::append_xes_attribute(out, "date", "time:timestamp",
                                   format_iso8601(ev.timestamp), "      ");
      detail::append_xes_attribute(out, "string", "id", ev.id, "      ");
      for (const auto& [k, v] : ev.attributes)
        detail::append_xes_attribute(out, "string", k, v, "      ");
      out += "    </event>\n";
    }
    out += "  </trace>\n";
  }
  out += "</log>\n";
  return out;
}

} // namespace timesplit

#endif // TIMESPLIT_XES_HPP
