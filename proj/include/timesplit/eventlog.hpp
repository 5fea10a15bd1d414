#ifndef TIMESPLIT_EVENTLOG_HPP
#define TIMESPLIT_EVENTLOG_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "timesplit/common.hpp"
#include "timesplit/timestamp.hpp"

namespace timesplit {

using EventId = std::string;

/// One timestamped, labeled record. Attributes keep their input order; the
/// equality relation treats them as an unordered map.
struct Event {
  EventId id;
  Timestamp timestamp;
  std::string label;
  std::vector<std::pair<std::string, std::string>> attributes;

  const std::string* attribute(std::string_view name) const {
    for (const auto& [k, v] : attributes)
      if (k == name) return &v;
    return nullptr;
  }

  friend bool operator==(const Event& a, const Event& b) {
    if (a.id != b.id || a.timestamp != b.timestamp || a.label != b.label) return false;
    auto sa = a.attributes, sb = b.attributes;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa == sb;
  }
};

/// Time-ordered events sharing one partition key.
struct Trace {
  std::string key;
  std::vector<Event> events;

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.key == b.key && a.events == b.events;
  }
};

/// An immutable set of traces. Construction validates id uniqueness and the
/// per-trace time ordering; instances are safe to share across readers.
class EventLog {
public:
  EventLog() = default;

  static EventLog from_traces(std::vector<Trace> traces) {
    std::set<EventId> ids;
    for (const auto& trace : traces) {
      const Event* prev = nullptr;
      for (const auto& ev : trace.events) {
        if (!ids.insert(ev.id).second)
          throw ValidationError("duplicate event id '" + ev.id + "'");
        if (prev && ev.timestamp < prev->timestamp)
          throw ValidationError("trace '" + trace.key + "' is not time-ordered at event '" +
                                ev.id + "'");
        prev = &ev;
      }
    }
    EventLog log;
    log.traces_ = std::move(traces);
    return log;
  }

  const std::vector<Trace>& traces() const { return traces_; }

  size_t event_count() const {
    size_t n = 0;
    for (const auto& t : traces_) n += t.events.size();
    return n;
  }

  /// Distinct labels, sorted.
  std::vector<std::string> label_alphabet() const {
    std::set<std::string> labels;
    for (const auto& t : traces_)
      for (const auto& e : t.events) labels.insert(e.label);
    return {labels.begin(), labels.end()};
  }

  bool has_label(std::string_view label) const {
    for (const auto& t : traces_)
      for (const auto& e : t.events)
        if (e.label == label) return true;
    return false;
  }

  std::vector<Event> flat_events() const {
    std::vector<Event> out;
    out.reserve(event_count());
    for (const auto& t : traces_)
      for (const auto& e : t.events) out.push_back(e);
    return out;
  }

  friend bool operator==(const EventLog& a, const EventLog& b) {
    return a.traces_ == b.traces_;
  }

private:
  std::vector<Trace> traces_;
};

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

struct PartitionSpec {
  enum class Granularity { Day, None };

  std::vector<std::string> key_attributes;
  Granularity granularity = Granularity::Day;
  int32_t day_boundary_sec = 0; // partition day starts at this time of day

  void validate() const {
    if (key_attributes.empty() && granularity == Granularity::None)
      throw ValidationError("PartitionSpec: need key attributes or day granularity");
    if (day_boundary_sec < 0 || day_boundary_sec >= 86400)
      throw ValidationError("PartitionSpec: day boundary out of range");
  }
};

/// Groups a flat event set into traces by (key attributes, calendar day).
/// Events within a trace are sorted by timestamp; equal timestamps keep their
/// input order. Trace order is lexicographic in (key values, day).
inline EventLog partition(const std::vector<Event>& events, const PartitionSpec& spec) {
  spec.validate();
  struct GroupKey {
    std::vector<std::string> values;
    int64_t day;
    auto operator<=>(const GroupKey&) const = default;
  };
  std::map<GroupKey, std::vector<size_t>> groups;
  for (size_t i = 0; i < events.size(); ++i) {
    const Event& ev = events[i];
    GroupKey key;
    for (const auto& name : spec.key_attributes) {
      const std::string* v = ev.attribute(name);
      if (!v)
        throw ValidationError("event '" + ev.id + "' is missing partition attribute '" +
                              name + "'");
      key.values.push_back(*v);
    }
    key.day = spec.granularity == PartitionSpec::Granularity::Day
                  ? ev.timestamp.day - (ev.timestamp.sec < spec.day_boundary_sec ? 1 : 0)
                  : 0;
    groups[key].push_back(i);
  }
  std::vector<Trace> traces;
  traces.reserve(groups.size());
  for (auto& [key, idxs] : groups) {
    std::stable_sort(idxs.begin(), idxs.end(), [&](size_t a, size_t b) {
      return events[a].timestamp < events[b].timestamp;
    });
    Trace t;
    for (const auto& v : key.values) {
      if (!t.key.empty()) t.key += '|';
      t.key += v;
    }
    if (spec.granularity == PartitionSpec::Granularity::Day) {
      if (!t.key.empty()) t.key += '|';
      t.key += format_civil_day(key.day);
    }
    for (size_t i : idxs) t.events.push_back(events[i]);
    traces.push_back(std::move(t));
  }
  return EventLog::from_traces(std::move(traces));
}

// ---------------------------------------------------------------------------
// Relabeling
// ---------------------------------------------------------------------------

/// Maps (covered label, cluster index) to refined label texts.
struct RelabelingMap {
  std::string covered_label;
  std::vector<std::string> refined; // index = cluster

  static RelabelingMap with_default_names(std::string label, size_t clusters) {
    RelabelingMap map;
    map.covered_label = std::move(label);
    for (size_t k = 0; k < clusters; ++k)
      map.refined.push_back(map.covered_label + " " + std::to_string(k + 1));
    return map;
  }
};

/// Relabels events of `map.covered_label` by their assigned cluster. Ids,
/// timestamps and trace structure are untouched. A map over a label absent
/// from the log returns the log unchanged.
inline EventLog apply_refinement(const EventLog& log, const RelabelingMap& map,
                                 const std::map<EventId, int>& assignment) {
  if (!log.has_label(map.covered_label)) return log;
  {
    std::set<std::string> seen;
    for (const auto& name : map.refined)
      if (!seen.insert(name).second)
        throw ValidationError("refined label '" + name + "' is not unique");
    for (const auto& label : log.label_alphabet())
      if (label != map.covered_label && seen.count(label))
        throw ValidationError("refined label '" + label + "' collides with an existing label");
  }
  std::vector<Trace> traces = log.traces();
  for (auto& trace : traces) {
    for (auto& ev : trace.events) {
      if (ev.label != map.covered_label) continue;
      auto it = assignment.find(ev.id);
      if (it == assignment.end())
        throw ValidationError("no cluster assigned to covered event '" + ev.id + "'");
      if (it->second < 0 || static_cast<size_t>(it->second) >= map.refined.size())
        throw ValidationError("cluster index out of range for event '" + ev.id + "'");
      ev.label = map.refined[static_cast<size_t>(it->second)];
    }
  }
  return EventLog::from_traces(std::move(traces));
}

/// True iff the fine log's labeling refines the coarse one: events sharing a
/// fine label always share their coarse label.
inline bool check_refinement_order(const EventLog& fine, const EventLog& coarse) {
  std::map<EventId, const Event*> coarse_by_id;
  for (const auto& t : coarse.traces())
    for (const auto& e : t.events) coarse_by_id[e.id] = &e;
  size_t fine_count = 0;
  std::map<std::string, std::string> fine_to_coarse;
  for (const auto& t : fine.traces()) {
    for (const auto& e : t.events) {
      ++fine_count;
      auto it = coarse_by_id.find(e.id);
      if (it == coarse_by_id.end())
        throw ValidationError("event id '" + e.id + "' missing from the coarse log");
      auto [pos, inserted] = fine_to_coarse.emplace(e.label, it->second->label);
      if (!inserted && pos->second != it->second->label) return false;
    }
  }
  if (fine_count != coarse_by_id.size())
    throw ValidationError("logs cover different event id sets");
  return true;
}

} // namespace timesplit

#endif // TIMESPLIT_EVENTLOG_HPP
