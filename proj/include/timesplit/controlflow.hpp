#ifndef TIMESPLIT_CONTROLFLOW_HPP
#define TIMESPLIT_CONTROLFLOW_HPP

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "timesplit/eventlog.hpp"

namespace timesplit {

/// Synthetic successor label for trace ends. Reserved; real labels may not
/// use it while end-token accounting is on.
inline constexpr std::string_view kEndToken = "<end>";

/// Occurrence and directly-follows counts of a log. With the end token on,
/// every occurrence of b is followed by exactly one successor, so the
/// follows counts of b partition its occurrences.
struct DirectlyFollowsStats {
  std::map<std::string, long> activity_counts;
  std::map<std::pair<std::string, std::string>, long> follows; // #+ (b, c)
  bool with_end_token = true;

  long count(const std::string& label) const {
    auto it = activity_counts.find(label);
    return it == activity_counts.end() ? 0 : it->second;
  }

  long follows_count(const std::string& b, const std::string& c) const {
    auto it = follows.find({b, c});
    return it == follows.end() ? 0 : it->second;
  }

  /// #-(b, c): occurrences of b not directly followed by c.
  long not_follows_count(const std::string& b, const std::string& c) const {
    return count(b) - follows_count(b, c);
  }
};

inline DirectlyFollowsStats directly_follows(const EventLog& log, bool with_end_token = true) {
  DirectlyFollowsStats stats;
  stats.with_end_token = with_end_token;
  for (const auto& trace : log.traces()) {
    const auto& evs = trace.events;
    for (size_t i = 0; i < evs.size(); ++i) {
      if (with_end_token && evs[i].label == kEndToken)
        throw ValidationError("log uses the reserved end token label");
      stats.activity_counts[evs[i].label]++;
      if (i + 1 < evs.size())
        stats.follows[{evs[i].label, evs[i + 1].label}]++;
      else if (with_end_token)
        stats.follows[{evs[i].label, std::string(kEndToken)}]++;
    }
  }
  return stats;
}

/// Binary entropy in bits with H(0) = H(1) = 0.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Per-pair bits: count(b) * H2(#+(b,c) / count(b)). A pair with an even
/// split costs one bit per occurrence of b.
struct EntropyReport {
  std::map<std::pair<std::string, std::string>, double> per_pair_bits;
  double total_bits = 0.0;
};

inline EntropyReport total_entropy(const DirectlyFollowsStats& stats) {
  EntropyReport report;
  for (const auto& [pair, plus] : stats.follows) {
    long occurrences = stats.count(pair.first);
    double bits = static_cast<double>(occurrences) *
                  binary_entropy(static_cast<double>(plus) / static_cast<double>(occurrences));
    report.per_pair_bits[pair] = bits;
    report.total_bits += bits;
  }
  return report;
}

inline double total_entropy_bits(const EventLog& log, bool with_end_token = true) {
  return total_entropy(directly_follows(log, with_end_token)).total_bits;
}

/// Relative reduction of total directly-follows entropy caused by applying
/// the relabeling: (before - after) / before, or 0 on an entropy-free log.
/// Can be negative, since refined labels multiply the tracked pairs.
inline double information_gain(const EventLog& log, const RelabelingMap& map,
                               const std::map<EventId, int>& assignment,
                               bool with_end_token = true) {
  double before = total_entropy_bits(log, with_end_token);
  if (before == 0.0) return 0.0;
  double after = total_entropy_bits(apply_refinement(log, map, assignment), with_end_token);
  return (before - after) / before;
}

namespace detail {

/// Likelihood-ratio statistic G = 2 sum O ln(O/E) of a k x 2 table; rows with
/// zero totals are dropped. Returns G and the degrees of freedom.
inline std::pair<double, int> g_statistic(const std::vector<std::pair<long, long>>& rows) {
  long total = 0, col_plus = 0, col_minus = 0;
  int used_rows = 0;
  for (const auto& [p, m] : rows) {
    if (p + m == 0) continue;
    ++used_rows;
    col_plus += p;
    col_minus += m;
    total += p + m;
  }
  if (used_rows < 2 || total == 0) return {0.0, 0};
  double g = 0.0;
  for (const auto& [p, m] : rows) {
    long row_total = p + m;
    if (row_total == 0) continue;
    if (p > 0) {
      double expected = static_cast<double>(row_total) * col_plus / total;
      g += static_cast<double>(p) * std::log(static_cast<double>(p) / expected);
    }
    if (m > 0) {
      double expected = static_cast<double>(row_total) * col_minus / total;
      g += static_cast<double>(m) * std::log(static_cast<double>(m) / expected);
    }
  }
  return {std::max(0.0, 2.0 * g), used_rows - 1};
}

inline double chi_squared_upper_tail(double x, int df) {
  if (df <= 0 || x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

} // namespace detail

/// For every other activity c, tests whether the refined labels differ in how
/// often they are directly followed by c: a likelihood-ratio test on the
/// k x 2 table of (#+(a_i, c), #-(a_i, c)) against chi-square with k-1
/// degrees of freedom. Returns (c, p-value) pairs sorted by label.
inline std::vector<std::pair<std::string, double>> significance_test(
    const EventLog& log, const RelabelingMap& map, const std::map<EventId, int>& assignment,
    bool with_end_token = true) {
  if (map.refined.size() < 2)
    throw ValidationError("significance_test: need at least two refined labels");
  EventLog refined = apply_refinement(log, map, assignment);
  auto stats = directly_follows(refined, with_end_token);

  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : refined.label_alphabet()) {
    bool is_refined = false;
    for (const auto& name : map.refined) is_refined |= (c == name);
    if (is_refined) continue;
    std::vector<std::pair<long, long>> rows;
    for (const auto& name : map.refined)
      rows.emplace_back(stats.follows_count(name, c), stats.not_follows_count(name, c));
    auto [g, df] = detail::g_statistic(rows);
    out.emplace_back(c, df == 0 ? 1.0 : detail::chi_squared_upper_tail(g, df));
  }
  return out;
}

enum class VerdictMode { Significance, IgPositive, Both };

struct ControlFlowVerdict {
  double information_gain = 0.0;
  std::vector<std::pair<std::string, double>> significant_activities; // (label, p)
  double alpha = 0.01;
  VerdictMode mode = VerdictMode::Significance;
  bool pass = false;

  int significant_count() const {
    int k = 0;
    for (const auto& [label, p] : significant_activities)
      if (p < alpha) ++k;
    return k;
  }
};

/// Aggregates the information gain and the per-activity significance tests
/// into a single accept/reject verdict for a candidate relabeling.
inline ControlFlowVerdict evaluate_candidate(const EventLog& log, const RelabelingMap& map,
                                             const std::map<EventId, int>& assignment,
                                             double alpha = 0.01,
                                             VerdictMode mode = VerdictMode::Significance,
                                             bool with_end_token = true) {
  ControlFlowVerdict verdict;
  verdict.alpha = alpha;
  verdict.mode = mode;
  verdict.information_gain = information_gain(log, map, assignment, with_end_token);
  if (map.refined.size() >= 2)
    verdict.significant_activities = significance_test(log, map, assignment, with_end_token);
  bool any_significant = verdict.significant_count() > 0;
  bool ig_positive = verdict.information_gain > 0.0;
  switch (mode) {
    case VerdictMode::Significance: verdict.pass = any_significant; break;
    case VerdictMode::IgPositive: verdict.pass = ig_positive; break;
    case VerdictMode::Both: verdict.pass = any_significant && ig_positive; break;
  }
  return verdict;
}

} // namespace timesplit

#endif // TIMESPLIT_CONTROLFLOW_HPP
