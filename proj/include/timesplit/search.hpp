#ifndef TIMESPLIT_SEARCH_HPP
#define TIMESPLIT_SEARCH_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "timesplit/circstats.hpp"
#include "timesplit/controlflow.hpp"
#include "timesplit/dip.hpp"
#include "timesplit/eventlog.hpp"
#include "timesplit/mixture.hpp"

namespace timesplit {

/// How a fitted cluster passes the goodness-of-fit gate.
enum class WatsonGate {
  ExceedsFittedCritical, // statistic above the fitted-parameters critical point
  NotRejected,           // classical acceptance: statistic within the asymptotic critical point
  BootstrapNotRejected,  // acceptance by bootstrap p-value
  Disabled,
};

struct PipelineConfig {
  double alpha = 0.01;
  size_t max_components = 8;
  double delta_bic = 10.0;
  uint64_t seed = 1;
  int rao_mc_samples = 999;
  int dip_bootstrap_samples = 999;
  int watson_bootstrap_samples = 999;
  EmOptions em;
  WatsonGate watson_gate = WatsonGate::ExceedsFittedCritical;
  VerdictMode verdict_mode = VerdictMode::Significance;
  bool with_end_token = true;
  bool stop_on_ig = false;
  size_t exhaustive_cap = 12;
  size_t min_cluster_size = 4;
};

/// How far a label made it through the pipeline; Eligible means every gate
/// passed.
enum class CandidateStage {
  SampleTooSmall,
  Uniform,        // spacing test did not reject uniformity
  Unimodal,       // dip test did not reject unimodality
  SingleCluster,  // BIC sweep kept one component
  FitFailed,
  GoodnessOfFit,  // some cluster failed the fit gate
  ControlFlow,    // verdict failed
  Eligible,
};

inline std::string_view to_string(CandidateStage stage) {
  switch (stage) {
    case CandidateStage::SampleTooSmall: return "sample-too-small";
    case CandidateStage::Uniform: return "uniform";
    case CandidateStage::Unimodal: return "unimodal";
    case CandidateStage::SingleCluster: return "single-cluster";
    case CandidateStage::FitFailed: return "fit-failed";
    case CandidateStage::GoodnessOfFit: return "goodness-of-fit";
    case CandidateStage::ControlFlow: return "control-flow";
    case CandidateStage::Eligible: return "eligible";
  }
  return "?";
}

/// A label's time-of-day angles with the owning event ids aligned to the
/// sorted sample.
struct LabelSample {
  CircularSample sample;
  std::vector<EventId> ids;
};

inline LabelSample label_time_sample(const EventLog& log, const std::string& label) {
  std::vector<std::pair<double, EventId>> points;
  for (const auto& trace : log.traces())
    for (const auto& ev : trace.events)
      if (ev.label == label)
        points.emplace_back(hours_to_radians(ev.timestamp.hour_of_day()), ev.id);
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  LabelSample out;
  std::vector<double> angles;
  angles.reserve(points.size());
  for (auto& [angle, id] : points) {
    angles.push_back(angle);
    out.ids.push_back(std::move(id));
  }
  out.sample = CircularSample::from_angles(std::move(angles));
  return out;
}

struct RefinementCandidate {
  std::string label;
  size_t sample_size = 0;
  CandidateStage stage = CandidateStage::SampleTooSmall;
  std::string note;
  std::optional<TestResult> rao;
  std::optional<TestResult> dip;
  std::optional<ModelSelectionRecord> selection;
  std::optional<VonMisesMixture> model;
  std::optional<ClusterAssignment> assignment;
  std::vector<TestResult> watson;       // one per cluster
  double watson_gate_critical = 0.0;
  bool watson_pass = false;
  RelabelingMap relabeling;
  std::map<EventId, int> id_assignment;
  std::optional<ControlFlowVerdict> verdict;
  bool eligible = false;

  bool clustered() const { return model.has_value(); }
};

namespace detail {

inline RelabelingMap make_relabeling(const std::string& label, size_t clusters,
                                     const std::vector<std::string>& alphabet) {
  std::set<std::string> taken(alphabet.begin(), alphabet.end());
  taken.erase(label);
  RelabelingMap map;
  map.covered_label = label;
  for (size_t k = 0; k < clusters; ++k) {
    std::string name = label + " " + std::to_string(k + 1);
    while (taken.count(name)) name += "'";
    taken.insert(name);
    map.refined.push_back(std::move(name));
  }
  return map;
}

} // namespace detail

/// Runs the statistical stages for one label: uniformity and unimodality
/// gates, BIC component selection, EM fit, cluster assignment, and the
/// per-cluster goodness-of-fit gate. Depends only on the label's timestamps,
/// so results stay valid however other labels get renamed.
inline RefinementCandidate analyze_label(const EventLog& log, const std::string& label,
                                         const PipelineConfig& config) {
  RefinementCandidate cand;
  cand.label = label;
  const uint64_t label_seed = derive_seed(config.seed, label);

  LabelSample ls = label_time_sample(log, label);
  cand.sample_size = ls.sample.n();
  if (cand.sample_size < 4 || cand.sample_size < 2 * config.min_cluster_size) {
    cand.stage = CandidateStage::SampleTooSmall;
    return cand;
  }

  cand.rao = rao_spacing_test(ls.sample, config.alpha, config.rao_mc_samples,
                              derive_seed(label_seed, "rao"));
  if (!cand.rao->reject) {
    cand.stage = CandidateStage::Uniform;
    return cand;
  }
  cand.dip = dip_test(ls.sample, config.alpha, config.dip_bootstrap_samples,
                      derive_seed(label_seed, "dip"));
  if (!cand.dip->reject) {
    cand.stage = CandidateStage::Unimodal;
    return cand;
  }

  try {
    cand.selection = select_components(ls.sample, config.max_components, config.delta_bic,
                                       derive_seed(label_seed, "em"), config.em);
  } catch (const Error& e) {
    cand.stage = CandidateStage::FitFailed;
    cand.note = e.what();
    return cand;
  }
  if (cand.selection->chosen < 2) {
    cand.stage = CandidateStage::SingleCluster;
    return cand;
  }

  cand.model = cand.selection->chosen_candidate().model;
  cand.assignment = assign(*cand.model, ls.sample);
  cand.relabeling = detail::make_relabeling(label, cand.model->size(), log.label_alphabet());
  for (size_t i = 0; i < ls.ids.size(); ++i)
    cand.id_assignment[ls.ids[i]] = cand.assignment->labels[i];

  cand.watson_gate_critical = config.watson_gate == WatsonGate::ExceedsFittedCritical
                                  ? watson_fitted_critical_value(config.alpha)
                                  : watson_critical_value(config.alpha);
  cand.watson_pass = true;
  for (size_t j = 0; j < cand.model->size(); ++j) {
    std::vector<double> pts;
    for (size_t i = 0; i < ls.sample.n(); ++i)
      if (cand.assignment->labels[i] == static_cast<int>(j))
        pts.push_back(ls.sample.angles()[i]);
    if (pts.size() < config.min_cluster_size) {
      cand.watson_pass = false;
      cand.note = "cluster " + std::to_string(j + 1) + " has too few events";
      continue;
    }
    auto cluster = CircularSample::from_angles(std::move(pts));
    WatsonOptions opts;
    opts.alpha = config.alpha;
    opts.bootstrap = config.watson_gate == WatsonGate::BootstrapNotRejected;
    opts.bootstrap_samples = config.watson_bootstrap_samples;
    opts.seed = derive_seed(label_seed, "watson" + std::to_string(j));
    auto res = watson_u2(cluster, VonMisesCdf(cand.model->components[j].mean,
                                              cand.model->components[j].kappa),
                         opts);
    switch (config.watson_gate) {
      case WatsonGate::ExceedsFittedCritical:
        cand.watson_pass &= res.statistic > cand.watson_gate_critical;
        break;
      case WatsonGate::NotRejected:
      case WatsonGate::BootstrapNotRejected:
        cand.watson_pass &= !res.reject;
        break;
      case WatsonGate::Disabled: break;
    }
    cand.watson.push_back(res);
  }
  cand.stage = cand.watson_pass ? CandidateStage::ControlFlow : CandidateStage::GoodnessOfFit;
  return cand;
}

/// Evaluates the ordering-statistics verdict of an already clustered
/// candidate against the given (possibly refined) log and finalizes
/// eligibility.
inline void evaluate_control_flow(const EventLog& log, RefinementCandidate& cand,
                                  const PipelineConfig& config) {
  if (!cand.clustered()) return;
  cand.verdict = evaluate_candidate(log, cand.relabeling, cand.id_assignment, config.alpha,
                                    config.verdict_mode, config.with_end_token);
  if (cand.stage == CandidateStage::ControlFlow || cand.stage == CandidateStage::Eligible)
    cand.stage = cand.verdict->pass ? CandidateStage::Eligible : CandidateStage::ControlFlow;
  cand.eligible = cand.watson_pass && cand.stage == CandidateStage::Eligible;
}

/// Runs the full pipeline for every label of the log. Per-label failures are
/// recorded on the candidate, never thrown.
inline std::vector<RefinementCandidate> generate_candidates(const EventLog& log,
                                                            const PipelineConfig& config) {
  std::vector<RefinementCandidate> out;
  for (const auto& label : log.label_alphabet()) {
    RefinementCandidate cand = analyze_label(log, label, config);
    evaluate_control_flow(log, cand, config);
    out.push_back(std::move(cand));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Refinement plans
// ---------------------------------------------------------------------------

enum class Strategy { AllAtOnce, Greedy, Beam, Exhaustive };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::AllAtOnce: return "all-at-once";
    case Strategy::Greedy: return "greedy";
    case Strategy::Beam: return "beam";
    case Strategy::Exhaustive: return "exhaustive";
  }
  return "?";
}

struct PlanStep {
  std::string label;
  RelabelingMap relabeling;
  std::map<EventId, int> assignment;
  double gain = 0.0; // information gain on the log this step was applied to
  double bits_before = 0.0;
  double bits_after = 0.0;
  std::vector<VonMisesComponent> components;
  std::vector<std::optional<CircularRange>> ranges;
};

struct RefinementPlan {
  Strategy strategy = Strategy::Greedy;
  size_t k = 0;
  std::optional<size_t> beam_size;
  std::vector<PlanStep> steps;
  bool stopped_early = false;
  double total_bits_start = 0.0;
  double total_bits_final = 0.0;

  /// (H0 - Hfinal) / H0: every strategy is compared on this one scale.
  double cumulative_gain() const {
    if (total_bits_start == 0.0) return 0.0;
    return (total_bits_start - total_bits_final) / total_bits_start;
  }

  std::vector<double> per_step_gain() const {
    std::vector<double> g;
    for (const auto& s : steps) g.push_back(s.gain);
    return g;
  }
};

/// Replays a plan: applying the steps in order reproduces the refined log.
inline EventLog apply_plan(const EventLog& log, const RefinementPlan& plan) {
  EventLog current = log;
  for (const auto& step : plan.steps)
    current = apply_refinement(current, step.relabeling, step.assignment);
  return current;
}

namespace detail {

inline PlanStep make_step(const RefinementCandidate& cand, double bits_before,
                          double bits_after) {
  PlanStep step;
  step.label = cand.label;
  step.relabeling = cand.relabeling;
  step.assignment = cand.id_assignment;
  step.bits_before = bits_before;
  step.bits_after = bits_after;
  step.gain = bits_before > 0.0 ? (bits_before - bits_after) / bits_before : 0.0;
  if (cand.model) step.components = cand.model->components;
  if (cand.assignment) step.ranges = cand.assignment->ranges;
  return step;
}

inline std::vector<const RefinementCandidate*> eligible_pool(
    const std::vector<RefinementCandidate>& candidates) {
  std::vector<const RefinementCandidate*> pool;
  for (const auto& c : candidates)
    if (c.eligible) pool.push_back(&c);
  std::sort(pool.begin(), pool.end(),
            [](const auto* a, const auto* b) { return a->label < b->label; });
  return pool;
}

} // namespace detail

/// Ranks eligible candidates by their information gain on the original log
/// and applies the top k in one sweep; ties break to the smaller label.
inline RefinementPlan strategy_all_at_once(const EventLog& log,
                                           const std::vector<RefinementCandidate>& candidates,
                                           size_t k, const PipelineConfig& config = {}) {
  if (k < 1) throw ValidationError("strategy_all_at_once: need k >= 1");
  RefinementPlan plan;
  plan.strategy = Strategy::AllAtOnce;
  plan.k = k;
  auto pool = detail::eligible_pool(candidates);
  std::stable_sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) {
    double ga = a->verdict ? a->verdict->information_gain : 0.0;
    double gb = b->verdict ? b->verdict->information_gain : 0.0;
    if (ga != gb) return ga > gb;
    return a->label < b->label;
  });
  size_t wanted = std::min(k, pool.size());
  EventLog current = log;
  double bits = total_entropy_bits(current, config.with_end_token);
  plan.total_bits_start = bits;
  for (const auto* cand : pool) {
    if (plan.steps.size() >= wanted) break;
    if (config.stop_on_ig && cand->verdict && cand->verdict->information_gain <= 0.0) {
      plan.stopped_early = true;
      break;
    }
    EventLog next = apply_refinement(current, cand->relabeling, cand->id_assignment);
    double next_bits = total_entropy_bits(next, config.with_end_token);
    plan.steps.push_back(detail::make_step(*cand, bits, next_bits));
    current = std::move(next);
    bits = next_bits;
  }
  plan.total_bits_final = bits;
  return plan;
}

/// Applies the best candidate by information gain, refines the log, and
/// iterates with gains recomputed on the refined log. The candidate pool and
/// its statistical gates are fixed on the original log; only the gain is
/// order sensitive (clusterings depend on timestamps alone, which relabeling
/// never changes).
inline RefinementPlan strategy_greedy(const EventLog& log,
                                      const std::vector<RefinementCandidate>& candidates,
                                      size_t k, const PipelineConfig& config) {
  if (k < 1) throw ValidationError("strategy_greedy: need k >= 1");
  RefinementPlan plan;
  plan.strategy = Strategy::Greedy;
  plan.k = k;
  auto pool = detail::eligible_pool(candidates);
  std::set<std::string> used;
  EventLog current = log;
  double bits = total_entropy_bits(current, config.with_end_token);
  plan.total_bits_start = bits;
  while (plan.steps.size() < k) {
    const RefinementCandidate* best = nullptr;
    EventLog best_log;
    double best_bits = 0.0, best_gain = 0.0;
    for (const auto* cand : pool) {
      if (used.count(cand->label)) continue;
      EventLog next = apply_refinement(current, cand->relabeling, cand->id_assignment);
      double next_bits = total_entropy_bits(next, config.with_end_token);
      double gain = bits > 0.0 ? (bits - next_bits) / bits : 0.0;
      if (!best || gain > best_gain) {
        best = cand;
        best_log = std::move(next);
        best_bits = next_bits;
        best_gain = gain;
      }
    }
    if (!best) break; // pool exhausted
    if (config.stop_on_ig && best_gain <= 0.0) {
      plan.stopped_early = true;
      break;
    }
    plan.steps.push_back(detail::make_step(*best, bits, best_bits));
    used.insert(best->label);
    current = std::move(best_log);
    bits = best_bits;
  }
  plan.total_bits_final = bits;
  return plan;
}

inline RefinementPlan strategy_greedy(const EventLog& log, size_t k,
                                      const PipelineConfig& config) {
  return strategy_greedy(log, generate_candidates(log, config), k, config);
}

/// Breadth-first search keeping the b best label sets per depth by cumulative
/// information gain. Orderings of one set produce the same refined log, so
/// states are deduplicated by set; sequences that cannot be extended are
/// carried forward. b = 1 reproduces the greedy plan.
inline RefinementPlan strategy_beam(const EventLog& log,
                                    const std::vector<RefinementCandidate>& candidates,
                                    size_t k, size_t b, const PipelineConfig& config) {
  if (k < 1) throw ValidationError("strategy_beam: need k >= 1");
  if (b < 1) throw ValidationError("strategy_beam: need beam size >= 1");
  RefinementPlan plan;
  plan.strategy = Strategy::Beam;
  plan.k = k;
  plan.beam_size = b;
  auto pool = detail::eligible_pool(candidates);
  const double start_bits = total_entropy_bits(log, config.with_end_token);
  plan.total_bits_start = start_bits;

  struct Node {
    std::vector<size_t> seq; // indices into pool, application order
    EventLog log;
    double bits;
    std::vector<double> step_bits; // bits after each step
  };
  std::vector<Node> level;
  level.push_back(Node{{}, log, start_bits, {}});
  bool pruned_by_stop = false;

  for (size_t depth = 0; depth < k; ++depth) {
    std::map<std::set<size_t>, Node> next_level;
    auto offer = [&](std::set<size_t> key, Node node) {
      auto it = next_level.find(key);
      if (it == next_level.end()) {
        next_level.emplace(std::move(key), std::move(node));
      } else if (node.seq < it->second.seq) {
        it->second = std::move(node); // same set, keep the lexicographic order
      }
    };
    bool extended_any = false;
    for (const auto& node : level) {
      bool extended = false;
      for (size_t ci = 0; ci < pool.size(); ++ci) {
        if (std::find(node.seq.begin(), node.seq.end(), ci) != node.seq.end()) continue;
        EventLog next = apply_refinement(node.log, pool[ci]->relabeling,
                                         pool[ci]->id_assignment);
        double next_bits = total_entropy_bits(next, config.with_end_token);
        double gain = node.bits > 0.0 ? (node.bits - next_bits) / node.bits : 0.0;
        if (config.stop_on_ig && gain <= 0.0) {
          pruned_by_stop = true;
          continue;
        }
        Node child{node.seq, std::move(next), next_bits, node.step_bits};
        child.seq.push_back(ci);
        child.step_bits.push_back(next_bits);
        std::set<size_t> key(child.seq.begin(), child.seq.end());
        offer(std::move(key), std::move(child));
        extended = true;
      }
      if (!extended) { // dead end; keep the sequence in the running
        std::set<size_t> key(node.seq.begin(), node.seq.end());
        offer(std::move(key), node);
      }
      extended_any |= extended;
    }
    if (!extended_any) break;
    std::vector<Node> pruned;
    pruned.reserve(next_level.size());
    for (auto& [key, node] : next_level) pruned.push_back(std::move(node));
    auto label_seq = [&](const Node& n) {
      std::vector<std::string> labels;
      for (size_t ci : n.seq) labels.push_back(pool[ci]->label);
      return labels;
    };
    std::sort(pruned.begin(), pruned.end(), [&](const Node& a, const Node& b2) {
      if (a.bits != b2.bits) return a.bits < b2.bits;
      return label_seq(a) < label_seq(b2);
    });
    if (pruned.size() > b) pruned.resize(b);
    level = std::move(pruned);
  }

  const Node* best = &level.front(); // level is sorted, or holds only the root
  for (const auto& node : level)
    if (node.bits < best->bits) best = &node;
  double bits = start_bits;
  for (size_t s = 0; s < best->seq.size(); ++s) {
    double after = best->step_bits[s];
    plan.steps.push_back(detail::make_step(*pool[best->seq[s]], bits, after));
    bits = after;
  }
  plan.total_bits_final = bits;
  plan.stopped_early = pruned_by_stop && plan.steps.size() < std::min(k, pool.size());
  return plan;
}

inline RefinementPlan strategy_beam(const EventLog& log, size_t k, size_t b,
                                    const PipelineConfig& config) {
  return strategy_beam(log, generate_candidates(log, config), k, b, config);
}

/// Evaluates every subset of up to k refinable labels on the jointly refined
/// log and keeps the best cumulative gain. Relabelings of distinct labels
/// commute, so subsets need one evaluation each and results are memoized by
/// label set.
inline RefinementPlan strategy_exhaustive(const EventLog& log,
                                          const std::vector<RefinementCandidate>& candidates,
                                          size_t k, const PipelineConfig& config) {
  if (k < 1) throw ValidationError("strategy_exhaustive: need k >= 1");
  RefinementPlan plan;
  plan.strategy = Strategy::Exhaustive;
  plan.k = k;
  auto pool = detail::eligible_pool(candidates);
  if (pool.size() > config.exhaustive_cap)
    throw CapacityError("exhaustive search over " + std::to_string(pool.size()) +
                        " refinable labels exceeds the cap of " +
                        std::to_string(config.exhaustive_cap) +
                        "; use the beam strategy instead");
  const double start_bits = total_entropy_bits(log, config.with_end_token);
  plan.total_bits_start = start_bits;

  const size_t p = pool.size();
  std::vector<size_t> best_set;
  double best_bits = start_bits;
  for (uint64_t mask = 1; mask < (uint64_t{1} << p); ++mask) {
    if (static_cast<size_t>(std::popcount(mask)) > k) continue;
    std::vector<size_t> set;
    for (size_t i = 0; i < p; ++i)
      if (mask & (uint64_t{1} << i)) set.push_back(i);
    EventLog current = log;
    for (size_t ci : set)
      current = apply_refinement(current, pool[ci]->relabeling, pool[ci]->id_assignment);
    double bits = total_entropy_bits(current, config.with_end_token);
    if (bits < best_bits - 1e-12 ||
        (std::abs(bits - best_bits) <= 1e-12 && !best_set.empty() &&
         set.size() < best_set.size())) {
      best_bits = bits;
      best_set = set;
    }
  }

  // Report the winning set in greedy marginal order; under the stopping
  // criterion trailing non-positive steps are dropped.
  EventLog current = log;
  double bits = start_bits;
  std::vector<size_t> remaining = best_set;
  while (!remaining.empty()) {
    size_t best_idx = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    EventLog best_log;
    double after_bits = 0.0;
    for (size_t r = 0; r < remaining.size(); ++r) {
      EventLog next = apply_refinement(current, pool[remaining[r]]->relabeling,
                                       pool[remaining[r]]->id_assignment);
      double nb = total_entropy_bits(next, config.with_end_token);
      double gain = bits > 0.0 ? (bits - nb) / bits : 0.0;
      if (gain > best_gain) {
        best_gain = gain;
        best_idx = r;
        best_log = std::move(next);
        after_bits = nb;
      }
    }
    if (config.stop_on_ig && best_gain <= 0.0) {
      plan.stopped_early = true;
      break;
    }
    plan.steps.push_back(detail::make_step(*pool[remaining[best_idx]], bits, after_bits));
    current = std::move(best_log);
    bits = after_bits;
    remaining.erase(remaining.begin() + static_cast<long>(best_idx));
  }
  plan.total_bits_final = bits;
  return plan;
}

inline RefinementPlan strategy_exhaustive(const EventLog& log, size_t k,
                                          const PipelineConfig& config) {
  return strategy_exhaustive(log, generate_candidates(log, config), k, config);
}

} // namespace timesplit

#endif // TIMESPLIT_SEARCH_HPP
