#ifndef TIMESPLIT_MIXTURE_HPP
#define TIMESPLIT_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "timesplit/circstats.hpp"
#include "timesplit/common.hpp"

namespace timesplit {

// ---------------------------------------------------------------------------
// Mixture model types
// ---------------------------------------------------------------------------

struct VonMisesComponent {
  double weight = 1.0; // in (0, 1]
  double mean = 0.0;   // radians in [0, 2*pi)
  double kappa = 0.0;  // >= 0
};

struct VonMisesMixture {
  std::vector<VonMisesComponent> components;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  std::vector<double> loglik_trace; // one entry per EM iteration

  size_t size() const { return components.size(); }

  double pdf(double theta) const {
    double p = 0.0;
    for (const auto& c : components) p += c.weight * von_mises_pdf(theta, c.mean, c.kappa);
    return p;
  }

  double log_pdf(double theta) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : components)
      best = std::max(best, std::log(c.weight) + von_mises_log_pdf(theta, c.mean, c.kappa));
    double sum = 0.0;
    for (const auto& c : components)
      sum += std::exp(std::log(c.weight) + von_mises_log_pdf(theta, c.mean, c.kappa) - best);
    return best + std::log(sum);
  }

  /// CDF of the mixture anchored at F(0) = 0. Returns a reusable functor.
  VonMisesCdf component_cdf(size_t j) const {
    return VonMisesCdf(components.at(j).mean, components.at(j).kappa);
  }

  std::function<double(double)> cdf_function() const {
    std::vector<VonMisesCdf> cdfs;
    std::vector<double> w;
    cdfs.reserve(components.size());
    for (const auto& c : components) {
      cdfs.emplace_back(c.mean, c.kappa);
      w.push_back(c.weight);
    }
    return [cdfs = std::move(cdfs), w = std::move(w)](double theta) {
      double v = 0.0;
      for (size_t j = 0; j < cdfs.size(); ++j) v += w[j] * cdfs[j](theta);
      return std::clamp(v, 0.0, 1.0);
    };
  }
};

// ---------------------------------------------------------------------------
// Concentration estimation
// ---------------------------------------------------------------------------

/// Inverts A(kappa) = I1(kappa)/I0(kappa) = rbar. Closed-form start
/// kappa ~ rbar (2 - rbar^2) / (1 - rbar^2) (Banerjee et al. 2005), refined by
/// safeguarded Newton to |A(kappa) - rbar| <= 1e-8. Capped at `cap`.
inline double kappa_from_rbar(double rbar, double cap = 1e4) {
  if (rbar <= 0.0) return 0.0;
  if (rbar >= 1.0 - 1e-12) return cap;
  double kappa = rbar * (2.0 - rbar * rbar) / (1.0 - rbar * rbar);
  kappa = std::clamp(kappa, 1e-12, cap);
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 200; ++it) {
    double a = bessel_ratio(kappa);
    double f = a - rbar;
    if (std::abs(f) <= 1e-8) break;
    if (f > 0.0)
      hi = kappa;
    else
      lo = kappa;
    // A'(kappa) = 1 - A/kappa - A^2
    double deriv = kappa > 1e-8 ? 1.0 - a / kappa - a * a : 0.5;
    double next = deriv > 0.0 ? kappa - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    kappa = next;
    if (kappa >= cap) return cap;
  }
  return std::min(kappa, cap);
}

// ---------------------------------------------------------------------------
// EM fit
// ---------------------------------------------------------------------------

struct EmOptions {
  uint64_t seed = 0;
  double tol = 1e-6;
  int max_iter = 500;
  int restarts = 10;
  double kappa_cap = 1e4;
};

namespace detail {

struct Responsibilities {
  std::vector<double> r; // n x m, row-major; rows sum to 1
  double log_likelihood = 0.0;
};

inline Responsibilities e_step(const VonMisesMixture& model,
                               const std::vector<double>& angles) {
  const size_t n = angles.size(), m = model.size();
  Responsibilities out;
  out.r.resize(n * m);
  std::vector<double> logw(m), scaled(m);
  for (size_t j = 0; j < m; ++j) {
    const auto& c = model.components[j];
    logw[j] = std::log(c.weight) - std::log(kTwoPi * bessel_i0_scaled(c.kappa)) - c.kappa;
  }
  for (size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < m; ++j) {
      const auto& c = model.components[j];
      scaled[j] = logw[j] + c.kappa * std::cos(angles[i] - c.mean);
      best = std::max(best, scaled[j]);
    }
    double sum = 0.0;
    for (size_t j = 0; j < m; ++j) {
      scaled[j] = std::exp(scaled[j] - best);
      sum += scaled[j];
    }
    for (size_t j = 0; j < m; ++j) out.r[i * m + j] = scaled[j] / sum;
    out.log_likelihood += best + std::log(sum);
  }
  return out;
}

struct EmRun {
  VonMisesMixture model;
  bool degenerate = false;
};

inline EmRun em_single_run(const std::vector<double>& angles, size_t m, Rng& rng,
                           const EmOptions& opts) {
  const size_t n = angles.size();
  EmRun run;
  auto& model = run.model;
  model.components.resize(m);

  // Means at m distinct random sample points, unit concentration, equal weights.
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t j = 0; j < m; ++j) {
    size_t pick = j + rng.below(n - j);
    std::swap(idx[j], idx[pick]);
    model.components[j] = {1.0 / static_cast<double>(m), angles[idx[j]], 1.0};
  }

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    auto resp = e_step(model, angles);
    if (!std::isfinite(resp.log_likelihood)) {
      run.degenerate = true;
      return run;
    }
    model.log_likelihood = resp.log_likelihood;
    model.iterations = iter;
    model.loglik_trace.push_back(resp.log_likelihood);

    // M-step
    std::vector<double> mass(m, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < m; ++j) mass[j] += resp.r[i * m + j];
    for (size_t j = 0; j < m; ++j) {
      if (mass[j] < 1e-8) {
        run.degenerate = true;
        return run;
      }
    }
    std::vector<double> weights_col(n);
    for (size_t j = 0; j < m; ++j) {
      double sc = 0.0, ss = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double w = resp.r[i * m + j];
        sc += w * std::cos(angles[i]);
        ss += w * std::sin(angles[i]);
      }
      double rbar = std::sqrt(sc * sc + ss * ss) / mass[j];
      auto& c = model.components[j];
      c.weight = mass[j] / static_cast<double>(n);
      if (rbar > 1e-12) c.mean = normalize_angle(std::atan2(ss, sc));
      c.kappa = kappa_from_rbar(std::min(rbar, 1.0), opts.kappa_cap);
    }
    // Renormalize so the weights sum to one exactly.
    double wsum = 0.0;
    for (auto& c : model.components) wsum += c.weight;
    for (auto& c : model.components) c.weight /= wsum;

    if (model.log_likelihood - prev_ll < opts.tol && iter > 1) {
      model.converged = true;
      break;
    }
    prev_ll = model.log_likelihood;
  }
  return run;
}

} // namespace detail

/// Maximum-likelihood fit of an m-component von Mises mixture by EM; returns
/// the best of `restarts` randomly initialized runs. Runs that collapse a
/// component (responsibility mass < 1e-8) are discarded; all runs collapsing
/// is an error.
inline VonMisesMixture em_fit(const CircularSample& sample, size_t m,
                              const EmOptions& opts = {}) {
  const size_t n = sample.n();
  if (m < 1) throw ValidationError("em_fit: need m >= 1");
  if (n < 2 * m)
    throw ValidationError("em_fit: need n >= 2m (n=" + std::to_string(n) +
                          ", m=" + std::to_string(m) + ")");
  std::optional<VonMisesMixture> best;
  for (int restart = 0; restart < opts.restarts; ++restart) {
    Rng rng(derive_seed(opts.seed, static_cast<uint64_t>(restart)));
    auto run = detail::em_single_run(sample.angles(), m, rng, opts);
    if (run.degenerate) continue;
    if (!best || run.model.log_likelihood > best->log_likelihood)
      best = std::move(run.model);
  }
  if (!best)
    throw ValidationError("em_fit: all restarts degenerated (m=" + std::to_string(m) + ")");
  return *best;
}

// ---------------------------------------------------------------------------
// Model selection by BIC
// ---------------------------------------------------------------------------

struct ModelCandidate {
  size_t m = 0;
  double bic = 0.0;
  double log_lik = 0.0;
  size_t param_count = 0;
  size_t sample_size = 0;
  VonMisesMixture model;
};

/// BIC = -2 ln(L) + k ln(n) with k = 3m - 1 free parameters per mixture
/// (m means, m concentrations, m - 1 weights).
inline double bic_value(double log_lik, size_t m, size_t n) {
  return -2.0 * log_lik + static_cast<double>(3 * m - 1) * std::log(static_cast<double>(n));
}

inline ModelCandidate bic_entry(VonMisesMixture model, const CircularSample& sample) {
  ModelCandidate c;
  c.m = model.size();
  c.log_lik = model.log_likelihood;
  c.param_count = 3 * c.m - 1;
  c.sample_size = sample.n();
  c.bic = bic_value(c.log_lik, c.m, c.sample_size);
  c.model = std::move(model);
  return c;
}

struct ModelSelectionRecord {
  std::vector<ModelCandidate> candidates;
  size_t chosen = 0; // component count, not an index

  const ModelCandidate& chosen_candidate() const {
    for (const auto& c : candidates)
      if (c.m == chosen) return c;
    throw ValidationError("ModelSelectionRecord: chosen model missing");
  }
};

/// Sweeps m = 1, 2, ... while each extra component lowers BIC by more than
/// `delta_threshold`; keeps the last improving m. A failed fit at m ends the
/// sweep with the previous choice.
inline ModelSelectionRecord select_components(const CircularSample& sample, size_t max_m,
                                              double delta_threshold = 10.0,
                                              uint64_t seed = 0, EmOptions base = {}) {
  if (max_m < 1) throw ValidationError("select_components: need max_m >= 1");
  ModelSelectionRecord rec;
  double prev_bic = 0.0;
  for (size_t m = 1; m <= max_m; ++m) {
    if (sample.n() < 2 * m) break;
    EmOptions opts = base;
    opts.seed = derive_seed(seed, m);
    ModelCandidate entry;
    try {
      entry = bic_entry(em_fit(sample, m, opts), sample);
    } catch (const Error&) {
      break;
    }
    rec.candidates.push_back(std::move(entry));
    if (m == 1) {
      rec.chosen = 1;
    } else if (prev_bic - rec.candidates.back().bic > delta_threshold) {
      rec.chosen = m;
    } else {
      break;
    }
    prev_bic = rec.candidates.back().bic;
  }
  if (rec.candidates.empty())
    throw ValidationError("select_components: no model could be fitted");
  return rec;
}

// ---------------------------------------------------------------------------
// Cluster assignment
// ---------------------------------------------------------------------------

/// Circular interval; end may be numerically smaller than start when the arc
/// wraps through zero.
struct CircularRange {
  double start = 0.0; // radians
  double end = 0.0;
  double start_hours() const { return radians_to_hours(start); }
  double end_hours() const { return radians_to_hours(end); }
};

struct Arc {
  double start = 0.0; // radians, half-open [start, end) going counterclockwise
  double end = 0.0;
};

struct ClusterAssignment {
  std::vector<int> labels;              // per-sample component index
  std::vector<double> posterior;        // n x m row-major, rows sum to 1
  size_t m = 0;
  std::vector<size_t> counts;           // assigned points per component
  std::vector<std::optional<CircularRange>> ranges;
  std::vector<std::vector<Arc>> decision_arcs;

  double posterior_at(size_t i, size_t j) const { return posterior[i * m + j]; }
};

namespace detail {

inline std::optional<CircularRange> covering_arc(const std::vector<double>& pts) {
  if (pts.empty()) return std::nullopt;
  if (pts.size() == 1) return CircularRange{pts[0], pts[0]};
  // Complement of the largest gap between consecutive points (sorted input).
  double best_gap = kTwoPi - pts.back() + pts.front();
  size_t after = 0; // index following the largest gap
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double gap = pts[i + 1] - pts[i];
    if (gap > best_gap) {
      best_gap = gap;
      after = i + 1;
    }
  }
  size_t before = after == 0 ? pts.size() - 1 : after - 1;
  return CircularRange{pts[after], pts[before]};
}

inline double component_score(const VonMisesMixture& model, size_t j, double theta) {
  const auto& c = model.components[j];
  return std::log(c.weight) + c.kappa * (std::cos(theta - c.mean) - 1.0) -
         std::log(bessel_i0_scaled(c.kappa));
}

inline int argmax_component(const VonMisesMixture& model, double theta) {
  int best = 0;
  double best_score = component_score(model, 0, theta);
  for (size_t j = 1; j < model.size(); ++j) {
    double s = component_score(model, j, theta);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(j);
    }
  }
  return best;
}

/// Arcs of the circle on which each component wins the posterior argmax,
/// located on a grid and sharpened by bisection at the crossovers.
inline std::vector<std::vector<Arc>> decision_arcs(const VonMisesMixture& model) {
  const size_t m = model.size();
  std::vector<std::vector<Arc>> arcs(m);
  if (m == 1) {
    arcs[0].push_back(Arc{0.0, kTwoPi});
    return arcs;
  }
  constexpr int kGrid = 4096;
  std::vector<int> winner(kGrid);
  for (int g = 0; g < kGrid; ++g)
    winner[g] = argmax_component(model, kTwoPi * g / kGrid);

  std::vector<std::pair<double, int>> boundaries; // (crossover angle, winner after it)
  for (int g = 0; g < kGrid; ++g) {
    int next = (g + 1) % kGrid;
    if (winner[g] == winner[next]) continue;
    double lo = kTwoPi * g / kGrid, hi = kTwoPi * (g + 1) / kGrid;
    int a = winner[g], b = winner[next];
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      double diff = component_score(model, static_cast<size_t>(a), normalize_angle(mid)) -
                    component_score(model, static_cast<size_t>(b), normalize_angle(mid));
      (diff >= 0.0 ? lo : hi) = mid;
    }
    boundaries.emplace_back(normalize_angle(hi), b);
  }
  if (boundaries.empty()) {
    arcs[static_cast<size_t>(winner[0])].push_back(Arc{0.0, kTwoPi});
    return arcs;
  }
  std::sort(boundaries.begin(), boundaries.end());
  for (size_t i = 0; i < boundaries.size(); ++i) {
    double start = boundaries[i].first;
    double end = boundaries[(i + 1) % boundaries.size()].first;
    if (i + 1 == boundaries.size()) end += kTwoPi;
    arcs[static_cast<size_t>(boundaries[i].second)].push_back(
        Arc{start, end > kTwoPi ? end - kTwoPi : end});
  }
  return arcs;
}

} // namespace detail

/// Assigns each sample point to its maximum-posterior component (ties break to
/// the lowest index) and summarizes each cluster's circular extent.
inline ClusterAssignment assign(const VonMisesMixture& model, const CircularSample& sample) {
  if (model.size() < 1) throw ValidationError("assign: empty model");
  const size_t n = sample.n(), m = model.size();
  auto resp = detail::e_step(model, sample.angles());
  ClusterAssignment out;
  out.m = m;
  out.posterior = std::move(resp.r);
  out.labels.resize(n);
  out.counts.assign(m, 0);
  std::vector<std::vector<double>> pts(m);
  for (size_t i = 0; i < n; ++i) {
    int best = 0;
    for (size_t j = 1; j < m; ++j)
      if (out.posterior[i * m + j] > out.posterior[i * m + best]) best = static_cast<int>(j);
    out.labels[i] = best;
    out.counts[static_cast<size_t>(best)]++;
    pts[static_cast<size_t>(best)].push_back(sample.angles()[i]);
  }
  out.ranges.resize(m);
  for (size_t j = 0; j < m; ++j) out.ranges[j] = detail::covering_arc(pts[j]);
  out.decision_arcs = detail::decision_arcs(model);
  return out;
}

} // namespace timesplit

#endif // TIMESPLIT_MIXTURE_HPP
