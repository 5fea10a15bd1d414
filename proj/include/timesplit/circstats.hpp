#ifndef TIMESPLIT_CIRCSTATS_HPP
#define TIMESPLIT_CIRCSTATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "timesplit/common.hpp"

namespace timesplit {

// ---------------------------------------------------------------------------
// Angle conversions
// ---------------------------------------------------------------------------

/// Maps an hour-of-day in [0, 24) onto the circle [0, 2*pi).
inline double hours_to_radians(double hours) {
  if (!(hours >= 0.0 && hours < 24.0))
    throw ValidationError("hours_to_radians: value " + std::to_string(hours) +
                          " outside [0, 24)");
  return hours * (kTwoPi / 24.0);
}

inline double radians_to_hours(double theta) { return theta * (24.0 / kTwoPi); }

/// Normalizes any angle to [0, 2*pi).
inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind, orders 0 and 1.
//
// Power series below the switchover, asymptotic expansion above it. The
// scaled variants e^(-x) I_v(x) stay finite for any concentration the EM
// machinery can visit.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kBesselSwitch = 15.0;

inline double bessel_series(double x, int order) {
  // I0: sum (x^2/4)^k / (k!)^2 ; I1: (x/2) * sum (x^2/4)^k / (k!(k+1)!)
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 600; ++k) {
    term *= q / (static_cast<double>(k) * (k + order));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return order == 0 ? sum : 0.5 * x * sum;
}

inline double bessel_asymptotic_scaled(double x, int order) {
  // e^-x I_v(x) ~ (2 pi x)^(-1/2) * sum_k t_k,  t_k = t_{k-1} ((2k-1)^2 - 4v^2) / (8 k x)
  const double mu = 4.0 * order * order;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    double num = (2.0 * k - 1.0) * (2.0 * k - 1.0) - mu;
    double next = term * num / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break; // divergent tail reached
    term = next;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-18) break;
  }
  return sum / std::sqrt(kTwoPi * x);
}

} // namespace detail

/// e^(-kappa) I0(kappa); finite for all kappa >= 0.
inline double bessel_i0_scaled(double kappa) {
  if (kappa < 0.0) throw ValidationError("bessel_i0_scaled: negative argument");
  if (kappa < detail::kBesselSwitch)
    return detail::bessel_series(kappa, 0) * std::exp(-kappa);
  return detail::bessel_asymptotic_scaled(kappa, 0);
}

/// e^(-kappa) I1(kappa).
inline double bessel_i1_scaled(double kappa) {
  if (kappa < 0.0) throw ValidationError("bessel_i1_scaled: negative argument");
  if (kappa < detail::kBesselSwitch)
    return detail::bessel_series(kappa, 1) * std::exp(-kappa);
  return detail::bessel_asymptotic_scaled(kappa, 1);
}

/// I0(kappa). Overflows to +inf past kappa ~ 709; intended for kappa <= 700.
inline double bessel_i0(double kappa) {
  if (kappa < 0.0) throw ValidationError("bessel_i0: negative argument");
  if (kappa < detail::kBesselSwitch) return detail::bessel_series(kappa, 0);
  return detail::bessel_asymptotic_scaled(kappa, 0) * std::exp(kappa);
}

inline double bessel_i1(double kappa) {
  if (kappa < 0.0) throw ValidationError("bessel_i1: negative argument");
  if (kappa < detail::kBesselSwitch) return detail::bessel_series(kappa, 1);
  return detail::bessel_asymptotic_scaled(kappa, 1) * std::exp(kappa);
}

inline double log_bessel_i0(double kappa) {
  return kappa + std::log(bessel_i0_scaled(kappa));
}

/// Mean resultant length of a von Mises distribution: A(kappa) = I1/I0.
inline double bessel_ratio(double kappa) {
  if (kappa == 0.0) return 0.0;
  return bessel_i1_scaled(kappa) / bessel_i0_scaled(kappa);
}

// ---------------------------------------------------------------------------
// von Mises density, distribution function and sampling
// ---------------------------------------------------------------------------

inline void check_circular_args(double theta, double mu, double kappa) {
  if (!(theta >= 0.0 && theta < kTwoPi))
    throw ValidationError("von Mises: theta outside [0, 2*pi)");
  if (!(mu >= 0.0 && mu < kTwoPi))
    throw ValidationError("von Mises: mu outside [0, 2*pi)");
  if (kappa < 0.0) throw ValidationError("von Mises: negative kappa");
}

/// pdf(theta | mu, kappa) = exp(kappa cos(theta - mu)) / (2 pi I0(kappa)),
/// evaluated in scaled form so large kappa does not overflow.
inline double von_mises_pdf(double theta, double mu, double kappa) {
  check_circular_args(theta, mu, kappa);
  return std::exp(kappa * (std::cos(theta - mu) - 1.0)) /
         (kTwoPi * bessel_i0_scaled(kappa));
}

inline double von_mises_log_pdf(double theta, double mu, double kappa) {
  return kappa * (std::cos(theta - mu) - 1.0) -
         std::log(kTwoPi * bessel_i0_scaled(kappa));
}

/// Distribution function of the von Mises law anchored at F(0) = 0, i.e. the
/// probability mass on [0, theta). Evaluated through the Fourier series
///   F(theta) = theta/(2 pi) + (1/pi) sum_j (I_j/I_0)(kappa) *
///              (sin(j(theta-mu)) + sin(j mu)) / j
/// with the Bessel ratios obtained by backward recurrence. Construction cost
/// is O(J); evaluations are O(J) with J growing like sqrt(kappa).
class VonMisesCdf {
public:
  VonMisesCdf(double mu, double kappa) : mu_(mu), kappa_(kappa) {
    if (!(mu >= 0.0 && mu < kTwoPi))
      throw ValidationError("VonMisesCdf: mu outside [0, 2*pi)");
    if (kappa < 0.0) throw ValidationError("VonMisesCdf: negative kappa");
    if (kappa_ < 1e-12) return; // uniform: series vanishes
    int terms = std::max(24, static_cast<int>(std::ceil(8.9 * std::sqrt(kappa_))) + 16);
    // Backward recurrence must start above both the term count and kappa.
    int lead = std::max(terms, static_cast<int>(std::ceil(kappa_)));
    int start = lead + 2 * static_cast<int>(std::sqrt(static_cast<double>(lead))) + 40;
    // Backward recurrence for t_j = I_j / I_{j-1}; forward products give I_j / I_0.
    std::vector<double> t(static_cast<size_t>(start) + 2, 0.0);
    for (int j = start; j >= 1; --j)
      t[static_cast<size_t>(j)] = 1.0 / (2.0 * j / kappa_ + t[static_cast<size_t>(j) + 1]);
    ratio_over_j_.resize(static_cast<size_t>(terms));
    double prod = 1.0;
    for (int j = 1; j <= terms; ++j) {
      prod *= t[static_cast<size_t>(j)];
      ratio_over_j_[static_cast<size_t>(j) - 1] = prod / j;
      if (prod < 1e-18) {
        ratio_over_j_.resize(static_cast<size_t>(j));
        break;
      }
    }
  }

  double operator()(double theta) const {
    if (!(theta >= 0.0 && theta <= kTwoPi))
      throw ValidationError("VonMisesCdf: theta outside [0, 2*pi]");
    double value = theta / kTwoPi;
    double d = theta - mu_;
    for (size_t j = 0; j < ratio_over_j_.size(); ++j) {
      double jj = static_cast<double>(j + 1);
      value += ratio_over_j_[j] * (std::sin(jj * d) + std::sin(jj * mu_)) / kPi;
    }
    return std::clamp(value, 0.0, 1.0);
  }

  double mu() const { return mu_; }
  double kappa() const { return kappa_; }

private:
  double mu_, kappa_;
  std::vector<double> ratio_over_j_; // (I_j/I_0)/j, j = 1..J
};

inline double von_mises_cdf(double theta, double mu, double kappa) {
  return VonMisesCdf(mu, kappa)(theta);
}

namespace detail {

/// One von Mises draw by the Best-Fisher (1979) rejection scheme.
inline double von_mises_draw(Rng& rng, double mu, double kappa) {
  if (kappa < 1e-9) return rng.uniform() * kTwoPi;
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  for (;;) {
    double u1 = rng.uniform();
    double z = std::cos(kPi * u1);
    double f = (1.0 + r * z) / (r + z);
    double c = kappa * (r - f);
    double u2 = rng.uniform();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      double u3 = rng.uniform();
      double theta = mu + (u3 < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
      return normalize_angle(theta);
    }
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Circular samples
// ---------------------------------------------------------------------------

/// A sorted sample of angles in [0, 2*pi).
class CircularSample {
public:
  CircularSample() = default;

  static CircularSample from_angles(std::vector<double> angles) {
    for (double a : angles)
      if (!(a >= 0.0 && a < kTwoPi))
        throw ValidationError("CircularSample: angle outside [0, 2*pi)");
    std::sort(angles.begin(), angles.end());
    CircularSample s;
    s.angles_ = std::move(angles);
    return s;
  }

  static CircularSample from_hours(const std::vector<double>& hours) {
    std::vector<double> angles;
    angles.reserve(hours.size());
    for (double h : hours) angles.push_back(hours_to_radians(h));
    return from_angles(std::move(angles));
  }

  size_t n() const { return angles_.size(); }
  bool empty() const { return angles_.empty(); }
  const std::vector<double>& angles() const { return angles_; }

  /// Empirical distribution function: fraction of angles <= theta.
  double ecdf(double theta) const {
    auto it = std::upper_bound(angles_.begin(), angles_.end(), theta);
    return static_cast<double>(it - angles_.begin()) / static_cast<double>(n());
  }

private:
  std::vector<double> angles_;
};

/// n i.i.d. von Mises draws, deterministic for a fixed seed. kappa = 0 gives
/// the circular uniform.
inline CircularSample von_mises_sample(double mu, double kappa, size_t n, uint64_t seed) {
  if (n < 1) throw ValidationError("von_mises_sample: n must be >= 1");
  if (kappa < 0.0) throw ValidationError("von_mises_sample: negative kappa");
  Rng rng(seed);
  std::vector<double> angles(n);
  for (double& a : angles) a = detail::von_mises_draw(rng, mu, kappa);
  return CircularSample::from_angles(std::move(angles));
}

// ---------------------------------------------------------------------------
// Circular mean and resultant length
// ---------------------------------------------------------------------------

struct CircularMean {
  double mean = 0.0; // in [0, 2*pi); 0 when degenerate
  double rbar = 0.0; // resultant length in [0, 1]
  bool degenerate = false;
};

inline CircularMean circular_mean_resultant(std::span<const double> angles,
                                            std::span<const double> weights = {}) {
  if (angles.empty())
    throw ValidationError("circular_mean_resultant: empty sample");
  if (!weights.empty() && weights.size() != angles.size())
    throw ValidationError("circular_mean_resultant: weight length mismatch");
  double sw = 0.0, sc = 0.0, ss = 0.0;
  for (size_t i = 0; i < angles.size(); ++i) {
    double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0) throw ValidationError("circular_mean_resultant: negative weight");
    sw += w;
    sc += w * std::cos(angles[i]);
    ss += w * std::sin(angles[i]);
  }
  if (sw <= 0.0) throw ValidationError("circular_mean_resultant: zero total weight");
  CircularMean out;
  out.rbar = std::sqrt(sc * sc + ss * ss) / sw;
  if (out.rbar < 1e-12) {
    out.rbar = 0.0;
    out.degenerate = true;
    out.mean = 0.0;
  } else {
    out.mean = normalize_angle(std::atan2(ss, sc));
  }
  return out;
}

inline CircularMean circular_mean_resultant(const CircularSample& sample,
                                            std::span<const double> weights = {}) {
  return circular_mean_resultant(std::span<const double>(sample.angles()), weights);
}

// ---------------------------------------------------------------------------
// Hypothesis test results
// ---------------------------------------------------------------------------

enum class TestMethod { RaoSpacing, HartiganDip, WatsonU2 };

struct TestResult {
  TestMethod method = TestMethod::RaoSpacing;
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<double> critical_value;
  double alpha = 0.01;
  bool reject = false;

  /// Degree-scale view of a radian statistic (conventional for spacing tables).
  double statistic_degrees() const { return statistic * (180.0 / kPi); }
};

// ---------------------------------------------------------------------------
// Rao's spacing test of circular uniformity
// ---------------------------------------------------------------------------

/// U = 1/2 sum |T_i - lambda| with lambda = 2 pi / n, T_i the sorted arc gaps
/// and T_n the wrap-around gap. Radians scale.
inline double rao_statistic(const CircularSample& sample) {
  size_t n = sample.n();
  if (n < 4) throw ValidationError("rao_statistic: need n >= 4");
  const auto& a = sample.angles();
  const double lambda = kTwoPi / static_cast<double>(n);
  double u = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) u += std::abs(a[i + 1] - a[i] - lambda);
  u += std::abs((kTwoPi - a[n - 1]) + a[0] - lambda);
  return 0.5 * u;
}

namespace detail {

inline double rao_statistic_of_sorted(std::vector<double>& a) {
  std::sort(a.begin(), a.end());
  const size_t n = a.size();
  const double lambda = kTwoPi / static_cast<double>(n);
  double u = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) u += std::abs(a[i + 1] - a[i] - lambda);
  u += std::abs((kTwoPi - a[n - 1]) + a[0] - lambda);
  return 0.5 * u;
}

} // namespace detail

/// Monte Carlo p-value: fraction of uniform samples of the same size whose
/// statistic is at least the observed one. Deterministic per seed.
inline TestResult rao_spacing_test(const CircularSample& sample, double alpha = 0.01,
                                   int mc_samples = 999, uint64_t seed = 0) {
  if (sample.n() < 4) throw ValidationError("rao_spacing_test: need n >= 4");
  if (mc_samples < 1) throw ValidationError("rao_spacing_test: mc_samples must be >= 1");
  TestResult res;
  res.method = TestMethod::RaoSpacing;
  res.alpha = alpha;
  res.statistic = rao_statistic(sample);
  Rng rng(derive_seed(seed, "rao-mc"));
  std::vector<double> draw(sample.n());
  int at_least = 0;
  for (int s = 0; s < mc_samples; ++s) {
    for (double& v : draw) v = rng.uniform() * kTwoPi;
    if (detail::rao_statistic_of_sorted(draw) >= res.statistic) ++at_least;
  }
  res.p_value = static_cast<double>(at_least) / static_cast<double>(mc_samples);
  res.reject = *res.p_value < alpha;
  return res;
}

// ---------------------------------------------------------------------------
// Watson U^2 goodness of fit
// ---------------------------------------------------------------------------

/// Computational form on sorted probability transforms u_i = F(theta_(i)):
/// U^2 = sum (u_i - (2i-1)/(2n))^2 - n (ubar - 1/2)^2 + 1/(12n).
inline double watson_u2_statistic(std::span<const double> u_sorted) {
  const size_t n = u_sorted.size();
  if (n < 1) throw ValidationError("watson_u2_statistic: empty sample");
  double sum_sq = 0.0, sum_u = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double quantile = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n));
    double d = u_sorted[i] - quantile;
    sum_sq += d * d;
    sum_u += u_sorted[i];
  }
  double ubar = sum_u / static_cast<double>(n);
  return sum_sq - static_cast<double>(n) * (ubar - 0.5) * (ubar - 0.5) +
         1.0 / (12.0 * static_cast<double>(n));
}

/// Asymptotic tail probability P(U^2 > x) = 2 sum_m (-1)^(m-1) exp(-2 m^2 pi^2 x).
inline double watson_u2_tail(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int m = 1; m <= 500; ++m) {
    double term = std::exp(-2.0 * m * m * kPi * kPi * x);
    sum += (m % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Upper critical point of the asymptotic U^2 distribution at level alpha.
inline double watson_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("watson_critical_value: alpha outside (0, 1)");
  double lo = 1e-6, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (watson_u2_tail(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Critical points for the fitted-parameters variant of the test (mean and
/// concentration estimated from the same sample, Lockhart-Stephens style
/// table). Used by the refinement pipeline's cluster gate.
inline double watson_fitted_critical_value(double alpha) {
  if (alpha == 0.01) return 0.141;
  if (alpha == 0.005) return 0.187;
  return watson_critical_value(alpha);
}

struct WatsonOptions {
  double alpha = 0.01;
  bool bootstrap = false; // p-value by sampling the null instead of the asymptotic series
  int bootstrap_samples = 999;
  uint64_t seed = 0;
};

/// Watson U^2 test of the sample against a fully specified circular CDF.
inline TestResult watson_u2(const CircularSample& sample,
                            const std::function<double(double)>& cdf,
                            const WatsonOptions& opts = {}) {
  const size_t n = sample.n();
  if (n < 1) throw ValidationError("watson_u2: empty sample");
  std::vector<double> u(n);
  for (size_t i = 0; i < n; ++i) u[i] = cdf(sample.angles()[i]);
  for (size_t i = 0; i < n; ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0))
      throw ValidationError("watson_u2: model CDF left [0, 1] on the sample");
    if (i > 0 && u[i] < u[i - 1])
      throw ValidationError("watson_u2: model CDF not monotone on the sample");
  }
  TestResult res;
  res.method = TestMethod::WatsonU2;
  res.alpha = opts.alpha;
  res.statistic = watson_u2_statistic(u);
  res.critical_value = watson_critical_value(opts.alpha);
  if (opts.bootstrap) {
    // Under the null the transforms are uniform order statistics, so the null
    // distribution of U^2 depends on n only.
    Rng rng(derive_seed(opts.seed, "watson-boot"));
    std::vector<double> draw(n);
    int at_least = 0;
    for (int b = 0; b < opts.bootstrap_samples; ++b) {
      for (double& v : draw) v = rng.uniform();
      std::sort(draw.begin(), draw.end());
      if (watson_u2_statistic(draw) >= res.statistic) ++at_least;
    }
    res.p_value = static_cast<double>(at_least) / static_cast<double>(opts.bootstrap_samples);
  } else {
    res.p_value = watson_u2_tail(res.statistic);
  }
  res.reject = *res.p_value < opts.alpha;
  return res;
}

} // namespace timesplit

#endif // TIMESPLIT_CIRCSTATS_HPP
