#ifndef TIMESPLIT_DIP_HPP
#define TIMESPLIT_DIP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "timesplit/circstats.hpp"
#include "timesplit/common.hpp"

namespace timesplit {

namespace detail {

// Hull machinery for the dip statistic. Both hulls are built over the points
// (x_i, i); the +-1 count offsets between the empirical cdf's upper and lower
// step values enter in the deviation formulas, not in the hull shapes.
// Slope comparisons are cross-multiplied so tied x values never divide by zero.

inline void lower_convex_hull(std::span<const double> x, size_t lo, size_t hi,
                              std::vector<size_t>& out) {
  out.clear();
  for (size_t i = lo; i <= hi; ++i) {
    while (out.size() >= 2) {
      size_t a = out[out.size() - 2], b = out.back();
      // pop b when slope(a,b) >= slope(b,i)
      double lhs = static_cast<double>(b - a) * (x[i] - x[b]);
      double rhs = static_cast<double>(i - b) * (x[b] - x[a]);
      if (lhs >= rhs)
        out.pop_back();
      else
        break;
    }
    out.push_back(i);
  }
}

inline void upper_concave_hull(std::span<const double> x, size_t lo, size_t hi,
                               std::vector<size_t>& out) {
  out.clear();
  for (size_t i = lo; i <= hi; ++i) {
    while (out.size() >= 2) {
      size_t a = out[out.size() - 2], b = out.back();
      // pop b when slope(a,b) <= slope(b,i)
      double lhs = static_cast<double>(b - a) * (x[i] - x[b]);
      double rhs = static_cast<double>(i - b) * (x[b] - x[a]);
      if (lhs <= rhs)
        out.pop_back();
      else
        break;
    }
    out.push_back(i);
  }
}

// Value of the hull curve at x[q] for the segment [s, t]; `top` selects which
// end to report on a vertical segment.
inline double hull_value_at(std::span<const double> x, size_t s, size_t t, size_t q,
                            bool top) {
  if (x[t] == x[s]) return static_cast<double>(top ? t : s);
  return static_cast<double>(s) +
         (x[q] - x[s]) * static_cast<double>(t - s) / (x[t] - x[s]);
}

// Largest deviation, in counts, of the empirical cdf's upper step values above
// the convex-minorant curve between consecutive touch indices in `hull`
// restricted to touches <= cap.
inline double gcm_deviation(std::span<const double> x, const std::vector<size_t>& hull,
                            size_t cap) {
  double dev = 1.0;
  for (size_t seg = 0; seg + 1 < hull.size() && hull[seg] < cap; ++seg) {
    size_t s = hull[seg], t = std::min(hull[seg + 1], cap);
    if (t <= s + 1 || x[t] == x[s]) continue;
    double slope = static_cast<double>(t - s) / (x[t] - x[s]);
    for (size_t i = s; i <= t; ++i) {
      double d = static_cast<double>(i - s + 1) - (x[i] - x[s]) * slope;
      if (d > dev) dev = d;
    }
  }
  return dev;
}

// Mirror image for the concave majorant: deviation of the curve above the
// lower step values, over touches >= cap.
inline double lcm_deviation(std::span<const double> x, const std::vector<size_t>& hull,
                            size_t cap) {
  double dev = 1.0;
  for (size_t seg = 0; seg + 1 < hull.size(); ++seg) {
    if (hull[seg + 1] <= cap) continue;
    size_t s = std::max(hull[seg], cap), t = hull[seg + 1];
    if (t <= s + 1 || x[t] == x[s]) continue;
    double slope = static_cast<double>(t - s) / (x[t] - x[s]);
    for (size_t i = s; i <= t; ++i) {
      double d = (x[i] - x[s]) * slope - static_cast<double>(i - s - 1);
      if (d > dev) dev = d;
    }
  }
  return dev;
}

} // namespace detail

/// Hartigan-Hartigan dip statistic of a sorted sample: the smallest sup-norm
/// distance between the empirical cdf and any unimodal distribution function.
/// Iteratively shrinks a candidate modal interval, comparing the greatest
/// convex minorant against the least concave majorant (Ann. Statist. 13, 1985).
inline double dip_statistic_sorted(std::span<const double> x) {
  const size_t n = x.size();
  if (n <= 1) return 0.0;
  if (!(x.front() <= x.back()))
    throw ValidationError("dip_statistic_sorted: sample not sorted");
  if (x.front() == x.back()) return 0.0;
  if (n == 2) return 0.25;
  if (n == 3) {
    // Exact small-sample values: any tie forces 1/3, distinct points give 1/6.
    return (x[0] == x[1] || x[1] == x[2]) ? 1.0 / 3.0 : 1.0 / 6.0;
  }

  size_t low = 0, high = n - 1;
  double best = 1.0; // count scale; final statistic is best / (2n)
  std::vector<size_t> gcm, lcm;

  for (;;) {
    detail::lower_convex_hull(x, low, high, gcm);
    detail::upper_concave_hull(x, low, high, lcm);

    // Largest gap between the concave majorant (upper step values, y = i+1)
    // and the convex minorant (lower step values, y = i). The maximum of the
    // piecewise-linear difference sits at a touch point of one of the hulls.
    double d = 0.0;
    size_t new_low = low, new_high = high;
    {
      size_t seg = 0; // lcm segment containing the current gcm touch
      for (size_t g : gcm) {
        while (lcm[seg + 1] < g) ++seg;
        double up = detail::hull_value_at(x, lcm[seg], lcm[seg + 1], g, true) + 1.0;
        double gap = up - static_cast<double>(g);
        if (gap > d) {
          d = gap;
          new_low = g;
          new_high = lcm[seg + 1];
        }
      }
    }
    {
      size_t seg = 0;
      for (size_t v : lcm) {
        while (gcm[seg + 1] < v) ++seg;
        double down = detail::hull_value_at(x, gcm[seg], gcm[seg + 1], v, false);
        double gap = static_cast<double>(v) + 1.0 - down;
        if (gap > d) {
          d = gap;
          new_low = gcm[seg];
          new_high = v;
        }
      }
    }

    if (d <= best) break;

    // Close out the parts left outside the shrunken modal interval.
    double dl = detail::gcm_deviation(x, gcm, new_low);
    double du = detail::lcm_deviation(x, lcm, new_high);
    best = std::max({best, dl, du});
    if (new_low == low && new_high == high) break;
    low = new_low;
    high = new_high;
  }
  return best / (2.0 * static_cast<double>(n));
}

inline double dip_statistic(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return dip_statistic_sorted(values);
}

/// Circular dip: the minimum linear dip over the n rotations that cut the
/// circle at each observed point, making the result rotation invariant.
inline double circular_dip_statistic(const CircularSample& sample) {
  const auto& a = sample.angles();
  const size_t n = a.size();
  if (n <= 1) return 0.0;
  std::vector<double> rot(n);
  double best = 1.0;
  for (size_t cut = 0; cut < n; ++cut) {
    for (size_t i = 0; i < n; ++i) {
      size_t idx = cut + i;
      rot[i] = idx < n ? a[idx] : a[idx - n] + kTwoPi;
    }
    best = std::min(best, dip_statistic_sorted(rot));
  }
  return best;
}

/// Unimodality test: circular dip with a bootstrap p-value against the
/// circular uniform null of the same sample size. Deterministic per seed.
inline TestResult dip_test(const CircularSample& sample, double alpha = 0.01,
                           int bootstrap_samples = 999, uint64_t seed = 0) {
  if (sample.n() < 4) throw ValidationError("dip_test: need n >= 4");
  if (bootstrap_samples < 1)
    throw ValidationError("dip_test: bootstrap_samples must be >= 1");
  TestResult res;
  res.method = TestMethod::HartiganDip;
  res.alpha = alpha;
  res.statistic = circular_dip_statistic(sample);
  Rng rng(derive_seed(seed, "dip-boot"));
  std::vector<double> draw(sample.n());
  int at_least = 0;
  for (int b = 0; b < bootstrap_samples; ++b) {
    for (double& v : draw) v = rng.uniform() * kTwoPi;
    std::sort(draw.begin(), draw.end());
    CircularSample boot;
    // angles are already valid and sorted; reuse the public constructor path
    boot = CircularSample::from_angles(draw);
    if (circular_dip_statistic(boot) >= res.statistic) ++at_least;
  }
  res.p_value = static_cast<double>(at_least) / static_cast<double>(bootstrap_samples);
  res.reject = *res.p_value < alpha;
  return res;
}

} // namespace timesplit

#endif // TIMESPLIT_DIP_HPP
