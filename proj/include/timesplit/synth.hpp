#ifndef TIMESPLIT_SYNTH_HPP
#define TIMESPLIT_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "timesplit/circstats.hpp"
#include "timesplit/eventlog.hpp"
#include "timesplit/mixture.hpp"

namespace timesplit {

/// One simulated sensor: a daily time-of-day profile (empty components mean
/// uniform) and a mean event count per day.
struct SensorSpec {
  std::string name;
  std::vector<VonMisesComponent> profile;
  double events_per_day = 1.0;
};

/// A synthetic smart-home-style log: per-day Poisson event counts, per-sensor
/// time profiles, and optionally a first-order Markov chain over sensor
/// identities.
struct SyntheticSpec {
  std::vector<SensorSpec> sensors;
  std::optional<std::vector<std::vector<double>>> markov; // row-stochastic
  std::optional<std::vector<double>> initial;             // defaults to uniform
  int days = 1;
  uint64_t seed = 0;
  int64_t start_day = 17897; // 2019-01-01

  void validate() const {
    if (sensors.empty()) throw ValidationError("synthetic spec: no sensors");
    if (days < 1) throw ValidationError("synthetic spec: days must be >= 1");
    for (const auto& s : sensors) {
      if (s.name.empty()) throw ValidationError("synthetic spec: sensor without a name");
      if (!(s.events_per_day > 0.0))
        throw ValidationError("synthetic spec: sensor '" + s.name +
                              "' needs events_per_day > 0");
      double wsum = 0.0;
      for (const auto& c : s.profile) {
        if (c.weight <= 0.0 || c.kappa < 0.0 || c.mean < 0.0 || c.mean >= kTwoPi)
          throw ValidationError("synthetic spec: bad mixture component for sensor '" +
                                s.name + "'");
        wsum += c.weight;
      }
      if (!s.profile.empty() && std::abs(wsum - 1.0) > 1e-9)
        throw ValidationError("synthetic spec: profile weights of sensor '" + s.name +
                              "' sum to " + std::to_string(wsum) + ", expected 1");
    }
    if (markov) {
      if (markov->size() != sensors.size())
        throw ValidationError("synthetic spec: markov matrix needs one row per sensor");
      for (size_t r = 0; r < markov->size(); ++r) {
        const auto& row = (*markov)[r];
        if (row.size() != sensors.size())
          throw ValidationError("synthetic spec: markov row " + std::to_string(r) +
                                " has wrong length");
        double sum = 0.0;
        for (double p : row) {
          if (p < 0.0)
            throw ValidationError("synthetic spec: negative markov probability in row " +
                                  std::to_string(r));
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw ValidationError("synthetic spec: markov row " + std::to_string(r) +
                                " sums to " + std::to_string(sum) + ", expected 1");
      }
    }
    if (initial) {
      if (initial->size() != sensors.size())
        throw ValidationError("synthetic spec: initial distribution has wrong length");
      double sum = 0.0;
      for (double p : *initial) {
        if (p < 0.0) throw ValidationError("synthetic spec: negative initial probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("synthetic spec: initial distribution sums to " +
                              std::to_string(sum) + ", expected 1");
    }
  }
};

namespace detail {

inline double sample_profile(Rng& rng, const std::vector<VonMisesComponent>& profile) {
  if (profile.empty()) return rng.uniform() * kTwoPi;
  double u = rng.uniform();
  double acc = 0.0;
  for (const auto& c : profile) {
    acc += c.weight;
    if (u < acc) return von_mises_draw(rng, c.mean, c.kappa);
  }
  return von_mises_draw(rng, profile.back().mean, profile.back().kappa);
}

inline size_t sample_index(Rng& rng, const std::vector<double>& probs) {
  double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline Timestamp day_time(int64_t day, double theta) {
  double seconds = radians_to_hours(theta) * 3600.0;
  auto whole = static_cast<int32_t>(seconds);
  if (whole > 86399) whole = 86399;
  auto nano = static_cast<int32_t>(std::llround((seconds - whole) * 1e9));
  if (nano >= 1000000000) {
    nano = 0;
    if (whole < 86399) ++whole;
  }
  return Timestamp{day, whole, nano};
}

} // namespace detail

/// Generates the log: per day, Poisson event counts with times drawn from the
/// sensor profiles (identities following the Markov chain when one is given),
/// partitioned into one trace per day. Deterministic per seed.
inline EventLog generate(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<Event> events;
  long next_id = 1;
  for (int d = 0; d < spec.days; ++d) {
    Rng rng(derive_seed(spec.seed, static_cast<uint64_t>(d)));
    int64_t day = spec.start_day + d;
    if (spec.markov) {
      double total_mean = 0.0;
      for (const auto& s : spec.sensors) total_mean += s.events_per_day;
      int count = rng.poisson(total_mean);
      std::vector<double> init = spec.initial ? *spec.initial
                                              : std::vector<double>(spec.sensors.size(),
                                                                    1.0 / spec.sensors.size());
      size_t state = 0;
      for (int e = 0; e < count; ++e) {
        state = e == 0 ? detail::sample_index(rng, init)
                       : detail::sample_index(rng, (*spec.markov)[state]);
        Event ev;
        ev.id = std::to_string(next_id++);
        ev.label = spec.sensors[state].name;
        ev.timestamp = detail::day_time(day, detail::sample_profile(rng, spec.sensors[state].profile));
        events.push_back(std::move(ev));
      }
    } else {
      for (const auto& sensor : spec.sensors) {
        int count = rng.poisson(sensor.events_per_day);
        for (int e = 0; e < count; ++e) {
          Event ev;
          ev.id = std::to_string(next_id++);
          ev.label = sensor.name;
          ev.timestamp = detail::day_time(day, detail::sample_profile(rng, sensor.profile));
          events.push_back(std::move(ev));
        }
      }
    }
  }
  PartitionSpec pspec;
  pspec.granularity = PartitionSpec::Granularity::Day;
  return partition(events, pspec);
}

} // namespace timesplit

#endif // TIMESPLIT_SYNTH_HPP
