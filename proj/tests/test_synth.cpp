#include <catch2/catch_amalgamated.hpp>

#include "timesplit/csv.hpp"
#include "timesplit/search.hpp"
#include "timesplit/synth.hpp"
#include "timesplit/synth_spec.hpp"

using namespace timesplit;
using Catch::Approx;

namespace {

SyntheticSpec two_sensor_spec() {
  SyntheticSpec spec;
  spec.days = 30;
  spec.seed = 99;
  SensorSpec bimodal;
  bimodal.name = "door";
  bimodal.events_per_day = 12;
  bimodal.profile = {{0.6, hours_to_radians(7.0), 8.0}, {0.4, hours_to_radians(19.0), 8.0}};
  SensorSpec uniform;
  uniform.name = "hum";
  uniform.events_per_day = 8;
  spec.sensors = {bimodal, uniform};
  return spec;
}

} // namespace

TEST_CASE("generation is deterministic per seed", "[synth]") {
  auto spec = two_sensor_spec();
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(write_csv(a) == write_csv(b));
  spec.seed = 100;
  CHECK(write_csv(generate(spec)) != write_csv(a));
}

TEST_CASE("one trace per day", "[synth]") {
  auto spec = two_sensor_spec();
  auto log = generate(spec);
  CHECK(log.traces().size() == static_cast<size_t>(spec.days));
  for (const auto& trace : log.traces()) {
    const Event* prev = nullptr;
    for (const auto& ev : trace.events) {
      if (prev) CHECK(!(ev.timestamp < prev->timestamp));
      prev = &ev;
    }
  }
}

TEST_CASE("planted profiles reach the statistical tests", "[synth]") {
  auto spec = two_sensor_spec();
  spec.days = 60;
  auto log = generate(spec);

  auto door = label_time_sample(log, "door");
  CHECK(rao_spacing_test(door.sample, 0.01, 199, 1).reject);
  CHECK(dip_test(door.sample, 0.01, 199, 2).reject);

  auto hum = label_time_sample(log, "hum");
  CHECK_FALSE(rao_spacing_test(hum.sample, 0.01, 199, 3).reject);

  // The planted mixture's cdf fits its own draws.
  VonMisesCdf c0(hours_to_radians(7.0), 8.0);
  VonMisesCdf c1(hours_to_radians(19.0), 8.0);
  auto planted = [&](double t) { return 0.6 * c0(t) + 0.4 * c1(t); };
  auto res = watson_u2(door.sample, planted);
  CHECK_FALSE(res.reject);
}

TEST_CASE("markov mode follows the transition structure", "[synth]") {
  SyntheticSpec spec;
  spec.days = 40;
  spec.seed = 5;
  SensorSpec a{"a", {{1.0, hours_to_radians(8.0), 20.0}}, 3.0};
  SensorSpec b{"b", {{1.0, hours_to_radians(9.0), 20.0}}, 3.0};
  spec.sensors = {a, b};

  // An absorbing chain labels every event with the initial sensor.
  spec.markov = {{{1.0, 0.0}, {0.0, 1.0}}};
  spec.initial = {{1.0, 0.0}};
  auto stuck = generate(spec);
  CHECK(stuck.event_count() > 100);
  auto stats = directly_follows(stuck, false);
  CHECK(stats.count("a") == static_cast<long>(stuck.event_count()));
  CHECK(stats.count("b") == 0);

  // A strictly alternating chain starting at a keeps the counts within one
  // per day of each other.
  spec.markov = {{{0.0, 1.0}, {1.0, 0.0}}};
  auto alternating = generate(spec);
  auto stats2 = directly_follows(alternating, false);
  long ca = stats2.count("a"), cb = stats2.count("b");
  CHECK(ca >= cb);
  CHECK(ca - cb <= spec.days);
}

TEST_CASE("spec validation", "[synth]") {
  auto spec = two_sensor_spec();
  spec.sensors[0].profile[0].weight = 0.5; // weights now sum to 0.9
  CHECK_THROWS_AS(spec.validate(), ValidationError);

  auto spec2 = two_sensor_spec();
  spec2.days = 0;
  CHECK_THROWS_AS(spec2.validate(), ValidationError);

  auto spec3 = two_sensor_spec();
  spec3.markov = {{{0.5, 0.4}, {0.5, 0.5}}}; // first row sums to 0.9
  CHECK_THROWS_WITH(spec3.validate(), Catch::Matchers::ContainsSubstring("row 0"));

  auto spec4 = two_sensor_spec();
  spec4.sensors[1].events_per_day = 0.0;
  CHECK_THROWS_AS(spec4.validate(), ValidationError);
}

TEST_CASE("json spec parsing", "[synth]") {
  const char* text = R"({
    "seed": 7,
    "days": 3,
    "start_date": "2020-06-01",
    "sensors": [
      {"name": "door", "events_per_day": 6,
       "profile": {"type": "mixture", "components": [
         {"weight": 0.5, "mean_hours": 7.0, "kappa": 4.0},
         {"weight": 0.5, "mean_hours": 19.0, "kappa": 4.0}]}},
      {"name": "fan", "events_per_day": 2, "profile": {"type": "uniform"}}
    ],
    "markov": {"matrix": [[0.5, 0.5], [0.5, 0.5]]}
  })";
  auto spec = parse_synth_spec(text);
  CHECK(spec.seed == 7);
  CHECK(spec.days == 3);
  CHECK(spec.sensors.size() == 2);
  CHECK(spec.sensors[0].profile.size() == 2);
  CHECK(spec.sensors[0].profile[0].mean == Approx(hours_to_radians(7.0)));
  CHECK(spec.sensors[1].profile.empty());
  REQUIRE(spec.markov.has_value());
  CHECK(format_civil_day(spec.start_day) == "2020-06-01");

  CHECK_THROWS_AS(parse_synth_spec("{"), ParseError);
  CHECK_THROWS_WITH(parse_synth_spec(R"({"days": 2})"),
                    Catch::Matchers::ContainsSubstring("sensors"));
  CHECK_THROWS_WITH(
      parse_synth_spec(
          R"({"sensors": [{"name": "x", "events_per_day": 1}], "markov": {"matrix": [[0.9]]}})"),
      Catch::Matchers::ContainsSubstring("row 0"));
}

TEST_CASE("planted mixture draws match their cdf across seeds", "[synth]") {
  // Large planted samples pass the goodness-of-fit test against the planted
  // distribution in nearly every seed.
  int ok = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    SyntheticSpec spec;
    spec.days = 1;
    spec.seed = 1000 + s;
    spec.sensors = {{"x", {{0.7, 2.0, 5.0}, {0.3, 5.0, 2.0}}, 5000.0}};
    auto log = generate(spec);
    auto ls = label_time_sample(log, "x");
    VonMisesCdf c0(2.0, 5.0), c1(5.0, 2.0);
    auto cdf = [&](double t) { return 0.7 * c0(t) + 0.3 * c1(t); };
    if (!watson_u2(ls.sample, cdf).reject) ++ok;
  }
  CHECK(ok >= 38); // >= 95%
}
