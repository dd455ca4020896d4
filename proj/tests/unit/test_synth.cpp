#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "wristnet/errors.hpp"
#include "wristnet/synth.hpp"

using namespace wristnet;

namespace {

// Power-weighted mean frequency of a 30 Hz window, averaged over axes.
// Each axis is mean-removed and Hann-tapered before a direct DFT.
double mean_spectral_frequency(const Tensor& w) {
  const std::size_t n = w.shape()[0];
  double weighted = 0.0, total = 0.0;
  for (std::size_t a = 0; a < kAxes; ++a) {
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) mean += w.at(t, a);
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / (n - 1));
      x[t] = (w.at(t, a) - mean) * hann;
    }
    for (std::size_t k = 1; k <= n / 2; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
        re += x[t] * std::cos(ang);
        im -= x[t] * std::sin(ang);
      }
      const double power = re * re + im * im;
      weighted += power * static_cast<double>(k) * kTargetRateHz / static_cast<double>(n);
      total += power;
    }
  }
  return weighted / total;
}

double peak_frequency(const Tensor& w) {
  const std::size_t n = w.shape()[0];
  double best = -1.0, best_f = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
      re += w.at(t, 0) * std::cos(ang);
      im -= w.at(t, 0) * std::sin(ang);
    }
    if (re * re + im * im > best) {
      best = re * re + im * im;
      best_f = static_cast<double>(k) * kTargetRateHz / static_cast<double>(n);
    }
  }
  return best_f;
}

struct Scored {
  double feature;
  bool positive;
};

// Depth-1 rule: sedentary iff the mean spectral frequency is below 0.5 Hz.
constexpr double kThresholdHz = 0.5;

double threshold_balanced_accuracy(const std::vector<Scored>& xs) {
  double tp = 0.0, pos = 0.0, tn = 0.0, neg = 0.0;
  for (const auto& s : xs) {
    const bool predicted = s.feature < kThresholdHz;
    if (s.positive) {
      pos += 1.0;
      tp += predicted;
    } else {
      neg += 1.0;
      tn += !predicted;
    }
  }
  return 0.5 * (tp / pos + tn / neg);
}

std::vector<Scored> sedentary_features(const SynthSpec& spec) {
  std::vector<Scored> out;
  for (const auto& w : preprocess_dataset(generate(spec)).windows) {
    if (w.labels.count() == 0) continue;
    out.push_back({mean_spectral_frequency(w.values), w.labels.sedentary});
  }
  return out;
}

SynthSpec small_spec(double noise) {
  SynthSpec spec;
  spec.n_participants = 6;
  spec.bouts_per_class = 2;
  spec.bout_seconds = 30.0;
  spec.seed = 21;
  set_noise(spec, noise);
  return spec;
}

}  // namespace

TEST_SUITE("synthdata") {

TEST_CASE("generation is deterministic under the seed") {
  auto spec = small_spec(0.01);
  spec.energy_only_bouts = 1;
  const auto a = generate(spec);
  CHECK(generate(spec) == a);
  spec.seed += 1;
  CHECK_FALSE(generate(spec) == a);
}

TEST_CASE("dataset layout") {
  auto spec = small_spec(0.0);
  spec.energy_only_bouts = 2;
  const auto ds = generate(spec);
  REQUIRE(ds.size() == 6);
  CHECK(ds[0].id == "P001");
  for (const auto& p : ds) {
    CHECK(p.bouts.size() == 3 * 2 + 2);
    for (const auto& b : p.bouts) {
      CHECK(b.sample_rate_hz == 100.0);
      CHECK(b.samples.shape() == std::vector<std::size_t>{3000, 3});
      CHECK(find_activity(b.activity) != nullptr);
      CHECK(find_activity(b.activity)->flags == b.flags);
    }
  }
}

TEST_CASE("zero-noise sedentary windows peak below 0.5 Hz") {
  const auto pre = preprocess_dataset(generate(small_spec(0.0)));
  std::size_t n = 0;
  for (const auto& w : pre.windows) {
    if (!w.labels.sedentary) continue;
    CHECK(peak_frequency(w.values) < 0.5);
    ++n;
  }
  CHECK(n == 6 * 2 * 2);
}

TEST_CASE("spectral threshold separates zero-noise classes") {
  const auto xs = sedentary_features(small_spec(0.0));
  std::size_t correct = 0;
  for (const auto& s : xs) correct += (s.feature < kThresholdHz) == s.positive;
  CHECK(static_cast<double>(correct) >= 0.99 * static_cast<double>(xs.size()));
}

TEST_CASE("separability falls as noise grows") {
  const double clean = threshold_balanced_accuracy(sedentary_features(small_spec(0.0)));
  const double mild = threshold_balanced_accuracy(sedentary_features(small_spec(0.005)));
  const double heavy = threshold_balanced_accuracy(sedentary_features(small_spec(0.01)));
  CHECK(clean > mild);
  CHECK(mild > heavy);
}

TEST_CASE("MET targets follow the amplitude model") {
  auto spec = small_spec(0.0);
  spec.energy_only_bouts = 1;
  for (const auto& p : generate(spec)) {
    for (const auto& b : p.bouts) {
      REQUIRE_FALSE(b.vo2.empty());
      const double vo2 = b.vo2.front().vo2;
      for (const auto& s : b.vo2) CHECK(s.vo2 == vo2);
      const double met = vo2 / kVo2PerMet;
      CHECK(met >= 1.0);
      CHECK(met <= 8.0);
      if (b.flags.lifestyle) continue;
      // Single-tone classes: the x-axis peak is the drawn amplitude.
      double peak = 0.0;
      for (std::size_t i = 0; i < b.samples.shape()[0]; ++i) peak = std::max(peak, std::abs(b.samples.at(i, 0)));
      CHECK(spec.met(peak) == doctest::Approx(met).epsilon(0.01));
    }
  }
  const auto pre = preprocess_dataset(generate(spec));
  for (const auto& w : pre.windows) REQUIRE(w.met.has_value());
}

TEST_CASE("MET model clamps to its range") {
  MetModel m;
  CHECK(m(0.0) == 1.0);
  CHECK(m(0.5) == 4.5);
  CHECK(m(2.0) == 8.0);
  CHECK(m(-1.0) == 1.0);
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  CHECK_NOTHROW(validate(spec));
  auto bad = spec;
  bad.lifestyle.freq_lo_hz = 0.3;
  CHECK_THROWS_AS(generate(bad), ValidationError);
  bad = spec;
  bad.locomotion.freq_hi_hz = 16.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = spec;
  bad.sample_rate_hz = 0.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = spec;
  bad.n_participants = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = spec;
  bad.sedentary.noise_sd_g = -0.1;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("spec json round trip") {
  auto spec = small_spec(0.03);
  spec.met.slope = 6.5;
  const auto j = to_json(spec);
  CHECK(to_json(synth_spec_from_json(j)) == j);
  auto extra = j;
  extra["colour"] = "red";
  CHECK_THROWS_AS(synth_spec_from_json(extra), ValidationError);
  CHECK_THROWS_AS(synth_spec_from_json(nlohmann::json::array()), ValidationError);
  auto wrong = j;
  wrong["n_participants"] = "many";
  CHECK_THROWS_AS(synth_spec_from_json(wrong), ValidationError);
}

}  // TEST_SUITE
