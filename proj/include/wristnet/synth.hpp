#pragma once

#include <cstdint>

#include "json.hpp"
#include "wristnet/preprocess.hpp"

namespace wristnet {

// Signal model of one activity class: per bout, a base frequency and an
// amplitude are drawn uniformly from their ranges. Broadband classes sum
// several components spread across the band instead of one sinusoid.
struct ClassSignalModel {
  double freq_lo_hz = 0.0;
  double freq_hi_hz = 0.0;
  double amp_lo_g = 0.0;
  double amp_hi_g = 0.0;
  double noise_sd_g = 0.0;
  bool broadband = false;
};

// MET = clamp(intercept + slope * amplitude, min_met, max_met).
struct MetModel {
  double intercept = 1.0;
  double slope = 7.0;
  double min_met = 1.0;
  double max_met = 8.0;

  double operator()(double amplitude_g) const;
};

struct SynthSpec {
  std::size_t n_participants = 20;
  std::size_t bouts_per_class = 1;
  std::size_t energy_only_bouts = 0;  // per participant, activities without a type
  double bout_seconds = 30.0;
  double sample_rate_hz = 100.0;
  double vo2_seconds = 300.0;
  double breath_interval_s = 3.0;
  ClassSignalModel sedentary{0.1, 0.4, 0.02, 0.10, 0.005, false};
  ClassSignalModel locomotion{1.5, 2.5, 0.50, 1.00, 0.005, false};
  ClassSignalModel lifestyle{0.6, 1.2, 0.20, 0.60, 0.005, true};
  ClassSignalModel energy_only{2.8, 3.5, 0.30, 0.90, 0.005, false};
  MetModel met;
  std::uint64_t seed = 0;
};

// Rejects overlapping frequency bands, nonpositive rates and durations, and
// bands above the Nyquist frequency.
void validate(const SynthSpec& spec);

// Applies `noise` to every class model.
void set_noise(SynthSpec& spec, double noise_sd_g);

// Tri-axial sinusoid-plus-noise bouts at spec.sample_rate_hz for every
// participant and class, each with a constant VO2 series of 3.5 * MET so the
// MET target is recovered exactly. Deterministic under spec.seed.
Dataset generate(const SynthSpec& spec);

nlohmann::json to_json(const SynthSpec& spec);
// Missing fields keep their defaults; unknown keys raise ValidationError.
SynthSpec synth_spec_from_json(const nlohmann::json& j);

}  // namespace wristnet
