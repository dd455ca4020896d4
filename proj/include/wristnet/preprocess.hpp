#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wristnet/activity_catalog.hpp"
#include "wristnet/network.hpp"
#include "wristnet/tensor.hpp"
#include "wristnet/training.hpp"

namespace wristnet {

inline constexpr double kTargetRateHz = 30.0;
// ml/min/kg of oxygen per MET.
inline constexpr double kVo2PerMet = 3.5;

struct Vo2Sample {
  double time_s = 0.0;
  double vo2 = 0.0;  // ml/min/kg

  friend bool operator==(const Vo2Sample&, const Vo2Sample&) = default;
};

struct ActivityBout {
  std::string activity;
  double sample_rate_hz = kTargetRateHz;
  Tensor samples;                // [n, 3] in g
  double start_time_s = 0.0;     // clock time of samples row 0
  std::vector<Vo2Sample> vo2;    // breath-by-breath, same clock; may be empty
  ClassFlags flags;

  friend bool operator==(const ActivityBout&, const ActivityBout&) = default;
};

struct Demographics {
  double age_years = 0.0;
  std::string sex;
  double bmi = 0.0;

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct ParticipantRecord {
  std::string id;
  std::vector<ActivityBout> bouts;
  std::optional<Demographics> demographics;

  friend bool operator==(const ParticipantRecord&, const ParticipantRecord&) = default;
};

using Dataset = std::vector<ParticipantRecord>;

struct WindowSample {
  Tensor values;  // [450, 3]
  ClassFlags labels;
  std::optional<double> met;
  std::string participant_id;
  std::string activity;

  friend bool operator==(const WindowSample&, const WindowSample&) = default;
};

enum class ResampleMethod { Fourier, Polyphase };

std::string to_string(ResampleMethod method);
ResampleMethod resample_method_from_string(const std::string& name);

// Downsamples each axis of [n, 3] to 30 Hz, giving round(n * 30 / rate)
// samples (at least one). Fourier: truncate the spectrum and invert.
// Polyphase: Kaiser-windowed sinc low-pass at the new Nyquist, then
// rational up/down sampling (integer rates only). A 30 Hz input is returned
// unchanged. Rates below 30 Hz raise UnsupportedRateError.
Tensor resample_to_30hz(const Tensor& samples, double rate_hz,
                        ResampleMethod method = ResampleMethod::Fourier);

struct WindowizeResult {
  std::vector<WindowSample> windows;
  std::size_t discarded_samples = 0;
};

// Consecutive non-overlapping 450-sample windows of a 30 Hz bout, in order.
// The trailing remainder is discarded; each window carries the bout's flags
// and `met`.
WindowizeResult windowize(const ActivityBout& bout, std::string_view participant_id,
                          std::optional<double> met);

// Steady-state MET from breath-by-breath VO2: a centered 30 s running mean
// (truncated at the series edges), averaged over the samples falling in
// [start + 120 s, start + 240 s], divided by 3.5.
double met_from_vo2(const std::vector<Vo2Sample>& series, double activity_start_s);

struct LabeledSets {
  std::vector<WindowSample> classification;  // the 29 typed activities
  std::vector<WindowSample> regression;      // all activities with a MET target
};

// Splits windows into the activity-type and energy-expenditure sets.
// Unknown activities, or flags disagreeing with the catalog, raise
// ValidationError naming the participant and activity.
LabeledSets label_windows(const std::vector<WindowSample>& windows);

// Binary (or MET) view of labeled windows for one task.
SampleSet task_view(const std::vector<WindowSample>& windows, Task task);

struct PreprocessOptions {
  ResampleMethod resample = ResampleMethod::Fourier;
};

struct PreprocessStats {
  std::size_t bouts = 0;
  std::size_t short_bouts = 0;  // fewer than 450 samples after resampling
  std::size_t discarded_samples = 0;
  std::map<std::string, std::size_t> windows_per_participant;
  std::map<std::string, std::size_t> windows_per_activity;
};

struct PreprocessResult {
  std::vector<WindowSample> windows;
  PreprocessStats stats;
};

// Resample, derive MET where VO2 is present, and window every bout.
PreprocessResult preprocess_dataset(const Dataset& dataset, const PreprocessOptions& options = {});

}  // namespace wristnet
