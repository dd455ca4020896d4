#include "wristnet/preprocess.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <set>

#include <fftw3.h>

#include "wristnet/errors.hpp"

namespace wristnet {

namespace {

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> fourier_resample(const std::vector<double>& x, std::size_t out_len) {
  const auto n = x.size();
  const auto bins_in = n / 2 + 1;
  const auto bins_out = out_len / 2 + 1;

  std::vector<double> in = x;
  std::vector<fftw_complex> spectrum(bins_in);
  std::vector<fftw_complex> kept(bins_out);
  std::vector<double> out(out_len);
  fftw_plan forward;
  fftw_plan inverse;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), spectrum.data(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(out_len), kept.data(), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(forward);

  for (auto& c : kept) c[0] = c[1] = 0.0;
  const auto common = std::min(n, out_len);
  const auto copy = common / 2 + 1;
  for (std::size_t k = 0; k < copy && k < bins_out; ++k) {
    kept[k][0] = spectrum[k][0];
    kept[k][1] = spectrum[k][1];
  }
  // An even-length truncated spectrum keeps its new Nyquist bin once, so it
  // must carry both the positive and negative halves.
  if (common % 2 == 0 && out_len < n) {
    kept[common / 2][0] *= 2.0;
    kept[common / 2][1] *= 2.0;
  }
  fftw_execute(inverse);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  const double norm = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= norm;
  return out;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Kaiser-windowed low-pass with unit DC gain, cutoff `cutoff` in units of
// the Nyquist frequency.
std::vector<double> kaiser_lowpass(std::size_t taps, double cutoff, double beta) {
  std::vector<double> h(taps);
  const double centre = static_cast<double>(taps - 1) / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  for (std::size_t k = 0; k < taps; ++k) {
    const double m = static_cast<double>(k) - centre;
    const double r = 2.0 * static_cast<double>(k) / static_cast<double>(taps - 1) - 1.0;
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[k] = cutoff * sinc(cutoff * m) * window;
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (auto& v : h) v /= sum;
  return h;
}

std::vector<double> polyphase_resample(const std::vector<double>& x, std::size_t up,
                                       std::size_t down, std::size_t out_len) {
  const auto max_rate = std::max(up, down);
  const std::size_t half = 10 * max_rate;
  auto h = kaiser_lowpass(2 * half + 1, 1.0 / static_cast<double>(max_rate), 5.0);
  for (auto& v : h) v *= static_cast<double>(up);

  std::vector<double> y(out_len, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  for (std::size_t j = 0; j < out_len; ++j) {
    // y[j] = sum_i h[j*down + half - i*up] * x[i]
    const auto centre = static_cast<std::ptrdiff_t>(j * down + half);
    const auto lo = std::max<std::ptrdiff_t>(0, (centre - static_cast<std::ptrdiff_t>(2 * half) +
                                                 static_cast<std::ptrdiff_t>(up) - 1) /
                                                    static_cast<std::ptrdiff_t>(up));
    const auto hi = std::min<std::ptrdiff_t>(n - 1, centre / static_cast<std::ptrdiff_t>(up));
    double acc = 0.0;
    for (auto i = lo; i <= hi; ++i) {
      acc += h[static_cast<std::size_t>(centre - i * static_cast<std::ptrdiff_t>(up))] *
             x[static_cast<std::size_t>(i)];
    }
    y[j] = acc;
  }
  return y;
}

std::string bout_label(std::string_view participant, std::string_view activity) {
  return "participant '" + std::string(participant) + "', activity '" + std::string(activity) + "'";
}

}  // namespace

std::string to_string(ResampleMethod method) {
  return method == ResampleMethod::Fourier ? "fourier" : "polyphase";
}

ResampleMethod resample_method_from_string(const std::string& name) {
  if (name == "fourier") return ResampleMethod::Fourier;
  if (name == "polyphase") return ResampleMethod::Polyphase;
  throw ValidationError("unknown resampling method '" + name + "' (expected fourier or polyphase)");
}

Tensor resample_to_30hz(const Tensor& samples, double rate_hz, ResampleMethod method) {
  expect_rank(samples, 2, "resample input");
  if (!(rate_hz >= kTargetRateHz)) {
    throw UnsupportedRateError("sample rate " + std::to_string(rate_hz) +
                               " Hz is below 30 Hz; upsampling is not supported");
  }
  if (rate_hz == kTargetRateHz) return samples;

  const auto n = samples.dim(0);
  const auto axes = samples.dim(1);
  const auto out_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * kTargetRateHz / rate_hz)));

  std::size_t up = 0;
  std::size_t down = 0;
  if (method == ResampleMethod::Polyphase) {
    const double rounded = std::round(rate_hz);
    if (std::abs(rate_hz - rounded) > 1e-9) {
      throw UnsupportedRateError("polyphase resampling needs an integer rate, got " +
                                 std::to_string(rate_hz));
    }
    const auto rate = static_cast<std::size_t>(rounded);
    const auto g = std::gcd(rate, std::size_t{30});
    up = 30 / g;
    down = rate / g;
  }

  Tensor out({out_len, axes});
  std::vector<double> column(n);
  for (std::size_t a = 0; a < axes; ++a) {
    for (std::size_t i = 0; i < n; ++i) column[i] = samples.at(i, a);
    const auto y = method == ResampleMethod::Fourier ? fourier_resample(column, out_len)
                                                     : polyphase_resample(column, up, down, out_len);
    for (std::size_t i = 0; i < out_len; ++i) out.at(i, a) = y[i];
  }
  return out;
}

WindowizeResult windowize(const ActivityBout& bout, std::string_view participant_id,
                          std::optional<double> met) {
  if (bout.sample_rate_hz != kTargetRateHz) {
    throw ValidationError("windowize expects a 30 Hz bout, got " +
                          std::to_string(bout.sample_rate_hz) + " Hz for " +
                          bout_label(participant_id, bout.activity));
  }
  expect_rank(bout.samples, 2, "bout samples");
  if (bout.samples.dim(1) != kAxes) {
    throw DimensionError("bout samples must have 3 axes, got " + bout.samples.shape_string());
  }
  const auto n = bout.samples.dim(0);
  const auto count = n / kWindowLength;
  WindowizeResult r;
  r.discarded_samples = n - count * kWindowLength;
  r.windows.reserve(count);
  const auto stride = kWindowLength * kAxes;
  const auto data = bout.samples.values();
  for (std::size_t w = 0; w < count; ++w) {
    r.windows.push_back(WindowSample{Tensor({kWindowLength, kAxes}, data.subspan(w * stride, stride)),
                                     bout.flags, met, std::string(participant_id), bout.activity});
  }
  return r;
}

double met_from_vo2(const std::vector<Vo2Sample>& series, double activity_start_s) {
  constexpr double kHalfSmoothing = 15.0;
  constexpr double kSteadyFrom = 120.0;
  constexpr double kSteadyTo = 240.0;

  if (series.empty()) throw InsufficientDataError("VO2 series is empty");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!(series[i].vo2 > 0.0) || !std::isfinite(series[i].vo2)) {
      throw ValidationError("VO2 value " + std::to_string(series[i].vo2) + " at t=" +
                            std::to_string(series[i].time_s) + " s is not positive");
    }
    if (i > 0 && series[i].time_s < series[i - 1].time_s) {
      throw ValidationError("VO2 timestamps are not sorted at index " + std::to_string(i));
    }
  }
  const double from = activity_start_s + kSteadyFrom;
  const double to = activity_start_s + kSteadyTo;
  if (series.front().time_s > from || series.back().time_s < to) {
    throw InsufficientDataError("VO2 series must cover the 2-4 min steady-state window; it spans " +
                                std::to_string(series.front().time_s - activity_start_s) + " to " +
                                std::to_string(series.back().time_s - activity_start_s) +
                                " s after activity start");
  }

  std::size_t lo = 0;
  std::size_t hi = 0;
  double window_sum = 0.0;
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& s : series) {
    while (hi < series.size() && series[hi].time_s <= s.time_s + kHalfSmoothing) {
      window_sum += series[hi++].vo2;
    }
    while (series[lo].time_s < s.time_s - kHalfSmoothing) window_sum -= series[lo++].vo2;
    if (s.time_s >= from && s.time_s <= to) {
      total += window_sum / static_cast<double>(hi - lo);
      ++used;
    }
  }
  if (used == 0) throw InsufficientDataError("no VO2 samples inside the steady-state window");
  return total / static_cast<double>(used) / kVo2PerMet;
}

LabeledSets label_windows(const std::vector<WindowSample>& windows) {
  LabeledSets sets;
  for (const auto& w : windows) {
    const auto* info = find_activity(w.activity);
    if (!info) {
      throw ValidationError("unknown activity for " + bout_label(w.participant_id, w.activity));
    }
    if (info->flags != w.labels) {
      throw ValidationError("class flags disagree with the activity catalog for " +
                            bout_label(w.participant_id, w.activity));
    }
    if (!info->energy_only()) sets.classification.push_back(w);
    if (w.met) sets.regression.push_back(w);
  }
  return sets;
}

SampleSet task_view(const std::vector<WindowSample>& windows, Task task) {
  SampleSet out;
  for (const auto& w : windows) {
    if (is_classification(task)) {
      if (w.labels.count() != 1) continue;
      out.add(w.values, w.labels.for_task(task) ? 1.0 : 0.0);
    } else if (w.met) {
      out.add(w.values, *w.met);
    }
  }
  return out;
}

PreprocessResult preprocess_dataset(const Dataset& dataset, const PreprocessOptions& options) {
  PreprocessResult result;
  std::set<std::string> ids;
  for (const auto& p : dataset) {
    if (!ids.insert(p.id).second) throw ValidationError("duplicate participant id '" + p.id + "'");
    result.stats.windows_per_participant[p.id];
    for (const auto& bout : p.bouts) {
      const auto* info = find_activity(bout.activity);
      if (!info) throw ValidationError("unknown activity for " + bout_label(p.id, bout.activity));
      if (info->flags != bout.flags) {
        throw ValidationError("class flags disagree with the activity catalog for " +
                              bout_label(p.id, bout.activity));
      }
      ++result.stats.bouts;
      ActivityBout resampled = bout;
      resampled.samples = resample_to_30hz(bout.samples, bout.sample_rate_hz, options.resample);
      resampled.sample_rate_hz = kTargetRateHz;
      std::optional<double> met;
      if (!bout.vo2.empty()) met = met_from_vo2(bout.vo2, bout.start_time_s);
      auto w = windowize(resampled, p.id, met);
      if (w.windows.empty()) ++result.stats.short_bouts;
      result.stats.discarded_samples += w.discarded_samples;
      result.stats.windows_per_participant[p.id] += w.windows.size();
      result.stats.windows_per_activity[bout.activity] += w.windows.size();
      for (auto& win : w.windows) result.windows.push_back(std::move(win));
    }
  }
  return result;
}

}  // namespace wristnet
