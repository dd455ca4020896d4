#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support/tempdir.hpp"
#include "wristnet/activity_catalog.hpp"
#include "wristnet/dataset_io.hpp"
#include "wristnet/errors.hpp"
#include "wristnet/preprocess.hpp"
#include "wristnet/window_archive.hpp"

using namespace wristnet;

namespace {

constexpr double kPi = std::numbers::pi;

Tensor sinusoid(std::size_t n, double rate, double freq, double amp, double phase = 0.0) {
  Tensor t({n, 3});
  for (std::size_t i = 0; i < n; ++i) {
    const double v = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate + phase);
    t.at(i, 0) = v;
    t.at(i, 1) = 0.5 * v;
    t.at(i, 2) = -v;
  }
  return t;
}

// Single-sided amplitude spectrum of one axis by direct DFT.
std::vector<double> dft_amplitudes(const Tensor& x, std::size_t axis, std::size_t from, std::size_t n) {
  std::vector<double> amp(n / 2 + 1);
  for (std::size_t k = 0; k < amp.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x.at(from + i, axis) * std::polar(1.0, -2.0 * kPi * k * i / static_cast<double>(n));
    }
    amp[k] = std::abs(acc) * (k == 0 || 2 * k == n ? 1.0 : 2.0) / static_cast<double>(n);
  }
  return amp;
}

ActivityBout bout_of(const std::string& activity, Tensor samples, double rate = 30.0) {
  ActivityBout b;
  b.activity = activity;
  b.sample_rate_hz = rate;
  b.samples = std::move(samples);
  b.flags = find_activity(activity)->flags;
  return b;
}

std::vector<Vo2Sample> vo2_series(double seconds, double step_s, const std::function<double(double)>& f) {
  std::vector<Vo2Sample> s;
  for (double t = 0.0; t <= seconds + 1e-9; t += step_s) s.push_back({t, f(t)});
  return s;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("resampling at 30 Hz is the identity") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Tensor x({97, 3});
  for (auto& v : x.data()) v = nd(rng);
  for (auto m : {ResampleMethod::Fourier, ResampleMethod::Polyphase}) CHECK(resample_to_30hz(x, 30.0, m) == x);
}

TEST_CASE("resampled length") {
  CHECK(resample_to_30hz(Tensor({1500, 3}), 100.0).dim(0) == 450);
  CHECK(resample_to_30hz(Tensor({1200, 3}), 80.0).dim(0) == 450);
  CHECK(resample_to_30hz(Tensor({1001, 3}), 100.0).dim(0) == 300);
  CHECK(resample_to_30hz(Tensor({1, 3}), 100.0).dim(0) == 1);
  CHECK(resample_to_30hz(Tensor({1500, 3}), 100.0, ResampleMethod::Polyphase).dim(0) == 450);
  CHECK_THROWS_AS(resample_to_30hz(Tensor({10, 3}), 25.0), UnsupportedRateError);
  CHECK_THROWS_AS(resample_to_30hz(Tensor({10, 3}), 44.1, ResampleMethod::Polyphase), UnsupportedRateError);
}

TEST_CASE("a 2 Hz sinusoid survives resampling") {
  // 10 s at 100 Hz; 2 Hz sits on DFT bin 20 of the 300-sample output.
  const Tensor x = sinusoid(1000, 100.0, 2.0, 1.0, 0.3);
  const Tensor y = resample_to_30hz(x, 100.0);
  REQUIRE(y.dim(0) == 300);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const auto amp = dft_amplitudes(y, axis, 0, 300);
    const auto peak = std::max_element(amp.begin(), amp.end()) - amp.begin();
    CHECK(peak == 20);
    const double expect = axis == 1 ? 0.5 : 1.0;
    CHECK(std::abs(amp[20] - expect) / expect <= 0.02);
  }

  // The polyphase filter has edge transients, so judge it on whole periods
  // away from the ends.
  const Tensor z = resample_to_30hz(x, 100.0, ResampleMethod::Polyphase);
  const auto amp = dft_amplitudes(z, 0, 30, 240);
  CHECK(std::max_element(amp.begin(), amp.end()) - amp.begin() == 16);
  CHECK(std::abs(amp[16] - 1.0) <= 0.02);
}

TEST_CASE("band-limited energy is preserved") {
  Tensor x({2000, 3});
  for (std::size_t i = 0; i < 2000; ++i) {
    const double t = static_cast<double>(i) / 100.0;
    for (std::size_t a = 0; a < 3; ++a) {
      x.at(i, a) = std::sin(2 * kPi * 1.0 * t + a) + 0.5 * std::sin(2 * kPi * 5.5 * t) +
                   0.3 * std::cos(2 * kPi * 12.0 * t + 0.2 * a);
    }
  }
  auto energy = [](const Tensor& t, std::size_t skip) {
    double e = 0.0;
    const std::size_t n = t.dim(0) - 2 * skip;
    for (std::size_t i = skip; i < skip + n; ++i) {
      for (std::size_t a = 0; a < 3; ++a) e += t.at(i, a) * t.at(i, a);
    }
    return e / static_cast<double>(n);
  };
  const double before = energy(x, 0);
  CHECK(std::abs(energy(resample_to_30hz(x, 100.0), 0) / before - 1.0) < 0.05);
  CHECK(std::abs(energy(resample_to_30hz(x, 100.0, ResampleMethod::Polyphase), 30) / before - 1.0) < 0.05);
}

TEST_CASE("windowing counts") {
  auto count = [](std::size_t seconds_x30) {
    return windowize(bout_of("COMPUTER WORK", Tensor({seconds_x30, 3})), "P1", std::nullopt);
  };
  CHECK(count(600 * 30).windows.size() == 40);
  const auto r = count(616 * 30);
  CHECK(r.windows.size() == 41);
  CHECK(r.discarded_samples == 30);
  CHECK(count(449).windows.empty());
  CHECK(count(449).discarded_samples == 449);
}

TEST_CASE("windows partition the bout") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t n : {450, 451, 1349, 2000}) {
    Tensor x({n, 3});
    for (auto& v : x.data()) v = u(rng);
    const auto r = windowize(bout_of("RAPID WALK", x), "P9", 4.2);
    REQUIRE(r.windows.size() == n / 450);
    for (std::size_t w = 0; w < r.windows.size(); ++w) {
      const auto& win = r.windows[w];
      CHECK(win.values.shape() == std::vector<std::size_t>{450, 3});
      CHECK(win.labels == ClassFlags{false, true, false});
      CHECK(win.met == 4.2);
      CHECK(win.participant_id == "P9");
      for (std::size_t i = 0; i < 450 * 3; ++i) CHECK(win.values[i] == x[w * 1350 + i]);
    }
  }
  const Tensor x = sinusoid(450, 30.0, 1.0, 1.0);
  CHECK(windowize(bout_of("TV WATCHING", x), "P", std::nullopt).windows.at(0).values == x);
  CHECK_THROWS_AS(windowize(bout_of("TV WATCHING", x, 100.0), "P", std::nullopt), ValidationError);
}

TEST_CASE("MET from constant VO2") {
  CHECK(met_from_vo2(vo2_series(300, 3, [](double) { return 3.5; }), 0.0) == doctest::Approx(1.0));
  CHECK(met_from_vo2(vo2_series(300, 3, [](double) { return 7.0; }), 0.0) == doctest::Approx(2.0));
  CHECK(met_from_vo2(vo2_series(400, 2.5, [](double) { return 10.5; }), 50.0) == doctest::Approx(3.0));
}

TEST_CASE("MET from a VO2 step against a direct running mean") {
  const auto series = vo2_series(300, 2.0, [](double t) { return t < 90.0 ? 3.5 : 7.0; });
  double total = 0.0;
  int used = 0;
  for (const auto& s : series) {
    if (s.time_s < 120.0 || s.time_s > 240.0) continue;
    double sum = 0.0;
    int n = 0;
    for (const auto& q : series) {
      if (std::abs(q.time_s - s.time_s) <= 15.0) {
        sum += q.vo2;
        ++n;
      }
    }
    total += sum / n;
    ++used;
  }
  const double oracle = total / used / 3.5;
  CHECK(std::abs(met_from_vo2(series, 0.0) - oracle) < 1e-12);

  // Step at 130 s: the smoothing straddles the window start.
  const auto late = vo2_series(300, 2.0, [](double t) { return t < 130.0 ? 3.5 : 7.0; });
  const double m = met_from_vo2(late, 0.0);
  CHECK(m > 1.0);
  CHECK(m < 2.0);
}

TEST_CASE("MET input errors") {
  CHECK_THROWS_AS(met_from_vo2(vo2_series(200, 3, [](double) { return 3.5; }), 0.0), InsufficientDataError);
  CHECK_THROWS_AS(met_from_vo2({}, 0.0), InsufficientDataError);
  CHECK_THROWS_AS(met_from_vo2(vo2_series(300, 3, [](double t) { return t > 100 ? 0.0 : 3.5; }), 0.0),
                  ValidationError);
}

TEST_CASE("activity catalog") {
  const auto cat = activity_catalog();
  CHECK(cat.size() == 33);
  std::size_t typed = 0;
  for (const auto& a : cat) {
    CHECK(a.flags.count() <= 1);
    typed += !a.energy_only();
  }
  CHECK(typed == 29);
  REQUIRE(find_activity("STRETCHING YOGA*") != nullptr);
  CHECK(find_activity("STRETCHING YOGA*")->energy_only());
  CHECK(find_activity("COMPUTER WORK")->flags == ClassFlags{true, false, false});
  CHECK(find_activity("JUGGLING") == nullptr);
}

TEST_CASE("labeling into activity-type and energy sets") {
  std::vector<WindowSample> windows;
  for (const auto& a : activity_catalog()) {
    windows.push_back({Tensor({450, 3}), a.flags, 2.0, "P1", std::string(a.name)});
  }
  const auto sets = label_windows(windows);
  CHECK(sets.classification.size() == 29);
  CHECK(sets.regression.size() == 33);
  auto has = [](const std::vector<WindowSample>& v, const std::string& name) {
    return std::any_of(v.begin(), v.end(), [&](const auto& w) { return w.activity == name; });
  };
  CHECK_FALSE(has(sets.classification, "STRETCHING YOGA"));
  CHECK(has(sets.regression, "STRETCHING YOGA"));
  for (const auto& w : sets.classification) CHECK(w.labels.count() == 1);

  const auto sed = task_view(sets.classification, Task::Sedentary);
  CHECK(std::count(sed.targets.begin(), sed.targets.end(), 1.0) == 3);
  const auto met = task_view(sets.regression, Task::MetRegression);
  CHECK(met.size() == 33);
  CHECK(met.targets[0] == 2.0);

  windows.push_back({Tensor({450, 3}), {}, std::nullopt, "P2", "JUGGLING"});
  CHECK_THROWS_WITH_AS(label_windows(windows), doctest::Contains("JUGGLING"), ValidationError);
}

TEST_CASE("dataset preprocessing") {
  ParticipantRecord p{"P001", {}, std::nullopt};
  auto walk = bout_of("LEISURE WALK", sinusoid(60000, 100.0, 1.8, 0.7), 100.0);
  walk.vo2 = vo2_series(600, 3, [](double) { return 14.0; });
  p.bouts.push_back(walk);
  p.bouts.push_back(bout_of("COMPUTER WORK", sinusoid(616 * 80, 80.0, 0.2, 0.05), 80.0));
  p.bouts.push_back(bout_of("STRETCHING YOGA", sinusoid(300 * 100, 100.0, 0.3, 0.1), 100.0));
  p.bouts.push_back(bout_of("TV WATCHING", sinusoid(1000, 100.0, 0.1, 0.01), 100.0));

  const auto r = preprocess_dataset({p});
  CHECK(r.stats.windows_per_activity.at("LEISURE WALK") == 40);
  CHECK(r.stats.windows_per_activity.at("COMPUTER WORK") == 41);
  CHECK(r.stats.windows_per_activity.at("STRETCHING YOGA") == 20);
  CHECK(r.stats.short_bouts == 1);
  CHECK(r.stats.windows_per_participant.at("P001") == 101);
  CHECK(r.windows.front().met == doctest::Approx(4.0));
  CHECK_FALSE(r.windows.back().met.has_value());
  const auto sets = label_windows(r.windows);
  CHECK(sets.classification.size() == 81);
  CHECK(sets.regression.size() == 40);

  ParticipantRecord dup = p;
  CHECK_THROWS_AS(preprocess_dataset({p, dup}), ValidationError);
  ParticipantRecord wrong{"P2", {bout_of("COMPUTER WORK", Tensor({450, 3}))}, std::nullopt};
  wrong.bouts[0].flags = {false, true, false};
  CHECK_THROWS_AS(preprocess_dataset({wrong}), ValidationError);
}

TEST_CASE("dataset files round trip") {
  testing::TempDir dir;
  ParticipantRecord p{"P001", {}, Demographics{61, "F", 25.1}};
  auto b = bout_of("RAPID WALK", sinusoid(900, 100.0, 2.0, 0.8), 100.0);
  b.start_time_s = 12.5;
  b.vo2 = vo2_series(300, 3, [](double t) { return 10.0 + 0.01 * t; });
  for (auto& v : b.vo2) v.time_s += 12.5;
  p.bouts.push_back(b);
  p.bouts.push_back(bout_of("IRONING", sinusoid(450, 30.0, 0.7, 0.3)));

  const auto manifest = save_dataset({p}, dir / "data");
  const auto loaded = load_dataset(manifest);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].id == "P001");
  REQUIRE(loaded[0].bouts.size() == 2);
  CHECK(loaded[0].bouts[0].samples == b.samples);
  CHECK(loaded[0].bouts[0].vo2 == b.vo2);
  CHECK(loaded[0].bouts[0].start_time_s == 12.5);
  CHECK(loaded[0].bouts[0].flags == b.flags);
  CHECK(loaded[0].bouts[1].sample_rate_hz == 30.0);
  CHECK(loaded[0].demographics == p.demographics);

  std::filesystem::remove(dir / "data" / "P001" / "01_ironing.csv");
  CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("01_ironing.csv"), ValidationError);
}

TEST_CASE("signal CSV parsing errors") {
  testing::TempDir dir;
  const auto path = dir / "s.csv";
  {
    std::ofstream(path) << "t,x,y,z\n0,1,2,3\n";
  }
  CHECK_THROWS_AS(read_signal_csv(path), ValidationError);
  {
    std::ofstream(path) << "t_s,x_g,y_g,z_g\n0,1,2,oops\n";
  }
  CHECK_THROWS_WITH_AS(read_signal_csv(path), doctest::Contains(":2"), ValidationError);
  CHECK_THROWS_AS(read_signal_csv(dir / "missing.csv"), ValidationError);
}

TEST_CASE("window archive round trip") {
  testing::TempDir dir;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<WindowSample> windows;
  for (int i = 0; i < 5; ++i) {
    Tensor v({450, 3});
    for (auto& x : v.data()) x = nd(rng);
    windows.push_back({v, {i % 3 == 0, i % 3 == 1, i % 3 == 2}, i % 2 ? std::optional<double>(1.5 * i) : std::nullopt,
                       "P00" + std::to_string(i), "WASHING DISHES"});
  }
  const auto path = dir / "w.bin";
  write_window_archive(path, windows);
  CHECK(read_window_archive(path) == windows);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  CHECK(bytes.substr(0, 4) == "WNWA");
  CHECK(bytes[4] == 1);

  auto rewrite = [&](std::string b) { std::ofstream(path, std::ios::binary) << b; };
  std::string bad = bytes;
  bad[4] = 2;
  rewrite(bad);
  CHECK_THROWS_AS(read_window_archive(path), FormatError);
  rewrite("XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(read_window_archive(path), FormatError);
  rewrite(bytes.substr(0, bytes.size() - 7));
  CHECK_THROWS_AS(read_window_archive(path), FormatError);

  write_window_archive(path, {});
  CHECK(read_window_archive(path).empty());
}

}  // TEST_SUITE
