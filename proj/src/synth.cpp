#include "wristnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "wristnet/errors.hpp"

namespace wristnet {

using nlohmann::json;

double MetModel::operator()(double amplitude_g) const {
  return std::clamp(intercept + slope * amplitude_g, min_met, max_met);
}

namespace {

constexpr std::array<double, 3> kAxisGain = {1.0, 0.7, 0.5};
constexpr int kBroadbandComponents = 4;

struct NamedModel {
  const char* name;
  const ClassSignalModel* model;
};

std::array<NamedModel, 4> models(const SynthSpec& s) {
  return {{{"sedentary", &s.sedentary},
           {"locomotion", &s.locomotion},
           {"lifestyle", &s.lifestyle},
           {"energy_only", &s.energy_only}}};
}

std::vector<std::string> activity_names(int cls) {
  std::vector<std::string> names;
  for (const auto& a : activity_catalog()) {
    const bool match = (cls == 0 && a.flags.sedentary) || (cls == 1 && a.flags.locomotion) ||
                       (cls == 2 && a.flags.lifestyle) || (cls == 3 && a.energy_only());
    if (match) names.emplace_back(a.name);
  }
  return names;
}

ActivityBout make_bout(const SynthSpec& spec, const ClassSignalModel& m, const std::string& activity,
                       ClassFlags flags, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double amplitude = m.amp_lo_g + (m.amp_hi_g - m.amp_lo_g) * unit(rng);
  const double base = m.freq_lo_hz + (m.freq_hi_hz - m.freq_lo_hz) * unit(rng);

  std::vector<double> freqs;
  if (m.broadband) {
    for (int c = 0; c < kBroadbandComponents; ++c) {
      freqs.push_back(m.freq_lo_hz + (m.freq_hi_hz - m.freq_lo_hz) *
                                         (static_cast<double>(c) + unit(rng)) / kBroadbandComponents);
    }
  } else {
    freqs.push_back(base);
  }
  std::array<std::vector<double>, 3> phases;
  for (auto& p : phases) {
    for (std::size_t c = 0; c < freqs.size(); ++c) p.push_back(2.0 * M_PI * unit(rng));
  }
  const double component_amp = amplitude / std::sqrt(static_cast<double>(freqs.size()));

  const auto n = static_cast<std::size_t>(std::llround(spec.bout_seconds * spec.sample_rate_hz));
  Tensor samples({n, kAxes});
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate_hz;
    for (std::size_t a = 0; a < kAxes; ++a) {
      double v = 0.0;
      for (std::size_t c = 0; c < freqs.size(); ++c) {
        v += component_amp * std::sin(2.0 * M_PI * freqs[c] * t + phases[a][c]);
      }
      const double e = m.noise_sd_g > 0.0 ? m.noise_sd_g * noise(rng) : 0.0;
      samples.at(i, a) = kAxisGain[a] * v + e;
    }
  }

  ActivityBout bout;
  bout.activity = activity;
  bout.sample_rate_hz = spec.sample_rate_hz;
  bout.samples = std::move(samples);
  bout.flags = flags;
  const double vo2 = spec.met(amplitude) * kVo2PerMet;
  for (double t = 0.0; t <= spec.vo2_seconds + 1e-9; t += spec.breath_interval_s) {
    bout.vo2.push_back({t, vo2});
  }
  return bout;
}

}  // namespace

void set_noise(SynthSpec& spec, double noise_sd_g) {
  spec.sedentary.noise_sd_g = noise_sd_g;
  spec.locomotion.noise_sd_g = noise_sd_g;
  spec.lifestyle.noise_sd_g = noise_sd_g;
  spec.energy_only.noise_sd_g = noise_sd_g;
}

void validate(const SynthSpec& spec) {
  if (spec.n_participants == 0) throw ValidationError("synth: n_participants must be positive");
  if (spec.bouts_per_class == 0) throw ValidationError("synth: bouts_per_class must be positive");
  if (!(spec.sample_rate_hz > 0.0) || !(spec.bout_seconds > 0.0) || !(spec.breath_interval_s > 0.0)) {
    throw ValidationError("synth: sample rate, bout length and breath interval must be positive");
  }
  if (spec.sample_rate_hz < kTargetRateHz) throw ValidationError("synth: sample rate below 30 Hz");
  if (spec.vo2_seconds < 240.0) throw ValidationError("synth: VO2 series must cover at least 240 s");
  const auto all = models(spec);
  for (const auto& [name, m] : all) {
    if (!(m->freq_lo_hz > 0.0) || m->freq_hi_hz < m->freq_lo_hz) {
      throw ValidationError(std::string("synth: bad frequency band for ") + name);
    }
    if (m->freq_hi_hz >= kTargetRateHz / 2.0) {
      throw ValidationError(std::string("synth: band for ") + name + " exceeds 15 Hz");
    }
    if (m->amp_lo_g < 0.0 || m->amp_hi_g < m->amp_lo_g || m->noise_sd_g < 0.0) {
      throw ValidationError(std::string("synth: bad amplitude or noise for ") + name);
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const auto& a = *all[i].model;
      const auto& b = *all[j].model;
      if (a.freq_lo_hz <= b.freq_hi_hz && b.freq_lo_hz <= a.freq_hi_hz) {
        throw ValidationError(std::string("synth: frequency bands of ") + all[i].name + " and " +
                              all[j].name + " overlap");
      }
    }
  }
}

Dataset generate(const SynthSpec& spec) {
  validate(spec);
  const std::array<ClassFlags, 4> flags = {ClassFlags{true, false, false}, ClassFlags{false, true, false},
                                           ClassFlags{false, false, true}, ClassFlags{}};
  std::array<std::vector<std::string>, 4> names;
  for (int c = 0; c < 4; ++c) names[static_cast<std::size_t>(c)] = activity_names(c);
  const auto all = models(spec);

  Dataset dataset;
  for (std::size_t p = 0; p < spec.n_participants; ++p) {
    std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(p)};
    std::mt19937_64 rng(seq);
    ParticipantRecord rec;
    char id[16];
    std::snprintf(id, sizeof(id), "P%03zu", p + 1);
    rec.id = id;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    rec.demographics = Demographics{20.0 + 69.0 * unit(rng), unit(rng) < 0.66 ? "F" : "M",
                                    20.0 + 13.0 * unit(rng)};
    for (std::size_t cls = 0; cls < 3; ++cls) {
      for (std::size_t b = 0; b < spec.bouts_per_class; ++b) {
        const auto& name = names[cls][b % names[cls].size()];
        rec.bouts.push_back(make_bout(spec, *all[cls].model, name, flags[cls], rng));
      }
    }
    for (std::size_t b = 0; b < spec.energy_only_bouts; ++b) {
      rec.bouts.push_back(make_bout(spec, *all[3].model, names[3][b % names[3].size()], flags[3], rng));
    }
    dataset.push_back(std::move(rec));
  }
  return dataset;
}

namespace {

json model_json(const ClassSignalModel& m) {
  return {{"freq_lo_hz", m.freq_lo_hz}, {"freq_hi_hz", m.freq_hi_hz}, {"amp_lo_g", m.amp_lo_g},
          {"amp_hi_g", m.amp_hi_g},     {"noise_sd_g", m.noise_sd_g}, {"broadband", m.broadband}};
}

void read_model(const json& j, ClassSignalModel& m) {
  static const std::set<std::string> known = {"freq_lo_hz", "freq_hi_hz", "amp_lo_g",
                                              "amp_hi_g", "noise_sd_g", "broadband"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("synth spec: unknown class model key '" + key + "'");
  }
  m.freq_lo_hz = j.value("freq_lo_hz", m.freq_lo_hz);
  m.freq_hi_hz = j.value("freq_hi_hz", m.freq_hi_hz);
  m.amp_lo_g = j.value("amp_lo_g", m.amp_lo_g);
  m.amp_hi_g = j.value("amp_hi_g", m.amp_hi_g);
  m.noise_sd_g = j.value("noise_sd_g", m.noise_sd_g);
  m.broadband = j.value("broadband", m.broadband);
}

}  // namespace

json to_json(const SynthSpec& s) {
  return {{"n_participants", s.n_participants},
          {"bouts_per_class", s.bouts_per_class},
          {"energy_only_bouts", s.energy_only_bouts},
          {"bout_seconds", s.bout_seconds},
          {"sample_rate_hz", s.sample_rate_hz},
          {"vo2_seconds", s.vo2_seconds},
          {"breath_interval_s", s.breath_interval_s},
          {"sedentary", model_json(s.sedentary)},
          {"locomotion", model_json(s.locomotion)},
          {"lifestyle", model_json(s.lifestyle)},
          {"energy_only", model_json(s.energy_only)},
          {"met_model",
           {{"intercept", s.met.intercept}, {"slope", s.met.slope}, {"min_met", s.met.min_met},
            {"max_met", s.met.max_met}}},
          {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const json& j) {
  static const std::set<std::string> known = {
      "n_participants", "bouts_per_class", "energy_only_bouts", "bout_seconds", "sample_rate_hz",
      "vo2_seconds",    "breath_interval_s", "sedentary",      "locomotion",   "lifestyle",
      "energy_only",    "met_model",       "seed"};
  if (!j.is_object()) throw ValidationError("synth spec must be a JSON object");
  SynthSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ValidationError("synth spec: unknown key '" + key + "'");
    }
    s.n_participants = j.value("n_participants", s.n_participants);
    s.bouts_per_class = j.value("bouts_per_class", s.bouts_per_class);
    s.energy_only_bouts = j.value("energy_only_bouts", s.energy_only_bouts);
    s.bout_seconds = j.value("bout_seconds", s.bout_seconds);
    s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
    s.vo2_seconds = j.value("vo2_seconds", s.vo2_seconds);
    s.breath_interval_s = j.value("breath_interval_s", s.breath_interval_s);
    if (j.contains("sedentary")) read_model(j["sedentary"], s.sedentary);
    if (j.contains("locomotion")) read_model(j["locomotion"], s.locomotion);
    if (j.contains("lifestyle")) read_model(j["lifestyle"], s.lifestyle);
    if (j.contains("energy_only")) read_model(j["energy_only"], s.energy_only);
    if (j.contains("met_model")) {
      const auto& m = j["met_model"];
      s.met.intercept = m.value("intercept", s.met.intercept);
      s.met.slope = m.value("slope", s.met.slope);
      s.met.min_met = m.value("min_met", s.met.min_met);
      s.met.max_met = m.value("max_met", s.met.max_met);
    }
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace wristnet
