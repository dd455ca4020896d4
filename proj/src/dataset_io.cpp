#include "wristnet/dataset_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wristnet/errors.hpp"

namespace wristnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  return in;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || std::isspace(static_cast<unsigned char>(s.back())))) {
    s.pop_back();
  }
  return s;
}

// Parses `expected` comma-separated doubles from one CSV row.
std::vector<double> parse_row(const std::string& line, std::size_t expected, const fs::path& path,
                              std::size_t line_no) {
  std::vector<double> values;
  values.reserve(expected);
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (true) {
    while (p < end && *p == ' ') ++p;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    values.push_back(v);
    p = next;
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    if (*p != ',') {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected ','");
    }
    ++p;
  }
  if (values.size() != expected) {
    throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(expected) + " columns, got " +
                          std::to_string(values.size()));
  }
  return values;
}

void expect_header(std::istream& in, const std::string& header, const fs::path& path) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw ValidationError(path.string() + ": expected header '" + header + "'");
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  return out;
}

std::string slug(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!s.empty() && s.back() != '_') {
      s += '_';
    }
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

SignalSeries read_signal_csv(const fs::path& path) {
  auto in = open_input(path);
  expect_header(in, "t_s,x_g,y_g,z_g", path);
  SignalSeries s;
  std::vector<double> data;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto row = parse_row(line, 4, path, line_no);
    if (!s.times.empty() && row[0] < s.times.back()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": time goes backwards");
    }
    s.times.push_back(row[0]);
    data.insert(data.end(), row.begin() + 1, row.end());
  }
  if (s.times.empty()) throw ValidationError(path.string() + ": no samples");
  s.samples = Tensor({s.times.size(), 3}, std::move(data));
  return s;
}

void write_signal_csv(const fs::path& path, const std::vector<double>& times, const Tensor& samples) {
  expect_shape(samples, {times.size(), 3}, "signal samples");
  auto out = open_output(path);
  out << "t_s,x_g,y_g,z_g\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_double(times[i]) << ',' << format_double(samples.at(i, 0)) << ','
        << format_double(samples.at(i, 1)) << ',' << format_double(samples.at(i, 2)) << '\n';
  }
}

std::vector<Vo2Sample> read_vo2_csv(const fs::path& path) {
  auto in = open_input(path);
  expect_header(in, "t_s,vo2_ml_min_kg", path);
  std::vector<Vo2Sample> series;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto row = parse_row(line, 2, path, line_no);
    series.push_back({row[0], row[1]});
  }
  return series;
}

void write_vo2_csv(const fs::path& path, const std::vector<Vo2Sample>& series) {
  auto out = open_output(path);
  out << "t_s,vo2_ml_min_kg\n";
  for (const auto& s : series) out << format_double(s.time_s) << ',' << format_double(s.vo2) << '\n';
}

Dataset load_dataset(const fs::path& manifest) {
  auto in = open_input(manifest);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(manifest.string() + ": " + e.what());
  }
  const auto base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  Dataset dataset;
  try {
    if (doc.value("format", "") != "wristnet-dataset") {
      throw ValidationError(manifest.string() + ": not a wristnet dataset manifest");
    }
    for (const auto& jp : doc.at("participants")) {
      ParticipantRecord p;
      p.id = jp.at("id").get<std::string>();
      if (jp.contains("demographics")) {
        const auto& d = jp["demographics"];
        p.demographics = Demographics{d.value("age_years", 0.0), d.value("sex", std::string()),
                                      d.value("bmi", 0.0)};
      }
      for (const auto& ja : jp.at("activities")) {
        ActivityBout bout;
        bout.activity = ja.at("activity").get<std::string>();
        bout.sample_rate_hz = ja.at("sample_rate_hz").get<double>();
        const auto& flags = ja.at("class_flags");
        bout.flags = {flags.at("sedentary").get<bool>(), flags.at("locomotion").get<bool>(),
                      flags.at("lifestyle").get<bool>()};
        if (bout.flags.count() > 1) {
          throw ValidationError("participant '" + p.id + "', activity '" + bout.activity +
                                "': more than one class flag set");
        }
        const auto signal_path = resolve(ja.at("signal").get<std::string>());
        if (!fs::exists(signal_path)) throw ValidationError("missing file: " + signal_path.string());
        auto signal = read_signal_csv(signal_path);
        bout.start_time_s = signal.times.front();
        bout.samples = std::move(signal.samples);
        if (ja.contains("vo2") && !ja["vo2"].is_null()) {
          const auto vo2_path = resolve(ja["vo2"].get<std::string>());
          if (!fs::exists(vo2_path)) throw ValidationError("missing file: " + vo2_path.string());
          bout.vo2 = read_vo2_csv(vo2_path);
        }
        p.bouts.push_back(std::move(bout));
      }
      dataset.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ValidationError(manifest.string() + ": " + e.what());
  }
  return dataset;
}

fs::path save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  json participants = json::array();
  for (const auto& p : dataset) {
    json jp;
    jp["id"] = p.id;
    if (p.demographics) {
      jp["demographics"] = {{"age_years", p.demographics->age_years},
                            {"sex", p.demographics->sex},
                            {"bmi", p.demographics->bmi}};
    }
    json activities = json::array();
    for (std::size_t b = 0; b < p.bouts.size(); ++b) {
      const auto& bout = p.bouts[b];
      char prefix[16];
      std::snprintf(prefix, sizeof(prefix), "%02zu_", b);
      const auto stem = fs::path(p.id) / (prefix + slug(bout.activity));
      std::vector<double> times(bout.samples.dim(0));
      for (std::size_t i = 0; i < times.size(); ++i) {
        times[i] = bout.start_time_s + static_cast<double>(i) / bout.sample_rate_hz;
      }
      write_signal_csv(dir / (stem.string() + ".csv"), times, bout.samples);
      json ja;
      ja["activity"] = bout.activity;
      ja["signal"] = stem.generic_string() + ".csv";
      ja["sample_rate_hz"] = bout.sample_rate_hz;
      if (!bout.vo2.empty()) {
        write_vo2_csv(dir / (stem.string() + "_vo2.csv"), bout.vo2);
        ja["vo2"] = stem.generic_string() + "_vo2.csv";
      }
      ja["class_flags"] = {{"sedentary", bout.flags.sedentary},
                           {"locomotion", bout.flags.locomotion},
                           {"lifestyle", bout.flags.lifestyle}};
      activities.push_back(std::move(ja));
    }
    jp["activities"] = std::move(activities);
    participants.push_back(std::move(jp));
  }
  json doc = {{"format", "wristnet-dataset"}, {"version", 1}, {"participants", participants}};
  const auto manifest = dir / "manifest.json";
  auto out = open_output(manifest);
  out << doc.dump(2) << '\n';
  return manifest;
}

}  // namespace wristnet
