#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wristnet/preprocess.hpp"

namespace wristnet {

// Signal CSV: header `t_s,x_g,y_g,z_g`, one row per sample.
struct SignalSeries {
  std::vector<double> times;
  Tensor samples;  // [n, 3]
};

SignalSeries read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const std::vector<double>& times,
                      const Tensor& samples);

// VO2 CSV: header `t_s,vo2_ml_min_kg`.
std::vector<Vo2Sample> read_vo2_csv(const std::filesystem::path& path);
void write_vo2_csv(const std::filesystem::path& path, const std::vector<Vo2Sample>& series);

// Loads a dataset manifest and every file it references. Relative paths are
// resolved against the manifest's directory. Missing files raise
// ValidationError naming the path.
//
//   {"format": "wristnet-dataset", "version": 1,
//    "participants": [{"id": "P001",
//                      "demographics": {"age_years": 61, "sex": "F", "bmi": 25.1},
//                      "activities": [{"activity": "COMPUTER WORK",
//                                      "signal": "P001/00_computer_work.csv",
//                                      "sample_rate_hz": 100,
//                                      "vo2": "P001/00_computer_work_vo2.csv",
//                                      "class_flags": {"sedentary": true,
//                                                      "locomotion": false,
//                                                      "lifestyle": false}}]}]}
Dataset load_dataset(const std::filesystem::path& manifest);

// Writes CSVs plus `manifest.json` under `dir` (created if missing) and
// returns the manifest path. Signal timestamps are start_time_s + i / rate.
std::filesystem::path save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

}  // namespace wristnet
