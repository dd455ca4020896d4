#include "wristnet/window_archive.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "wristnet/errors.hpp"

namespace wristnet {

void write_window_archive(const std::filesystem::path& path, const std::vector<WindowSample>& windows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write archive: " + path.string());
  detail::LittleEndianWriter w(out);
  w.bytes(kArchiveMagic, 4);
  w.u8(kArchiveVersion);
  w.u8(0);
  w.u8(0);
  w.u8(0);
  w.u32(static_cast<std::uint32_t>(kWindowLength));
  w.u32(static_cast<std::uint32_t>(kAxes));
  w.u64(windows.size());
  for (const auto& win : windows) {
    expect_shape(win.values, {kWindowLength, kAxes}, "archived window");
    for (double v : win.values.data()) w.f64(v);
    const std::uint8_t labels = static_cast<std::uint8_t>(
        (win.labels.sedentary ? 1 : 0) | (win.labels.locomotion ? 2 : 0) | (win.labels.lifestyle ? 4 : 0));
    w.u8(labels);
    w.f64(win.met ? *win.met : std::numeric_limits<double>::quiet_NaN());
    w.string16(win.participant_id);
    w.string16(win.activity);
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<WindowSample> read_window_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open archive: " + path.string());
  detail::LittleEndianReader r(in, path.string());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kArchiveMagic, 4) != 0) throw FormatError(path.string() + ": not a window archive");
  const auto version = r.u8();
  if (version != kArchiveVersion) {
    throw FormatError(path.string() + ": unsupported archive version " + std::to_string(version));
  }
  r.u8();
  r.u8();
  r.u8();
  const auto length = r.u32();
  const auto axes = r.u32();
  if (length != kWindowLength || axes != kAxes) {
    throw FormatError(path.string() + ": windows are " + std::to_string(length) + "x" +
                      std::to_string(axes) + ", expected 450x3");
  }
  const auto count = r.u64();
  std::vector<WindowSample> windows;
  for (std::uint64_t i = 0; i < count; ++i) {
    WindowSample win;
    std::vector<double> values(kWindowLength * kAxes);
    for (auto& v : values) v = r.f64();
    win.values = Tensor({kWindowLength, kAxes}, std::move(values));
    const auto labels = r.u8();
    if (labels > 7) throw FormatError(path.string() + ": bad label byte in record " + std::to_string(i));
    win.labels = {(labels & 1) != 0, (labels & 2) != 0, (labels & 4) != 0};
    const double met = r.f64();
    if (!std::isnan(met)) win.met = met;
    win.participant_id = r.string16();
    win.activity = r.string16();
    windows.push_back(std::move(win));
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after last record");
  return windows;
}

}  // namespace wristnet
