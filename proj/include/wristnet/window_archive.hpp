#pragma once

#include <filesystem>
#include <vector>

#include "wristnet/preprocess.hpp"

namespace wristnet {

// Binary window archive, all integers and floats little-endian:
//
//   header  magic "WNWA" (4 bytes) | version u8 (=1) | 3 zero bytes
//           window_length u32 (=450) | axes u32 (=3) | record_count u64
//   record  values f64[450*3] row-major
//           labels u8: bit0 sedentary, bit1 locomotion, bit2 lifestyle
//           met f64 (NaN when absent)
//           participant_id: u16 length + UTF-8 bytes
//           activity:       u16 length + UTF-8 bytes
inline constexpr char kArchiveMagic[4] = {'W', 'N', 'W', 'A'};
inline constexpr std::uint8_t kArchiveVersion = 1;

void write_window_archive(const std::filesystem::path& path, const std::vector<WindowSample>& windows);
// Raises FormatError on bad magic, unknown version or truncation.
std::vector<WindowSample> read_window_archive(const std::filesystem::path& path);

}  // namespace wristnet
