#pragma once

#include <filesystem>

#include "json.hpp"
#include "wristnet/training.hpp"

namespace wristnet {

// Checkpoint file, little-endian:
//   magic "WNCK" | version u8 (=1) | 3 zero bytes
//   header_length u32 | JSON header (config, layers, target scaling,
//                                    history, stopped/best epoch)
//   tensor_count u32, then per tensor in layer order:
//     name (u16 length + bytes) | rank u32 | dims u64[rank] | f64[product(dims)]
inline constexpr char kCheckpointMagic[4] = {'W', 'N', 'C', 'K'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model);
// FormatError on bad magic or a version other than kCheckpointVersion.
TrainedModel load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const ModelConfig& config);
// Fields missing from `j` keep their value from `defaults`. Unknown keys are
// rejected with ValidationError.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig defaults = {});

}  // namespace wristnet
