#include "wristnet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "wristnet/errors.hpp"

namespace wristnet {

using nlohmann::json;

nlohmann::json to_json(const ModelConfig& c) {
  return {{"task", to_string(c.task)},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"learning_rate", c.adam.learning_rate},
          {"beta1", c.adam.beta1},
          {"beta2", c.adam.beta2},
          {"epsilon", c.adam.epsilon},
          {"standardize_targets", c.standardize_targets}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
  static const std::set<std::string> known = {"task", "epochs", "patience", "batch_size",
                                              "seed", "learning_rate", "beta1", "beta2",
                                              "epsilon", "standardize_targets"};
  if (!j.is_object()) throw ValidationError("model config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ValidationError("unknown model config key '" + key + "'");
    }
    if (j.contains("task")) c.task = task_from_string(j["task"].get<std::string>());
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("patience")) c.patience = j["patience"].get<int>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("learning_rate")) c.adam.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("beta1")) c.adam.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) c.adam.beta2 = j["beta2"].get<double>();
    if (j.contains("epsilon")) c.adam.epsilon = j["epsilon"].get<double>();
    if (j.contains("standardize_targets")) c.standardize_targets = j["standardize_targets"].get<bool>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model config: ") + e.what());
  }
  validate(c);
  return c;
}

namespace {

json layers_to_json(const std::vector<LayerSpec>& layers) {
  json arr = json::array();
  for (const auto& l : layers) {
    arr.push_back({{"kind", to_string(l.kind)},
                   {"in_features", l.in_features},
                   {"out_features", l.out_features},
                   {"kernel_width", l.kernel_width},
                   {"activation", to_string(l.activation)}});
  }
  return arr;
}

std::vector<LayerSpec> layers_from_json(const json& arr) {
  std::vector<LayerSpec> layers;
  for (const auto& j : arr) {
    layers.push_back({layer_kind_from_string(j.at("kind").get<std::string>()),
                      j.at("in_features").get<std::size_t>(), j.at("out_features").get<std::size_t>(),
                      j.at("kernel_width").get<std::size_t>(),
                      activation_from_string(j.at("activation").get<std::string>())});
  }
  return layers;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model) {
  json history = json::array();
  for (const auto& h : model.history) history.push_back({h.train_loss, h.val_loss});
  const json header = {{"config", to_json(model.config)},
                       {"layers", layers_to_json(model.network.layers())},
                       {"target_mean", model.scaling.mean},
                       {"target_scale", model.scaling.scale},
                       {"history", history},
                       {"stopped_epoch", model.stopped_epoch},
                       {"best_epoch", model.best_epoch},
                       {"validation_downsampled", model.validation_downsampled},
                       {"adam_step", model.network.parameters().step}};

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  detail::LittleEndianWriter w(out);
  w.bytes(kCheckpointMagic, 4);
  w.u8(kCheckpointVersion);
  w.u8(0);
  w.u8(0);
  w.u8(0);
  w.string32(header.dump());
  const auto& params = model.network.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.tensors) {
    w.string16(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.u64(d);
    for (double v : p.value.data()) w.f64(v);
  }
  if (!out) throw Error("write failed: " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path.string());
  detail::LittleEndianReader r(in, path.string());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError(path.string() + ": not a checkpoint");
  const auto version = r.u8();
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": checkpoint version " + std::to_string(version) +
                      " does not match supported version " + std::to_string(kCheckpointVersion));
  }
  r.u8();
  r.u8();
  r.u8();

  TrainedModel model;
  std::vector<LayerSpec> layers;
  std::int64_t step = 0;
  try {
    const auto header = json::parse(r.string32());
    model.config = model_config_from_json(header.at("config"));
    layers = layers_from_json(header.at("layers"));
    model.scaling = {header.at("target_mean").get<double>(), header.at("target_scale").get<double>()};
    for (const auto& h : header.at("history")) {
      model.history.push_back({h.at(0).get<double>(), h.at(1).get<double>()});
    }
    model.stopped_epoch = header.at("stopped_epoch").get<int>();
    model.best_epoch = header.at("best_epoch").get<int>();
    model.validation_downsampled = header.at("validation_downsampled").get<bool>();
    step = header.at("adam_step").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint header: " + e.what());
  }

  NetworkParameters params;
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.string16();
    const auto rank = r.u32();
    if (rank == 0 || rank > 3) throw FormatError(path.string() + ": bad tensor rank");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
    std::vector<double> values(shape_product(shape));
    for (auto& v : values) v = r.f64();
    params.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after last tensor");
  params.step = step;
  model.network = Network(std::move(layers), std::move(params));
  return model;
}

}  // namespace wristnet
