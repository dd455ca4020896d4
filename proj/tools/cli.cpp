#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "wristnet/activity_catalog.hpp"
#include "wristnet/checkpoint.hpp"
#include "wristnet/cross_validation.hpp"
#include "wristnet/dataset_io.hpp"
#include "wristnet/errors.hpp"
#include "wristnet/report.hpp"
#include "wristnet/version.hpp"
#include "wristnet/window_archive.hpp"

namespace wristnet::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const CliConfig& c) {
  return {{"synth", wristnet::to_json(c.synth)},
          {"model", wristnet::to_json(c.model)},
          {"n_batches", c.n_batches},
          {"workers", c.workers},
          {"resample", to_string(c.resample)},
          {"val_fraction", c.val_fraction}};
}

CliConfig cli_config_from_json(const json& doc) {
  const json& j = doc.is_object() && doc.contains("command") && doc.contains("config") ? doc["config"] : doc;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known = {"synth", "model", "n_batches", "workers", "resample",
                                              "val_fraction"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  CliConfig c;
  try {
    if (j.contains("synth")) c.synth = synth_spec_from_json(j["synth"]);
    if (j.contains("model")) c.model = model_config_from_json(j["model"]);
    c.n_batches = j.value("n_batches", c.n_batches);
    c.workers = j.value("workers", c.workers);
    if (j.contains("resample")) c.resample = resample_method_from_string(j["resample"].get<std::string>());
    c.val_fraction = j.value("val_fraction", c.val_fraction);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (c.n_batches < 2) throw ValidationError("config: n_batches must be at least 2");
  if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) {
    throw ValidationError("config: val_fraction must lie in (0, 1)");
  }
  return c;
}

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // The parser message carries the line and column.
    throw ValidationError(path.string() + ": " + e.what());
  }
}

struct Invocation {
  std::string command;
  std::vector<std::string> args;
  CliConfig config;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

// Written next to each output: `<dir>/run_manifest.json` for directory
// outputs, `<file>.manifest.json` otherwise.
void write_manifest(const Invocation& inv, const fs::path& where, const json& inputs, const json& outputs) {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - inv.start).count();
  const json manifest = {{"command", inv.command},
                         {"arguments", inv.args},
                         {"config", to_json(inv.config)},
                         {"inputs", inputs},
                         {"outputs", outputs},
                         {"seeds", {{"model", inv.config.model.seed}, {"synth", inv.config.synth.seed}}},
                         {"version", kVersion},
                         {"wall_time_s", wall}};
  fs::path path = where;
  if (fs::is_directory(where)) {
    path = where / "run_manifest.json";
  } else {
    path += ".manifest.json";
  }
  write_file_atomically(path, manifest.dump(2) + "\n");
}

std::vector<WindowSample> load_windows(const fs::path& archive) {
  if (!fs::exists(archive)) throw ValidationError("window archive not found: " + archive.string());
  auto windows = read_window_archive(archive);
  if (windows.empty()) throw InsufficientDataError(archive.string() + " contains no windows");
  return windows;
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string out;
};

void cmd_synth(Invocation& inv, const SynthArgs& a) {
  const auto dataset = generate(inv.config.synth);
  const auto manifest = save_dataset(dataset, a.out);
  std::size_t bouts = 0;
  for (const auto& p : dataset) bouts += p.bouts.size();
  inv.out << "participants: " << dataset.size() << "\nbouts: " << bouts << "\nmanifest: " << manifest.string()
          << "\n";
  write_manifest(inv, a.out, {{"spec", a.spec}}, {{"dataset", manifest.string()}});
}

// --- preprocess ----------------------------------------------------------

struct PreprocessArgs {
  std::string dataset;
  std::string out;
};

void cmd_preprocess(Invocation& inv, const PreprocessArgs& a) {
  const auto dataset = load_dataset(a.dataset);
  const auto result = preprocess_dataset(dataset, {inv.config.resample});
  write_window_archive(a.out, result.windows);

  std::size_t typed = 0;
  for (const auto& info : activity_catalog()) typed += info.energy_only() ? 0 : 1;
  std::size_t sed = 0, loc = 0, life = 0, energy_only = 0;
  for (const auto& w : result.windows) {
    sed += w.labels.sedentary;
    loc += w.labels.locomotion;
    life += w.labels.lifestyle;
    energy_only += w.labels.count() == 0;
  }
  const auto& s = result.stats;
  auto& o = inv.out;
  o << "catalog: " << activity_catalog().size() << " activities, " << typed
    << " used for activity-type recognition\n";
  o << "bouts: " << s.bouts << " (shorter than one window: " << s.short_bouts << ")\n";
  o << "windows: " << result.windows.size() << " (discarded samples: " << s.discarded_samples << ")\n";
  o << "windows per class: sedentary " << sed << ", locomotion " << loc << ", lifestyle " << life
    << ", energy-only " << energy_only << "\n";
  o << "windows per participant:\n";
  for (const auto& [id, n] : s.windows_per_participant) o << "  " << id << " " << n << "\n";
  o << "windows per activity:\n";
  for (const auto& [name, n] : s.windows_per_activity) o << "  " << name << " " << n << "\n";
  write_manifest(inv, a.out, {{"dataset", a.dataset}},
                 {{"archive", a.out}, {"windows", result.windows.size()}});
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string archive;
  std::string out;
};

void cmd_train(Invocation& inv, const TrainArgs& a) {
  const auto windows = load_windows(a.archive);
  const auto sets = label_windows(windows);
  const auto task = inv.config.model.task;
  const auto& pool = is_classification(task) ? sets.classification : sets.regression;

  std::set<std::string> id_set;
  for (const auto& w : pool) id_set.insert(w.participant_id);
  if (id_set.empty()) throw InsufficientDataError("no windows carry a target for task " + to_string(task));
  std::vector<std::string> ids(id_set.begin(), id_set.end());
  std::mt19937_64 rng(inv.config.model.seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  // Hold out whole participants for early stopping; a single participant
  // validates on its own training windows.
  const auto n_val = ids.size() < 2 ? 0
                                    : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(
                                                                   inv.config.val_fraction * ids.size())));
  const std::set<std::string> val_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<WindowSample> train_w, val_w;
  for (const auto& w : pool) (val_ids.count(w.participant_id) ? val_w : train_w).push_back(w);
  const auto train_set = task_view(train_w, task);
  const auto val_set = n_val == 0 ? train_set : task_view(val_w, task);

  const auto model = train(train_set, val_set, inv.config.model);
  save_checkpoint(a.out, model);
  inv.out << "task: " << to_string(task) << "\ntrain windows: " << train_set.size()
          << "\nvalidation windows: " << val_set.size() << "\nepochs run: " << model.stopped_epoch
          << "\nbest epoch: " << model.best_epoch << "\n";
  for (std::size_t e = 0; e < model.history.size(); ++e) {
    inv.out << "  epoch " << e + 1 << " train_loss " << format_double(model.history[e].train_loss)
            << " val_loss " << format_double(model.history[e].val_loss) << "\n";
  }
  json val_list = json::array();
  for (const auto& id : val_ids) val_list.push_back(id);
  write_manifest(inv, a.out, {{"archive", a.archive}, {"validation_participants", val_list}},
                 {{"checkpoint", a.out}});
}

// --- predict -------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint;
  std::string archive;
  std::string out;
};

void cmd_predict(Invocation& inv, const PredictArgs& a) {
  if (!fs::exists(a.checkpoint)) throw ValidationError("checkpoint not found: " + a.checkpoint);
  const auto model = load_checkpoint(a.checkpoint);
  const auto windows = load_windows(a.archive);
  std::vector<Tensor> inputs;
  inputs.reserve(windows.size());
  for (const auto& w : windows) inputs.push_back(w.values);
  const auto scores = predict(model, inputs);

  std::ostringstream csv;
  csv << "window_id,score\n";
  for (std::size_t i = 0; i < windows.size(); ++i) csv << i << ',' << format_double(scores[i]) << '\n';
  write_file_atomically(a.out, csv.str());

  const auto task = model.config.task;
  inv.out << "task: " << to_string(task) << "\nwindows: " << windows.size() << "\n";
  std::vector<double> s, y;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (is_classification(task)) {
      if (w.labels.count() == 0) continue;
      y.push_back(w.labels.for_task(task) ? 1.0 : 0.0);
    } else {
      if (!w.met) continue;
      y.push_back(*w.met);
    }
    s.push_back(scores[i]);
  }
  if (!y.empty()) {
    if (is_classification(task)) {
      const auto c = confusion_at_threshold(s, y);
      inv.out << "labeled windows: " << y.size() << "\naccuracy: "
              << format_double(static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total())) << "\n";
    } else {
      inv.out << "labeled windows: " << y.size() << "\nrmse: " << format_double(rmse(s, y)) << "\n";
    }
  }
  write_manifest(inv, a.out, {{"checkpoint", a.checkpoint}, {"archive", a.archive}},
                 {{"predictions", a.out}});
}

// --- nested-cv -----------------------------------------------------------

struct NestedCvArgs {
  std::string archive;
  std::string out;
};

void cmd_nested_cv(Invocation& inv, const NestedCvArgs& a) {
  const auto windows = load_windows(a.archive);
  NestedCvConfig config{inv.config.model, inv.config.n_batches, inv.config.workers};
  const auto task = config.model.task;
  auto& o = inv.out;
  const auto result = run_nested_cv(windows, task, config, [&](const RunReport& r) {
    o << "run " << r.run_id << " test " << r.test_batch << " val " << r.val_batch << " epochs "
      << r.stopped_epoch << " best " << r.best_epoch;
    if (r.rmse) o << " rmse " << format_double(*r.rmse);
    if (r.metrics.balanced_accuracy) o << " ba " << format_double(*r.metrics.balanced_accuracy);
    if (r.auc) o << " auc " << format_double(*r.auc);
    o << std::endl;
  });
  write_nested_cv_outputs(a.out, result, config);
  o << format_summary_table(report_json(result, config));
  write_manifest(inv, a.out, {{"archive", a.archive}},
                 {{"report", (fs::path(a.out) / "report.json").string()}, {"runs", result.runs.size()}});
}

// --- report --------------------------------------------------------------

void cmd_report(Invocation& inv, const std::string& report) {
  inv.out << format_summary_table(read_json_file(report));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"wristnet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wrist accelerometer activity and energy expenditure models"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string config_path;
  app.add_option("--seed", seed, "Seed for data generation, fold assignment and training");
  app.add_option("--config", config_path, "JSON config file or run manifest")->check(CLI::ExistingFile);
  app.add_option("--workers", workers, "Concurrent nested-cv runs (results do not depend on it)");

  std::optional<std::string> task;
  std::optional<int> epochs, batch_size, patience;
  std::optional<double> learning_rate;
  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--task", task, "sedentary, locomotion, lifestyle or met_regression");
    sub->add_option("--epochs", epochs);
    sub->add_option("--batch-size", batch_size);
    sub->add_option("--patience", patience);
    sub->add_option("--learning-rate", learning_rate);
  };

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", synth_args.spec, "Synthetic dataset spec (JSON)");
  synth->add_option("--out", synth_args.out, "Output directory")->required();

  PreprocessArgs pre_args;
  std::optional<std::string> resample;
  auto* pre = app.add_subcommand("preprocess", "Resample, label and window a dataset");
  pre->add_option("--dataset", pre_args.dataset, "Dataset manifest.json")->required();
  pre->add_option("--out", pre_args.out, "Window archive to write")->required();
  pre->add_option("--resample", resample, "fourier or polyphase");

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "Train one model on a window archive");
  tr->add_option("--archive", train_args.archive)->required();
  tr->add_option("--out", train_args.out, "Checkpoint to write")->required();
  model_flags(tr);

  NestedCvArgs cv_args;
  std::optional<std::size_t> n_batches;
  auto* cv = app.add_subcommand("nested-cv", "Participant-grouped nested cross-validation");
  cv->add_option("--archive", cv_args.archive)->required();
  cv->add_option("--out", cv_args.out, "Output directory")->required();
  cv->add_option("--batches", n_batches, "Number of participant batches");
  model_flags(cv);

  PredictArgs predict_args;
  auto* pr = app.add_subcommand("predict", "Score windows with a checkpoint");
  pr->add_option("--checkpoint", predict_args.checkpoint)->required();
  pr->add_option("--archive", predict_args.archive)->required();
  pr->add_option("--out", predict_args.out, "Predictions CSV")->required();

  std::string report_path;
  auto* rep = app.add_subcommand("report", "Print the summary table of a report.json");
  rep->add_option("report", report_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Invocation inv{app.get_subcommands().front()->get_name(), {}, {}, out, err};
    for (int i = 1; i < argc; ++i) inv.args.emplace_back(argv[i]);
    if (!config_path.empty()) inv.config = cli_config_from_json(read_json_file(config_path));
    auto& c = inv.config;
    if (*synth && !synth_args.spec.empty()) c.synth = synth_spec_from_json(read_json_file(synth_args.spec));
    if (seed) {
      c.model.seed = *seed;
      c.synth.seed = *seed;
    }
    if (workers) c.workers = *workers;
    if (task) c.model.task = task_from_string(*task);
    if (epochs) c.model.epochs = *epochs;
    if (batch_size) c.model.batch_size = *batch_size;
    if (patience) c.model.patience = *patience;
    if (learning_rate) c.model.adam.learning_rate = *learning_rate;
    if (n_batches) c.n_batches = *n_batches;
    if (resample) c.resample = resample_method_from_string(*resample);
    validate(c.model);
    if (c.n_batches < 2) throw ValidationError("--batches must be at least 2");

    if (*synth) {
      cmd_synth(inv, synth_args);
    } else if (*pre) {
      cmd_preprocess(inv, pre_args);
    } else if (*tr) {
      cmd_train(inv, train_args);
    } else if (*cv) {
      cmd_nested_cv(inv, cv_args);
    } else if (*pr) {
      cmd_predict(inv, predict_args);
    } else if (*rep) {
      cmd_report(inv, report_path);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace wristnet::cli
