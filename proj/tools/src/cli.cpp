#include "tskip/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tskip/arch_io.hpp"
#include "tskip/checkpoint.hpp"
#include "tskip/cli/ablate.hpp"
#include "tskip/data.hpp"
#include "tskip/energy.hpp"
#include "tskip/error.hpp"
#include "tskip/nas.hpp"
#include "tskip/trainer.hpp"

namespace fs = std::filesystem;

namespace tskip::cli {
namespace {

struct UsageError : Error {
  using Error::Error;
};

struct TrainFlags {
  std::string data;
  std::string train_split = "train";
  std::string test_split = "test";
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::string scheduler = "cosine";
  double min_lr = 5e-6;
  std::size_t period = 0;
  std::size_t step_every = 10;
  double gamma = 0.7;
  std::size_t every = 10;
  std::string loss = "cross_entropy";
  double dropout = 0.0;
  double clip = 10.0;
  double surrogate_alpha = 2.0;
  double target_accuracy = 0.0;

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.scheduler.kind = parse_scheduler(scheduler);
    c.scheduler.lr_init = lr;
    c.scheduler.min_lr = min_lr;
    c.scheduler.period = period;
    c.scheduler.step_every = step_every;
    c.scheduler.gamma = gamma;
    c.scheduler.every_n_epochs = every;
    c.loss = parse_loss(loss);
    c.dropout = dropout;
    c.grad_clip = clip;
    c.surrogate.alpha = surrogate_alpha;
    c.target_accuracy = target_accuracy;
    c.seed = derive_seed(seed, "train");
    if (!(lr > 0.0)) throw UsageError("--lr must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("--dropout must lie in [0,1)");
    if (!(surrogate_alpha > 0.0)) throw UsageError("--surrogate-alpha must be positive");
    return c;
  }
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
  sub->add_option("--data", f.data, "Dataset manifest")->required();
  sub->add_option("--train-split", f.train_split, "Manifest split used for training");
  sub->add_option("--test-split", f.test_split, "Manifest split used for evaluation");
  sub->add_option("--epochs", f.epochs, "Training epochs");
  sub->add_option("--batch-size", f.batch_size, "Minibatch size");
  sub->add_option("--lr", f.lr, "Initial learning rate");
  sub->add_option("--scheduler", f.scheduler, "cosine, multistep or constant")
      ->check(CLI::IsMember({"cosine", "multistep", "constant"}));
  sub->add_option("--min-lr", f.min_lr, "Cosine floor");
  sub->add_option("--period", f.period, "Cosine updates over the run (0: whole run)");
  sub->add_option("--step-every", f.step_every, "Minibatch iterations between cosine updates");
  sub->add_option("--gamma", f.gamma, "Multistep decay factor");
  sub->add_option("--every", f.every, "Epochs between multistep decays");
  sub->add_option("--loss", f.loss, "cross_entropy or mse")->check(CLI::IsMember({"cross_entropy", "mse"}));
  sub->add_option("--dropout", f.dropout, "Input drop probability per layer");
  sub->add_option("--clip", f.clip, "Global gradient-norm ceiling (0 disables)");
  sub->add_option("--surrogate-alpha", f.surrogate_alpha, "ArcTangent surrogate sharpness");
  sub->add_option("--target-accuracy", f.target_accuracy, "Stop once test accuracy reaches this (0 disables)");
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar(e);
    return s;
  }
  return v.dump();
}

/// Inserts `--key=value` pairs from a JSON config right after the subcommand
/// name so that flags given on the command line, which come later, win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (j.contains("options") && j.at("options").is_object()) j = j.at("options");
  if (!j.is_object()) throw UsageError("config " + path + " must hold a JSON object");
  std::vector<std::string> out{args.front()};
  for (const auto& [key, value] : j.items()) {
    if (key == "config") continue;
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    out.push_back("--" + name + "=" + json_scalar(value));
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

/// Every option of `sub` with its resolved value.
void write_run_record(const CLI::App* sub, const fs::path& dir) {
  nlohmann::json opts = nlohmann::json::object();
  for (const CLI::Option* o : sub->get_options()) {
    if (o->get_lnames().empty() || o->get_lnames()[0] == "help") continue;
    std::string value;
    if (o->count() > 0) {
      for (const auto& r : o->reduced_results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = o->get_default_str();
    }
    opts[o->get_lnames()[0]] = value;
  }
  write_text(dir / "run.json", nlohmann::json{{"command", sub->get_name()}, {"version", "0.1.0"}, {"options", opts}}.dump(2) + "\n");
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw UsageError("--grid value '" + item + "' is not a non-negative integer");
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("--grid must list at least one value");
  return grid;
}

Dataset load_split(const std::string& manifest, const std::string& split) {
  Dataset d = load_dataset(manifest, split);
  if (d.size() == 0) throw UsageError("manifest " + manifest + " has no samples in split '" + split + "'");
  return d;
}

void check_compatible(const ArchSpec& spec, const Dataset& d) {
  if (spec.T != d.T)
    throw ValidationError("architecture T=" + std::to_string(spec.T) + " but dataset T=" + std::to_string(d.T));
  if (spec.input_shape != d.sample_shape)
    throw ValidationError("architecture input " + tskip::to_string(spec.input_shape) + " but dataset samples are " +
                          tskip::to_string(d.sample_shape));
  if (spec.layers.back().units != d.num_classes && spec.layers.back().kind == LayerKind::Dense)
    throw ValidationError("readout has " + std::to_string(spec.layers.back().units) + " units but dataset has " +
                          std::to_string(d.num_classes) + " classes");
}

Tensor random_probe(const ArchSpec& shape_source, std::size_t B, double rate, std::uint64_t seed) {
  Shape s{shape_source.T, B};
  s.insert(s.end(), shape_source.input_shape.begin(), shape_source.input_shape.end());
  Tensor p(s, 0.0);
  Rng rng(derive_seed(seed, "probe"));
  for (auto& v : p.data()) v = bernoulli(rng, rate) ? 1.0 : 0.0;
  return p;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tskip: spiking and hybrid networks with temporally delayed skip connections"};
  app.name("tskip");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--config", config, "JSON file of option values (flags override)");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic spike dataset");
  std::string task = "delayed-recall";
  DelayedRecallConfig rc;
  rc.samples = 2000;
  double test_fraction = 0.2;
  std::int64_t bin_us = 1000;
  synth->add_option("--task", task, "Synthetic task")->check(CLI::IsMember({"delayed-recall"}));
  synth->add_option("--D", rc.delay, "Recall delay in steps");
  synth->add_option("--T", rc.T, "Sequence length");
  synth->add_option("--n", rc.samples, "Total samples");
  synth->add_option("--classes", rc.classes, "Number of classes");
  synth->add_option("--test-fraction", test_fraction, "Share of samples in the test split");
  synth->add_option("--distractor-rate", rc.distractor_rate, "Share of free steps carrying a distractor token");
  synth->add_option("--noise", rc.noise_rate, "Background noise flip probability");
  synth->add_option("--bin-us", bin_us, "Microseconds per time bin in the written CSV files");
  common(synth);

  // train
  auto* trn = app.add_subcommand("train", "Train an architecture on a dataset");
  std::string spec_path;
  TrainFlags tf;
  trn->add_option("--spec", spec_path, "Architecture file")->required();
  add_train_flags(trn, tf);
  common(trn);

  // search
  auto* srch = app.add_subcommand("search", "Training-free architecture search");
  std::string space_path, preset_name, probe_data;
  std::size_t n_cand = 100, top_k = 5, probe_b = 16, parallel = 1, budget = 0;
  double probe_rate = 0.1, threshold_init = 0.0;
  auto* space_opt = srch->add_option("--space", space_path, "Search-space file");
  srch->add_option("--preset", preset_name, "Constraint preset")->check(CLI::IsMember(preset_names()))->excludes(space_opt);
  srch->add_option("--n", n_cand, "Candidates to sample");
  srch->add_option("--k", top_k, "Candidates to keep");
  srch->add_option("--probe-batch", probe_b, "Probe batch size");
  srch->add_option("--probe-rate", probe_rate, "Spike probability of the random probe batch");
  srch->add_option("--probe-data", probe_data, "Manifest whose first samples form the probe batch");
  srch->add_option("--parallel", parallel, "Worker threads");
  srch->add_option("--budget", budget, "Override the parameter budget (0 keeps the space's)");
  srch->add_option("--threshold-init", threshold_init, "Override the LIF threshold initialization");
  common(srch);

  // ablate
  auto* abl = app.add_subcommand("ablate", "Train one model per grid point along an ablation axis");
  std::string axis_name;
  std::string grid_text;
  std::size_t edge = 0;
  TrainFlags af;
  abl->add_option("--axis", axis_name, "delta_t, position or depth")
      ->required()
      ->check(CLI::IsMember({"delta_t", "position", "depth"}));
  abl->add_option("--grid", grid_text, "Comma-separated grid values, e.g. 4,8,16,32");
  abl->add_option("--spec", spec_path, "Base architecture file")->required();
  abl->add_option("--edge", edge, "Index of the tskip varied by delta_t/position sweeps");
  add_train_flags(abl, af);
  common(abl);

  // energy
  auto* eng = app.add_subcommand("energy", "Estimate inference energy of a checkpoint");
  std::string ckpt_path, energy_data, energy_split = "test";
  std::size_t energy_batch = 100;
  eng->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eng->add_option("--data", energy_data, "Dataset manifest")->required();
  eng->add_option("--split", energy_split, "Manifest split to evaluate");
  eng->add_option("--batch-size", energy_batch, "Evaluation batch size");
  common(eng);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    const fs::path dir(out_dir);
    if (synth->parsed()) {
      if (rc.delay >= rc.T) throw UsageError("--D must be smaller than --T");
      if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw UsageError("--test-fraction must lie in [0,1)");
      prepare_out(dir);
      rc.seed = derive_seed(seed, "data");
      const auto set = gen_delayed_recall(rc);
      const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rc.samples)));
      write_spike_dataset(set.data, rc.samples - n_test, dir, bin_us);
      write_run_record(synth, dir);
      out << "wrote " << rc.samples << " samples (" << rc.samples - n_test << " train, " << n_test << " test) to "
          << (dir / "manifest.json").string() << "\n";
      return kOk;
    }

    if (trn->parsed()) {
      const ArchSpec spec = load_arch(spec_path);
      require_valid(spec);
      const TrainConfig cfg = tf.config(seed);
      const Dataset train_set = load_split(tf.data, tf.train_split);
      Dataset test_set = load_dataset(tf.data, tf.test_split);
      check_compatible(spec, train_set);
      prepare_out(dir);
      write_run_record(trn, dir);
      Network net(spec, derive_seed(seed, "init"));
      std::ofstream csv(dir / "metrics.csv", std::ios::binary);
      if (!csv) throw Error("cannot write " + (dir / "metrics.csv").string());
      csv << metrics_csv_header() << "\n";
      const auto result = train(net, train_set, test_set.size() ? &test_set : nullptr, cfg, [&](const EpochMetrics& m) {
        csv << metrics_csv_row(m) << "\n" << std::flush;
        out << "epoch " << m.epoch << " " << m.split << " loss " << m.loss << " acc " << m.accuracy << " rate "
            << m.spike_rate << " lr " << m.lr << "\n";
      });
      save_checkpoint(net, dir / "checkpoint.json");
      out << "trained " << result.epochs_run << " epochs; checkpoint " << (dir / "checkpoint.json").string() << "\n";
      return kOk;
    }

    if (srch->parsed()) {
      if (space_path.empty() == preset_name.empty()) throw UsageError("give exactly one of --space or --preset");
      SearchSpace space = space_path.empty() ? preset(preset_name) : load_space(space_path);
      if (budget) space.param_budget = budget;
      if (threshold_init > 0.0) space.threshold_init = threshold_init;
      check_space(space);
      if (n_cand == 0) throw UsageError("--n must be positive");
      if (probe_b < 2) throw UsageError("--probe-batch must be at least 2");
      Tensor probe;
      ArchSpec shape_source;
      shape_source.T = space.T;
      shape_source.input_shape = space.input_shape;
      if (!probe_data.empty()) {
        Dataset d = load_dataset(probe_data, "");
        if (d.T != space.T || d.sample_shape != space.input_shape)
          throw ValidationError("probe data does not match the search space input");
        if (d.size() < probe_b) throw UsageError("probe data has fewer samples than --probe-batch");
        std::vector<std::size_t> idx(probe_b);
        for (std::size_t i = 0; i < probe_b; ++i) idx[i] = i;
        probe = make_batch(d, idx);
      } else {
        probe = random_probe(shape_source, probe_b, probe_rate, seed);
      }
      SearchConfig sc;
      sc.n_candidates = n_cand;
      sc.k = std::min(top_k, n_cand);
      sc.seed = derive_seed(seed, "search");
      sc.threads = parallel;
      prepare_out(dir);
      write_run_record(srch, dir);
      const auto r = random_search(space, probe, sc);
      std::string report = "rank,score,params,depth,tskips,spec_path\n";
      for (std::size_t i = 0; i < r.top.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "rank_%02zu.json", i + 1);
        save_arch(r.top[i].spec, dir / name);
        std::string edges;
        for (const auto& e : r.top[i].spec.tskips)
          edges += (edges.empty() ? "" : ";") + std::to_string(e.origin) + "->" + std::to_string(e.destination) +
                   "@" + std::to_string(e.delta_t);
        char line[256];
        std::snprintf(line, sizeof line, "%zu,%.17g,%zu,%zu,", i + 1, r.top[i].score, r.top[i].params,
                      r.top[i].spec.depth());
        report += line + edges + "," + name + "\n";
        out << "#" << i + 1 << " score " << r.top[i].score << (r.top[i].degenerate ? " (silent)" : "") << " params "
            << r.top[i].params << " depth " << r.top[i].spec.depth() << " tskips " << edges << "\n";
      }
      write_text(dir / "report.csv", report);
      return kOk;
    }

    if (abl->parsed()) {
      const std::vector<std::size_t> grid = parse_grid(grid_text);
      const auto axis = parse_axis(axis_name);
      const ArchSpec base = load_arch(spec_path);
      const TrainConfig cfg = af.config(seed);
      const Dataset train_set = load_split(af.data, af.train_split);
      const Dataset test_set = load_split(af.data, af.test_split);
      check_compatible(base, train_set);
      prepare_out(dir);
      write_run_record(abl, dir);
      const auto rows = run_ablation(base, axis, grid, edge, train_set, test_set, cfg, derive_seed(seed, "init"));
      for (const auto& r : rows) {
        if (r.status != "ok") {
          err << "warning: skipping " << axis_name << "=" << r.value << ": " << r.note << "\n";
          continue;
        }
        out << axis_name << "=" << r.value << " test acc " << r.test_accuracy << " energy " << r.energy_j << " J\n";
      }
      write_text(dir / "sweep.csv", ablation_csv(axis, rows));
      return kOk;
    }

    if (eng->parsed()) {
      Network net = load_checkpoint(ckpt_path);
      const Dataset d = load_split(energy_data, energy_split);
      check_compatible(net.spec(), d);
      prepare_out(dir);
      write_run_record(eng, dir);
      const EvalResult ev = evaluate(net, d, energy_batch);
      const EnergyReport rep = energy_total(profile_network(net, ev.activity, ev.samples));
      write_text(dir / "energy.csv", energy_csv(rep));
      const std::string table = energy_table(rep);
      write_text(dir / "energy.txt", table);
      out << table << "accuracy " << ev.accuracy << " over " << ev.samples << " samples\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const DimensionError& e) {
    err << "shape mismatch: " << e.what() << "\n";
    return kValidation;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace tskip::cli
