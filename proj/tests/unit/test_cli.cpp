#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/tempdir.hpp"
#include "tskip/arch_io.hpp"
#include "tskip/checkpoint.hpp"
#include "tskip/cli/ablate.hpp"
#include "tskip/cli/cli.hpp"
#include "tskip/data.hpp"
#include "tskip/network.hpp"

using namespace tskip;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = tskip::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

/// Small delayed-recall dataset written through the CLI.
fs::path small_data(const testing::TempDir& dir, std::size_t T = 10, std::size_t D = 2) {
  const Run r = invoke({"synth", "--task", "delayed-recall", "--D", std::to_string(D), "--T", std::to_string(T), "--n",
                     "40", "--classes", "2", "--seed", "3", "--out", (dir / "data").string()});
  REQUIRE(r.code == 0);
  return dir / "data" / "manifest.json";
}

std::string write_spec(const testing::TempDir& dir, const std::string& name, const std::string& json) {
  const fs::path p = dir / name;
  std::ofstream(p) << json;
  return p.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes the requested samples reproducibly") {
    testing::TempDir dir("cli_synth");
    const Run a = invoke({"synth", "--task", "delayed-recall", "--D", "16", "--T", "99", "--n", "2000", "--seed", "1",
                       "--out", (dir / "a").string()});
    REQUIRE(a.code == 0);
    const Manifest m = load_manifest(dir / "a" / "manifest.json");
    CHECK(m.entries.size() == 2000);
    CHECK(m.T == 99);
    for (const auto& e : m.entries) CHECK((e.label >= 0 && e.label < 10));
    const Run b = invoke({"synth", "--task", "delayed-recall", "--D", "16", "--T", "99", "--n", "2000", "--seed", "1",
                       "--out", (dir / "b").string()});
    REQUIRE(b.code == 0);
    for (const char* f : {"manifest.json", "train/000000.csv", "train/001599.csv", "test/001999.csv"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_FALSE(slurp(dir / "a" / "train/000000.csv").empty());
    const auto rec = nlohmann::json::parse(slurp(dir / "a" / "run.json"));
    CHECK(rec["command"] == "synth");
    CHECK(rec["options"]["D"] == "16");
  }

  TEST_CASE("usage errors") {
    testing::TempDir dir("cli_usage");
    CHECK(invoke({"synth", "--D", "99", "--T", "99", "--out", dir.path().string()}).code == 1);
    CHECK(invoke({"synth", "--D", "120", "--T", "99", "--out", dir.path().string()}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"synth"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
  }

  TEST_CASE("train validates the architecture") {
    testing::TempDir dir("cli_train_bad");
    const fs::path data = small_data(dir);
    const std::string spec = write_spec(
        dir, "bad.json", R"({"input": "3", "T": 10, "layers": ["d8", "d2/int"], "tskips": [{"origin": 2, "destination": 1, "delta_t": 0}]})");
    const Run r = invoke({"train", "--spec", spec, "--data", data.string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("same-step cycle") != std::string::npos);
  }

  TEST_CASE("train is deterministic and honours config files") {
    testing::TempDir dir("cli_train");
    const fs::path data = small_data(dir);
    const std::string spec = write_spec(dir, "s.json",
                                        R"({"input": "3", "T": 10, "layers": ["d8", "d2/int"], "tskips": [{"origin": 0, "destination": 2, "delta_t": 2}]})");
    auto train = [&](const std::string& out, std::vector<std::string> extra) {
      std::vector<std::string> args{"train", "--spec", spec, "--data", data.string(), "--epochs", "3", "--batch-size",
                                    "8", "--seed", "5", "--out", (dir / out).string()};
      args.insert(args.end(), extra.begin(), extra.end());
      return invoke(args);
    };
    REQUIRE(train("a", {}).code == 0);
    REQUIRE(train("b", {}).code == 0);
    CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));
    const auto rows = csv_rows(dir / "a" / "metrics.csv");
    CHECK(rows.size() == 7);
    CHECK(load_checkpoint(dir / "a" / "checkpoint.json").spec() == load_arch(spec));

    // A config file supplies values; explicit flags still win.
    std::ofstream(dir / "cfg.json") << R"({"epochs": 1, "batch-size": 8, "seed": 5, "scheduler": "multistep"})";
    REQUIRE(invoke({"train", "--config", (dir / "cfg.json").string(), "--spec", spec, "--data", data.string(), "--out",
                 (dir / "c").string(), "--epochs", "2"})
                .code == 0);
    CHECK(csv_rows(dir / "c" / "metrics.csv").size() == 5);
    const auto rec = nlohmann::json::parse(slurp(dir / "c" / "run.json"));
    CHECK(rec["options"]["epochs"] == "2");
    CHECK(rec["options"]["scheduler"] == "multistep");
    // The resolved record replays the run exactly.
    REQUIRE(invoke({"train", "--config", (dir / "c" / "run.json").string(), "--out", (dir / "d").string()}).code == 0);
    CHECK(slurp(dir / "c" / "metrics.csv") == slurp(dir / "d" / "metrics.csv"));
  }

  TEST_CASE("train defaults follow the classification recipe") {
    testing::TempDir dir("cli_defaults");
    const fs::path data = small_data(dir);
    const std::string spec = write_spec(dir, "s.json", R"({"input": "3", "T": 10, "layers": ["d4", "d2/int"]})");
    // Run zero epochs just to capture the resolved defaults.
    REQUIRE(invoke({"train", "--spec", spec, "--data", data.string(), "--epochs", "0", "--out", (dir / "o").string()})
                .code == 0);
    const auto rec = nlohmann::json::parse(slurp(dir / "o" / "run.json"));
    CHECK(rec["options"]["lr"] == "0.001");
    CHECK(rec["options"]["min-lr"] == "5e-06");
    CHECK(rec["options"]["scheduler"] == "cosine");
    CHECK(rec["options"]["loss"] == "cross_entropy");
  }

  TEST_CASE("search") {
    testing::TempDir dir("cli_search");
    const Run one = invoke({"search", "--preset", "shd", "--n", "1", "--k", "1", "--probe-batch", "4", "--seed", "2",
                         "--out", (dir / "one").string()});
    REQUIRE(one.code == 0);
    const auto rows = csv_rows(dir / "one" / "report.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "rank");
    const ArchSpec best = load_arch(dir / "one" / rows[1][5]);
    CHECK(param_count(best) <= 300000);
    for (const auto& e : best.tskips) CHECK((e.delta_t >= 10 && e.delta_t <= 45));

    REQUIRE(invoke({"search", "--preset", "shd", "--n", "6", "--k", "3", "--probe-batch", "4", "--seed", "2", "--out",
                 (dir / "s").string()})
                .code == 0);
    REQUIRE(invoke({"search", "--preset", "shd", "--n", "6", "--k", "3", "--probe-batch", "4", "--seed", "2",
                 "--parallel", "4", "--out", (dir / "p").string()})
                .code == 0);
    CHECK(slurp(dir / "s" / "report.csv") == slurp(dir / "p" / "report.csv"));
    CHECK(invoke({"search", "--preset", "shd", "--budget", "100", "--n", "2", "--out", (dir / "x").string()}).code == 2);
  }

  TEST_CASE("ablate") {
    testing::TempDir dir("cli_ablate");
    const fs::path data = small_data(dir);
    const std::string spec = write_spec(
        dir, "mlp8.json",
        R"({"input": "3", "T": 10, "layers": ["d4","d4","d4","d4","d4","d4","d4","d2/int"], "tskips": [{"origin": 0, "destination": 2, "delta_t": 2}]})");
    CHECK(invoke({"ablate", "--axis", "position", "--grid", "", "--spec", spec, "--data", data.string(), "--out",
               (dir / "e").string()})
              .code == 1);
    const Run r = invoke({"ablate", "--axis", "position", "--grid", "2,3,4,5,6,7", "--spec", spec, "--data",
                       data.string(), "--epochs", "1", "--batch-size", "8", "--out", (dir / "pos").string()});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(dir / "pos" / "sweep.csv");
    REQUIRE(rows.size() == 7);
    CHECK(rows[0][0] == "axis");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i][1] == std::to_string(i + 1));
      CHECK(rows[i][2] == "ok");
    }

    const Run dt = invoke({"ablate", "--axis", "delta_t", "--grid", "1,4,10", "--spec", spec, "--data", data.string(),
                        "--epochs", "1", "--batch-size", "8", "--out", (dir / "dt").string()});
    REQUIRE(dt.code == 0);
    const auto dt_rows = csv_rows(dir / "dt" / "sweep.csv");
    REQUIRE(dt_rows.size() == 4);
    CHECK(dt_rows[3][2] == "invalid");
    CHECK(dt.err.find("warning") != std::string::npos);
    CHECK(invoke({"ablate", "--axis", "delta_t", "--grid", "4,x", "--spec", spec, "--data", data.string(), "--out",
                  (dir / "bad").string()})
              .code == 1);
  }

  TEST_CASE("ablation variants") {
    const ArchSpec base = parse_arch(
        R"({"input": "3", "T": 10, "layers": ["d4","d4","d4","d2/int"], "tskips": [{"origin": 4, "destination": 2, "delta_t": 2}]})");
    const ArchSpec deeper = cli::ablation_variant(base, cli::AblationAxis::Depth, 6, 0);
    CHECK(deeper.depth() == 6);
    CHECK(deeper.tskips[0].origin == 6);
    CHECK(deeper.layers.back() == base.layers.back());
    const ArchSpec shallower = cli::ablation_variant(base, cli::AblationAxis::Depth, 3, 0);
    CHECK(shallower.depth() == 3);
    CHECK(shallower.tskips[0].origin == 3);
    CHECK(cli::ablation_variant(base, cli::AblationAxis::DeltaT, 7, 0).tskips[0].delta_t == 7);
    CHECK(cli::ablation_variant(base, cli::AblationAxis::Position, 3, 0).tskips[0].destination == 3);
  }

  TEST_CASE("energy reports") {
    testing::TempDir dir("cli_energy");
    const fs::path data = small_data(dir);
    auto energy_rows = [&](const ArchSpec& spec, const std::string& name) {
      save_checkpoint(Network(spec, 1), dir / (name + ".json"));
      const Run r = invoke({"energy", "--checkpoint", (dir / (name + ".json")).string(), "--data", data.string(),
                         "--out", (dir / name).string()});
      REQUIRE(r.code == 0);
      CHECK(fs::exists(dir / name / "energy.txt"));
      return csv_rows(dir / name / "energy.csv");
    };
    auto check_totals = [](const std::vector<std::vector<std::string>>& rows) {
      double sum = 0;
      for (std::size_t i = 1; i + 1 < rows.size(); ++i) sum += std::stod(rows[i][8]);
      CHECK(std::stod(rows.back()[8]) == doctest::Approx(sum).epsilon(1e-12));
    };

    ArchSpec ann = parse_arch(R"({"input": "3", "T": 10, "layers": ["d8/relu", "d8/relu", "d2/lin"]})");
    const auto ann_rows = energy_rows(ann, "ann");
    double mac = 0;
    for (std::size_t i = 1; i + 1 < ann_rows.size(); ++i) {
      CHECK(ann_rows[i][1] == "ann");
      mac += std::stod(ann_rows[i][7]);
    }
    CHECK(mac == 3 * 8 + 8 * 8 + 8 * 2);
    CHECK(std::stod(ann_rows.back()[8]) == doctest::Approx(mac * 4.6e-12).epsilon(1e-12));
    check_totals(ann_rows);

    ArchSpec silent = parse_arch(R"({"input": "3", "T": 10, "layers": ["d8", "d8", "d2/int"]})");
    for (auto& L : silent.layers) L.lif.threshold = 1e9;
    const auto silent_rows = energy_rows(silent, "silent");
    for (std::size_t i = 1; i + 1 < silent_rows.size(); ++i)
      if (silent_rows[i][1] == "snn") CHECK(std::stod(silent_rows[i][8]) == 0.0);
    check_totals(silent_rows);

    CHECK(invoke({"energy", "--checkpoint", (dir / "missing.json").string(), "--data", data.string(), "--out",
                  (dir / "m").string()})
              .code == 1);
    std::ofstream(dir / "corrupt.json") << R"({"format": "tskip-checkpoint", "version": 99})";
    CHECK(invoke({"energy", "--checkpoint", (dir / "corrupt.json").string(), "--data", data.string(), "--out",
                  (dir / "m").string()})
              .code == 2);
  }
}
