#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/temp_dir.hpp"

using mycloth::testing::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run cli(const TempDir& dir, const std::string& args) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = std::string("\"") + MYCLOTH_CLI + "\" --log-level warn " + args + " > \"" + log.string() +
                          "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

// Two-scale model with two-channel hidden layers, a few steps on four toy samples.
fs::path tiny_run_config(const TempDir& dir) {
  const json j = {{"model",
                   {{"num_scales", 2},
                    {"fpn_dims", {8, 8}},
                    {"fpn_out_dim", 8},
                    {"afe_hidden_dims", {2, 2, 2, 2}},
                    {"gen_hidden_dims", {2, 2, 2}},
                    {"frw_hidden_dim", 2},
                    {"channel_reduction", 2}}},
                  {"train", {{"batch_size", 2}, {"epochs", 1}, {"max_steps", 2}, {"initial_lr", 1e-3}}},
                  {"toy", {{"samples", 4}, {"seed", 3}}},
                  {"perceptual", {{"extractor", "random-conv"}}}};
  const fs::path path = dir / "run.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

bool is_png(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  char sig[8] = {};
  in.read(sig, 8);
  return in.gcount() == 8 && std::string(sig + 1, 3) == "PNG";
}

}  // namespace

TEST_CASE("help and bad arguments") {
  TempDir dir;
  CHECK(cli(dir, "--help").status == 0);
  CHECK(cli(dir, "render").status != 0);
  CHECK(cli(dir, "serve --paint-backend carrier-pigeon").status != 0);
}

TEST_CASE("init then render a hand-written session") {
  TempDir dir;
  const fs::path data = dir / "data";
  Run init = cli(dir, "init --data-dir \"" + data.string() + "\"");
  REQUIRE(init.status == 0);
  CHECK(fs::exists(data / "patterns"));
  CHECK(fs::exists(data / "avatars"));

  const std::string id = "0123456789abcdef0123456789abcdef";
  fs::create_directories(data / "sessions");
  std::ofstream(data / "sessions" / (id + ".json"))
      << json{{"session_id", id},
              {"pattern_id", "crew"},
              {"target_color", {{"r", 30}, {"g", 90}, {"b", 200}}},
              {"paint_asset_id", nullptr},
              {"placement", nullptr},
              {"revision", 2},
              {"created_at", "2024-01-01T00:00:00Z"},
              {"updated_at", "2024-01-01T00:00:00Z"},
              {"render_cache_key", nullptr}}
             .dump();
  const fs::path out = dir / "render.png";
  Run render = cli(dir, "render --data-dir \"" + data.string() + "\" --session " + id + " --out \"" +
                                out.string() + "\"");
  CHECK_MESSAGE(render.status == 0, render.output);
  CHECK(render.output.find("revision 2") != std::string::npos);
  CHECK(is_png(out));

  Run missing = cli(dir, "render --data-dir \"" + data.string() +
                                 "\" --session ffffffffffffffffffffffffffffffff --out \"" + out.string() + "\"");
  CHECK(missing.status == 1);
}

TEST_CASE("paint writes a png and prints the refined prompt") {
  TempDir dir;
  const fs::path out = dir / "paint.png";
  Run r = cli(dir, "paint --prompt \"tiger stripes\" --size 64 --out \"" + out.string() + "\"");
  CHECK_MESSAGE(r.status == 0, r.output);
  CHECK(r.output.find("tiger stripes") != std::string::npos);
  CHECK(is_png(out));
  CHECK(cli(dir, "paint --prompt x --size 32 --out \"" + out.string() + "\"").status == 1);
}

TEST_CASE("toy train, eval and ablate") {
  TempDir dir;
  const fs::path config = tiny_run_config(dir);
  const fs::path run = dir / "run";
  Run train = cli(dir, "train --toy --config \"" + config.string() + "\" --out \"" + run.string() + "\"");
  REQUIRE_MESSAGE(train.status == 0, train.output);
  CHECK(train.output.find("trained 2 steps") != std::string::npos);
  CHECK(fs::exists(run / "run_config.json"));
  CHECK(fs::exists(run / "metrics.jsonl"));
  CHECK(fs::is_directory(run / "last"));

  const fs::path report = dir / "report.json";
  Run eval = cli(dir, "eval --toy --config \"" + config.string() + "\" --checkpoint \"" + (run / "last").string() +
                              "\" --report \"" + report.string() + "\"");
  REQUIRE_MESSAGE(eval.status == 0, eval.output);
  std::ifstream in(report);
  const json rep = json::parse(in);
  CHECK(rep.at("ssim").get<double>() > -1.0);
  CHECK(rep.at("ssim").get<double>() <= 1.0);
  CHECK(rep.contains("fid"));

  const fs::path abl = dir / "ablation";
  Run ablate = cli(dir, "ablate --toy --config \"" + config.string() + "\" --out \"" + abl.string() +
                                "\" --seeds 0 --final-window 1");
  REQUIRE_MESSAGE(ablate.status == 0, ablate.output);
  CHECK(fs::exists(abl / "ablation.csv"));
  std::ifstream csv(abl / "ablation.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 6);

  Run bad = cli(dir, "eval --toy --checkpoint \"" + (dir / "nowhere").string() + "\"");
  CHECK(bad.status == 1);
}
