#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"
#include "mycloth/paint/paint.hpp"
#include "mycloth/service/http_server.hpp"
#include "mycloth/service/studio.hpp"
#include "mycloth/train/ablation.hpp"
#include "mycloth/train/evaluate.hpp"
#include "mycloth/train/run_config.hpp"
#include "mycloth/tryon/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace mycloth;

namespace {

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

service::ServiceConfig service_config(const std::optional<std::string>& config_file) {
  if (config_file) return service::load_service_config(*config_file);
  return {};
}

train::DatasetSplit load_data(bool toy, const train::RunConfig& run, const std::optional<std::string>& root,
                              train::Split split, std::uint64_t seed_offset) {
  if (toy) return train::make_toy_dataset(run.toy_samples, run.toy_seed + seed_offset);
  if (!root) throw ConfigError("--data is required unless --toy is given");
  return train::load_viton(*root, split);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mycloth: T-shirt design studio, try-on training and evaluation"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  // init
  auto* init = app.add_subcommand("init", "Seed a data directory with patterns and avatars");
  std::string init_dir = "data";
  init->add_option("--data-dir", init_dir)->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::optional<std::string> serve_config, serve_data, serve_checkpoint, serve_backend, serve_host;
  std::optional<int> serve_port;
  serve->add_option("--config", serve_config, "JSON config file");
  serve->add_option("--port", serve_port);
  serve->add_option("--host", serve_host);
  serve->add_option("--data-dir", serve_data);
  serve->add_option("--checkpoint", serve_checkpoint, "checkpoint dir, or 'identity'");
  serve->add_option("--paint-backend", serve_backend)->check(CLI::IsMember({"mock", "remote"}));

  // render
  auto* render = app.add_subcommand("render", "Render a session's design to PNG");
  std::string render_session, render_out;
  std::optional<std::string> render_config, render_data;
  render->add_option("--session", render_session)->required();
  render->add_option("--out", render_out)->required();
  render->add_option("--config", render_config);
  render->add_option("--data-dir", render_data);

  // paint
  auto* paint_cmd = app.add_subcommand("paint", "Generate a paint from a theme with the mock backends");
  std::string paint_prompt, paint_out;
  int paint_size = 256;
  paint_cmd->add_option("--prompt", paint_prompt)->required();
  paint_cmd->add_option("--out", paint_out)->required();
  paint_cmd->add_option("--size", paint_size)->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the try-on network");
  std::optional<std::string> train_config, train_data;
  std::string train_out = "runs/train";
  bool train_toy = false;
  train_cmd->add_option("--config", train_config);
  train_cmd->add_option("--data", train_data, "VITON root");
  train_cmd->add_option("--out", train_out)->capture_default_str();
  train_cmd->add_flag("--toy", train_toy, "use the procedural toy dataset");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a paired split");
  std::string eval_checkpoint, eval_report = "report.json";
  std::optional<std::string> eval_config, eval_data;
  bool eval_toy = false;
  int eval_workers = 1;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint dir, 'identity' or 'oracle'")->required();
  eval_cmd->add_option("--config", eval_config);
  eval_cmd->add_option("--data", eval_data, "VITON root");
  eval_cmd->add_option("--report", eval_report)->capture_default_str();
  eval_cmd->add_option("--workers", eval_workers)->capture_default_str();
  eval_cmd->add_flag("--toy", eval_toy);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate the five ablation configurations");
  std::optional<std::string> ablate_config, ablate_data;
  std::string ablate_out = "runs/ablation";
  bool ablate_toy = false;
  ablate->add_option("--config", ablate_config);
  ablate->add_option("--data", ablate_data, "VITON root");
  ablate->add_option("--out", ablate_out)->capture_default_str();
  ablate->add_flag("--toy", ablate_toy);
  std::vector<std::uint64_t> ablate_seeds = {0, 1, 2};
  int ablate_window = 10;
  ablate->add_option("--seeds", ablate_seeds, "one training run per seed")->capture_default_str();
  ablate->add_option("--final-window", ablate_window, "trailing steps averaged into the final loss")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*init) {
      design::write_seed_catalog(fs::path(init_dir) / "patterns");
      service::write_seed_gallery(fs::path(init_dir) / "avatars");
      std::printf("seeded %s\n", init_dir.c_str());
    } else if (*serve) {
      service::ServiceConfig c = service_config(serve_config);
      if (serve_port) c.port = *serve_port;
      if (serve_host) c.host = *serve_host;
      if (serve_data) c.data_dir = *serve_data;
      if (serve_checkpoint) c.checkpoint = *serve_checkpoint;
      if (serve_backend) c.paint.backend = paint::parse_backend(*serve_backend);
      c.validate();
      auto studio = std::make_shared<service::Studio>(c);
      service::HttpServer server(studio);
      const int port = server.bind(c.host, c.port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("listening on http://{}:{}", c.host, port);
      server.listen_after_bind();
      g_server = nullptr;
    } else if (*render) {
      service::ServiceConfig c = service_config(render_config);
      if (render_data) c.data_dir = *render_data;
      c.checkpoint.reset();
      service::Studio studio(c);
      const auto image = studio.render(render_session);
      design::write_file_bytes(render_out, image->png);
      std::printf("wrote %s (revision %lld)\n", render_out.c_str(),
                  studio.get_session(render_session).state.revision);
    } else if (*paint_cmd) {
      paint::MockPromptRefiner refiner;
      paint::MockTextToImage t2i;
      const std::string refined = paint::refine_prompt(paint_prompt, refiner);
      const paint::PaintAsset asset = paint::generate_paint(paint_prompt, refined, t2i, paint_size, paint_size);
      design::write_png(paint_out, asset.image);
      std::printf("%s\n", refined.c_str());
    } else if (*train_cmd) {
      train::RunConfig run = train::load_run_config(train_config, train_toy);
      const train::DatasetSplit data = load_data(train_toy, run, train_data, train::Split::kTrain, 0);
      if (data.pose_channels != run.model.pose_channels) {
        throw ConfigError("model.pose_channels is " + std::to_string(run.model.pose_channels) + " but the data has " +
                          std::to_string(data.pose_channels));
      }
      run.train.output_dir = train_out;
      fs::create_directories(train_out);
      atomic_write(fs::path(train_out) / "run_config.json",
                   nlohmann::json{{"model", tryon::to_json(run.model)}, {"train", train::to_json(run.train)}}.dump(2));
      auto extractor = train::make_extractor(run);
      tryon::TryOnNet net(run.model);
      spdlog::info("training {} parameters on {} samples", net.parameter_count(), data.size());
      const train::TrainResult result = train::train(net, run.train, data, *extractor, [](const train::StepRecord& r) {
        if (r.step % 10 == 0) spdlog::info("step {} epoch {} lr {:.3g} loss {:.5f}", r.step, r.epoch, r.lr, r.total);
      });
      tryon::save_checkpoint(fs::path(train_out) / "last", net, result.state);
      std::printf("trained %lld steps; final loss %.6f\n", result.state.step,
                  result.history.empty() ? 0.0 : result.history.back().total);
    } else if (*eval_cmd) {
      const train::RunConfig run = train::load_run_config(eval_config, eval_toy);
      const train::DatasetSplit data = load_data(eval_toy, run, eval_data, train::Split::kTest, 1000);
      const auto predictor = tryon::load_predictor(eval_checkpoint);
      train::EvaluateOptions options;
      options.workers = eval_workers;
      options.report_path = eval_report;
      const train::MetricsReport report = train::evaluate(*predictor, data, train::RandomProjectionEmbedder(),
                                                          train::SoftmaxProjectionClassifier(), options);
      std::cout << train::to_json(report).dump(2) << "\n";
    } else if (*ablate) {
      const train::RunConfig run = train::load_run_config(ablate_config, ablate_toy);
      const train::DatasetSplit data = load_data(ablate_toy, run, ablate_data, train::Split::kTrain, 0);
      const train::DatasetSplit eval = load_data(ablate_toy, run, ablate_data, train::Split::kTest, 1000);
      train::AblationOptions options;
      options.model = run.model;
      options.train = run.train;
      options.output_dir = ablate_out;
      options.seeds = ablate_seeds;
      options.final_window = ablate_window;
      auto extractor = train::make_extractor(run);
      const train::AblationTable table = train::run_ablation(options, data, eval, *extractor);
      std::cout << train::to_csv(table);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
