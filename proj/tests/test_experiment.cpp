#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/experiment.hpp"
#include "proxsarah/log.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace proxsarah;

namespace {
ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

std::size_t error_line(const std::string& text, std::string* message = nullptr) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    if (message) *message = e.what();
    return e.line();
  }
  return 0;
}
}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse(
      "# comment\nproblem = binclass\nloss = sigmoid\nepochs = 3\n\nsolver = v1\nsolver = prox-svrg minibatch=true\n");
  CHECK(cfg.problem == "binclass");
  CHECK(cfg.loss == "sigmoid");
  CHECK(cfg.epochs == 3.0);
  REQUIRE(cfg.solvers.size() == 2);
  CHECK(cfg.solvers[1].params.size() == 1);
  CHECK(cfg.solvers[1].line == 7);
  CHECK(cfg.seed == 42);
}

TEST_CASE("config errors name the field and line") {
  std::string msg;
  CHECK(error_line("solver = v1\nsolver = nosuch\n", &msg) == 2);
  CHECK(msg.find("solver") != std::string::npos);
  CHECK(msg.find("nosuch") != std::string::npos);
  CHECK(error_line("colour = red\nsolver = v1\n", &msg) == 1);
  CHECK(msg.find("colour") != std::string::npos);
  CHECK(error_line("epochs = 2\nepochs = 3\nsolver = v1\n") == 2);
  CHECK(error_line("epochs = two\nsolver = v1\n") == 1);
  CHECK(error_line("epochs = 2\n") != 0);
  CHECK(error_line("just words\n") == 1);
}

TEST_CASE("command-line overrides win") {
  ExperimentConfig cfg = parse("seed = 1\nsolver = v1\n");
  RunOverrides o;
  o.seed = 9;
  o.threads = 3;
  apply_overrides(cfg, o);
  CHECK(cfg.seed == 9);
  CHECK(cfg.threads == 3);
  o.epochs = -1.0;
  CHECK_THROWS_AS(apply_overrides(cfg, o), ConfigError);
}

TEST_CASE("CSV layout") {
  RunTrace t;
  TraceRow r;
  r.epoch_fraction = 0.1;
  r.objective = -1.0 / 3.0;
  r.rel_residual = 0.0;
  r.grad_map_norm_sq = 1e-300;
  r.train_acc = 0.5;
  t.rows.push_back(r);
  std::ostringstream out;
  write_trace_csv(out, t);
  CHECK(out.str() ==
        "epoch_fraction,objective,rel_residual,grad_map_norm_sq,train_acc,test_acc,wall_ms\n"
        "0.10000000000000001,-0.33333333333333331,0,1e-300,0.5,,0\n");
}

TEST_CASE("SVG rendering") {
  const std::string svg = render_svg("t", "x", "y", {{"a", {0.0, 1.0, 2.0}, {1.0, 1e-3, 0.0}}}, true);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("small experiment writes its outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "proxsarah_unit_experiment";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = parse("synthetic_n = 60\nsynthetic_d = 8\nepochs = 1\nsolver = v1\nsolver = prox-gd\n");
  cfg.output_dir = dir;
  log::set_level(log::Level::kQuiet);
  const ExperimentOutcome out = run_experiment(cfg);
  log::set_level(log::Level::kWarn);
  REQUIRE(out.solvers.size() == 2);
  CHECK(std::filesystem::exists(out.solvers[0].csv));
  CHECK(out.svg_files.size() == 2);
  CHECK(std::filesystem::exists(out.manifest));
  for (const auto& s : out.solvers) {
    for (const TraceRow& r : s.result.trace.rows) CHECK(r.rel_residual >= 0.0);
  }
  std::filesystem::remove_all(dir);
}
