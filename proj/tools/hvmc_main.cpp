#include "hvmc/errors.hpp"
#include "hvmc/io.hpp"
#include "hvmc/oracle.hpp"
#include "hvmc/svg.hpp"
#include "hvmc/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOutcome {
  double mean = 0.0;
  double std_error = 0.0;
  fs::path dir;
};

RunOutcome run_training(const hvmc::ExperimentConfig& cfg) {
  const fs::path dir = hvmc::resolve_output_dir(cfg.output_dir);
  fs::create_directories(dir);
  hvmc::save_config(dir / "config.json", cfg);
  const fs::path metrics = dir / "metrics.jsonl";
  const fs::path timing = dir / "timing.jsonl";
  std::error_code ec;
  fs::remove(metrics, ec);
  fs::remove(timing, ec);
  fs::remove(dir / "result.json", ec);

  hvmc::WavefunctionModel model = hvmc::make_model(cfg);
  hvmc::Rng init_rng(hvmc::init_seed(cfg.train.seed));
  model.set_params(hvmc::init_params(model.layout, init_rng));

  hvmc::TrainHooks hooks;
  hooks.on_epoch = [&](const hvmc::EpochRecord& rec) {
    hvmc::append_metrics(metrics, rec);
    hvmc::append_timing(timing, rec.epoch, rec.seconds);
    if (rec.epoch % 50 == 0 || rec.epoch == 1) {
      std::printf("epoch %5d  E = %.6f  var = %.4g  lr = %.3g\n", rec.epoch, rec.energy,
                  rec.variance, rec.lr_euclidean);
    }
  };
  hooks.on_checkpoint = [&](const Eigen::VectorXd& params, int epoch, double energy) {
    hvmc::WavefunctionModel snap = model;
    snap.set_params(params);
    hvmc::save_checkpoint(dir / "checkpoint_best", snap, cfg.system, epoch, energy,
                          cfg.train.seed);
  };

  hvmc::TrainResult result;
  try {
    result = hvmc::train(cfg.system, model, cfg.train, hooks);
  } catch (const hvmc::NumericalError&) {
    hvmc::save_checkpoint(dir / "checkpoint_last", model, cfg.system, 0, 0.0, cfg.train.seed);
    throw;  // partial run directory is preserved
  }
  hvmc::save_checkpoint(dir / "checkpoint_last", model, cfg.system, result.epochs_run,
                        result.history.empty() ? 0.0 : result.history.back().energy,
                        cfg.train.seed);
  if (!result.has_checkpoint) {
    hvmc::save_checkpoint(dir / "checkpoint_best", model, cfg.system, result.best_epoch,
                          result.best_energy, cfg.train.seed);
  }

  hvmc::WavefunctionModel best = model;
  best.set_params(result.best_params);
  const auto [mean, se] =
      hvmc::infer(cfg.system, best, cfg.train.eval_samples, hvmc::eval_seed(cfg.train.seed));
  hvmc::append_result(dir / "result.json",
                      hvmc::EvalRecord{mean, se, cfg.train.eval_samples,
                                       hvmc::eval_seed(cfg.train.seed)});
  std::printf("trained %d epochs (best epoch %d, best E = %.6f)\n", result.epochs_run,
              result.best_epoch, result.best_energy);
  std::printf("inference over %d samples: %.6f\n", cfg.train.eval_samples, mean);
  std::printf("standard error:            %.6f\n", se);
  return RunOutcome{mean, se, dir};
}

int cmd_train(const std::string& config_path) {
  const hvmc::ExperimentConfig cfg = hvmc::load_config(config_path);
  run_training(cfg);
  return 0;
}

int cmd_ed(int n, double j1, double j2, double j3, const std::string& vector_out) {
  const hvmc::HeisenbergSpec spec{n, j1, j2, j3};
  const hvmc::EDResult ed = hvmc::ed_ground(spec);
  std::printf("ground energy: %.8f\n", ed.energy);
  if (!vector_out.empty()) {
    std::ofstream out(vector_out, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + vector_out);
    out.precision(17);
    for (Eigen::Index i = 0; i < ed.ground_vector.size(); ++i) {
      out << ed.ground_vector[i] << "\n";
    }
  }
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, int samples, std::uint64_t seed,
                 std::string out_path) {
  const hvmc::Checkpoint ck = hvmc::load_checkpoint(checkpoint);
  const auto [mean, se] = hvmc::infer(ck.system, ck.model, samples, seed);
  if (out_path.empty()) {
    out_path = (fs::path(checkpoint).parent_path() / "result.json").string();
  }
  hvmc::append_result(out_path, hvmc::EvalRecord{mean, se, samples, seed});
  std::printf("inference over %d samples: %.6f\n", samples, mean);
  std::printf("standard error:            %.6f\n", se);
  return 0;
}

void set_sweep_param(hvmc::ExperimentConfig& cfg, const std::string& param, double value) {
  if (param == "r_max") {
    if (!(value > 0.0) || value > 1.0) throw hvmc::ConfigError("r_max values must lie in (0, 1]");
    cfg.geo.r_max = value;
  } else if (param == "l_max") {
    if (value < 0.0) throw hvmc::ConfigError("l_max values must be >= 0");
    cfg.geo.l_max = value;
  } else if (param == "lr_hyperbolic") {
    if (!(value > 0.0)) throw hvmc::ConfigError("lr_hyperbolic values must be positive");
    cfg.train.lr_hyperbolic = value;
  } else {
    throw hvmc::ConfigError("parameter \"" + param +
                            "\" is not sweepable (use r_max, l_max or lr_hyperbolic)");
  }
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv) {
  const hvmc::ExperimentConfig base = hvmc::load_config(config_path);
  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) values.push_back(std::stod(tok));
  }
  if (values.empty()) throw hvmc::ConfigError("sweep: no values given");

  json summary = json::array();
  struct Row {
    double value, mean, se;
  };
  std::vector<Row> ok_rows;
  for (const double value : values) {
    hvmc::ExperimentConfig cfg = base;
    set_sweep_param(cfg, param, value);
    std::ostringstream name;
    name << "sweep_" << param << "_" << value;
    cfg.output_dir = (fs::path(base.output_dir) / name.str()).string();
    std::printf("--- %s = %g ---\n", param.c_str(), value);
    try {
      const RunOutcome run = run_training(cfg);
      summary.push_back({{"value", value},
                         {"mean", run.mean},
                         {"std_error", run.std_error},
                         {"dir", run.dir.string()}});
      ok_rows.push_back(Row{value, run.mean, run.std_error});
    } catch (const std::exception& e) {
      std::fprintf(stderr, "sweep child %s=%g failed: %s\n", param.c_str(), value, e.what());
      summary.push_back({{"value", value}, {"error", e.what()}});
    }
  }
  std::sort(ok_rows.begin(), ok_rows.end(),
            [](const Row& a, const Row& b) { return a.mean < b.mean; });
  const fs::path base_dir = hvmc::resolve_output_dir(base.output_dir);
  fs::create_directories(base_dir);
  std::ofstream out(base_dir / "sweep_summary.json", std::ios::trunc);
  out << json{{"param", param}, {"runs", summary}}.dump(2) << "\n";
  std::printf("\nranking (best first):\n");
  for (const Row& r : ok_rows) {
    std::printf("  %s = %-8g  E = %.6f  +- %.6f\n", param.c_str(), r.value, r.mean, r.se);
  }
  return 0;
}

int cmd_plot(const std::vector<std::string>& runs, const std::string& out_file,
             const std::string& style, bool inset, const std::string& title) {
  std::vector<hvmc::svg::RunPoint> points;
  std::vector<hvmc::svg::Curve> curves;
  for (const std::string& run : runs) {
    const fs::path dir(run);
    const std::string label = dir.filename().empty() ? dir.string() : dir.filename().string();
    try {
      if (style == "curves") {
        const auto metrics = hvmc::read_metrics(dir / "metrics.jsonl");
        hvmc::svg::Curve c;
        c.label = label;
        for (const auto& rec : metrics) {
          c.epochs.push_back(rec.epoch);
          c.energies.push_back(rec.energy);
        }
        curves.push_back(std::move(c));
      } else {
        const auto results = hvmc::read_results(dir / "result.json");
        if (results.empty()) throw std::runtime_error("result.json holds no records");
        points.push_back(
            hvmc::svg::RunPoint{label, results.back().mean, results.back().std_error});
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: skipping run %s: %s\n", run.c_str(), e.what());
    }
  }
  hvmc::svg::PlotOptions opts;
  opts.inset = inset;
  opts.title = title;
  std::string body;
  if (style == "dots") {
    body = hvmc::svg::plot_dots(points, opts);
  } else if (style == "curves") {
    body = hvmc::svg::plot_curves(curves, opts);
  } else if (style == "ranking") {
    body = hvmc::svg::plot_ranking(points, opts);
  } else {
    throw hvmc::ConfigError("unknown plot style \"" + style + "\"");
  }
  std::ofstream out(out_file, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_file);
  out << body;
  std::printf("wrote %s\n", out_file.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational Monte Carlo for Heisenberg chains with recurrent "
               "euclidean and hyperbolic wavefunctions"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train = app.add_subcommand("train", "run a training experiment from a config file");
  train->add_option("--config", config_path, "experiment config JSON")->required();

  int ed_n = 2;
  double ed_j1 = 1.0, ed_j2 = 0.0, ed_j3 = 0.0;
  std::string ed_vector;
  auto* ed = app.add_subcommand("ed", "exact ground-state energy of a small chain");
  ed->add_option("--n", ed_n, "number of sites")->required();
  ed->add_option("--j1", ed_j1, "nearest-neighbor coupling");
  ed->add_option("--j2", ed_j2, "second-neighbor coupling");
  ed->add_option("--j3", ed_j3, "third-neighbor coupling");
  ed->add_option("--vector", ed_vector, "write the ground vector to this file");

  std::string eval_checkpoint, eval_out;
  int eval_samples = 10000;
  std::uint64_t eval_seed_opt = 12345;
  auto* evaluate = app.add_subcommand("evaluate", "inference from a saved checkpoint");
  evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint directory")->required();
  evaluate->add_option("--samples", eval_samples, "number of inference samples");
  evaluate->add_option("--seed", eval_seed_opt, "sampling seed");
  evaluate->add_option("--out", eval_out, "result file (default: <run>/result.json)");

  std::string sweep_config, sweep_param, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "train once per value of a hyperparameter");
  sweep->add_option("--config", sweep_config, "base experiment config JSON")->required();
  sweep->add_option("--param", sweep_param, "r_max | l_max | lr_hyperbolic")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  std::vector<std::string> plot_runs;
  std::string plot_out, plot_style = "dots", plot_title;
  bool plot_inset = false;
  auto* plot = app.add_subcommand("plot", "emit an SVG from run directories");
  plot->add_option("--runs", plot_runs, "run directories")->required()->expected(-1);
  plot->add_option("--out", plot_out, "output SVG file")->required();
  plot->add_option("--style", plot_style, "dots | curves | ranking");
  plot->add_flag("--inset", plot_inset, "add a zoom inset (curves style)");
  plot->add_option("--title", plot_title, "plot title");

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(config_path);
    if (ed->parsed()) return cmd_ed(ed_n, ed_j1, ed_j2, ed_j3, ed_vector);
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_checkpoint, eval_samples, eval_seed_opt, eval_out);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_param, sweep_values);
    if (plot->parsed()) return cmd_plot(plot_runs, plot_out, plot_style, plot_inset, plot_title);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const hvmc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const hvmc::ResourceLimitError& e) {
    std::fprintf(stderr, "resource guard: %s\n", e.what());
    return 3;
  } catch (const hvmc::NumericalError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
