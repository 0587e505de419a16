#include "hvmc/io.hpp"

#include "hvmc/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdlib>
#include <fstream>
#include <set>

static_assert(std::endian::native == std::endian::little,
              "checkpoint segment files are little-endian f64");

namespace hvmc {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing required key \"" + std::string(key) + "\" in " + where);
  return obj.at(key);
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a string");
  return v.get<std::string>();
}

ClampMode parse_clamp_mode(const std::string& s) {
  if (s == "single") return ClampMode::single;
  if (s == "double") return ClampMode::double_clamp;
  throw ConfigError("clamp_mode must be \"single\" or \"double\", got \"" + s + "\"");
}

const char* clamp_mode_name(ClampMode m) {
  return m == ClampMode::single ? "single" : "double";
}

Sublattice parse_sublattice(const std::string& s) {
  if (s == "even") return Sublattice::even;
  if (s == "odd") return Sublattice::odd;
  throw ConfigError("marshall_sublattice must be \"even\" or \"odd\", got \"" + s + "\"");
}

const char* sublattice_name(Sublattice s) {
  return s == Sublattice::even ? "even" : "odd";
}

void write_doubles(const std::filesystem::path& file, const double* data, std::size_t count) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + file.string());
}

std::vector<double> read_doubles(const std::filesystem::path& file, std::size_t count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
    throw std::runtime_error("truncated segment file " + file.string());
  }
  return data;
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.variant == b.variant && a.hidden == b.hidden &&
         a.geo.curvature == b.geo.curvature && a.geo.r_max == b.geo.r_max &&
         a.geo.l_max == b.geo.l_max && a.geo.clamp_mode == b.geo.clamp_mode &&
         a.phase_pi_scaling == b.phase_pi_scaling && a.marshall == b.marshall &&
         a.system.n == b.system.n && a.system.j1 == b.system.j1 && a.system.j2 == b.system.j2 &&
         a.system.j3 == b.system.j3 && a.train.epochs == b.train.epochs &&
         a.train.batch == b.train.batch && a.train.lr_euclidean == b.train.lr_euclidean &&
         a.train.lr_hyperbolic == b.train.lr_hyperbolic &&
         a.train.plateau_factor == b.train.plateau_factor &&
         a.train.plateau_patience == b.train.plateau_patience &&
         a.train.early_stop_patience == b.train.early_stop_patience &&
         a.train.grad_clip_norm == b.train.grad_clip_norm &&
         a.train.variance_tolerance == b.train.variance_tolerance &&
         a.train.seed == b.train.seed && a.train.eval_samples == b.train.eval_samples &&
         a.output_dir == b.output_dir;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(j, {"model", "system", "train", "output"}, "config root");

  ExperimentConfig cfg;

  const json& model = require(j, "model", "config root");
  reject_unknown_keys(model,
                      {"variant", "hidden", "r_max", "l_max", "clamp_mode", "phase_pi_scaling",
                       "marshall_sublattice"},
                      "model");
  try {
    cfg.variant = parse_variant(require(model, "variant", "model").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.hidden = get_int(model, "hidden", 0, "model");
  if (cfg.hidden < 1) throw ConfigError("model.hidden must be a positive integer");
  cfg.geo.r_max = get_number(model, "r_max", 1.0, "model");
  if (!(cfg.geo.r_max > 0.0) || cfg.geo.r_max > 1.0) {
    throw ConfigError("model.r_max must lie in (0, 1]");
  }
  cfg.geo.l_max = get_number(model, "l_max", 0.0, "model");
  if (cfg.geo.l_max < 0.0) throw ConfigError("model.l_max must be >= 0 (0 disables the clamp)");
  cfg.geo.clamp_mode = parse_clamp_mode(get_string(model, "clamp_mode", "single", "model"));
  cfg.phase_pi_scaling = get_bool(model, "phase_pi_scaling", false, "model");
  cfg.marshall = parse_sublattice(get_string(model, "marshall_sublattice", "even", "model"));

  const json& system = require(j, "system", "config root");
  reject_unknown_keys(system, {"n", "j1", "j2", "j3"}, "system");
  cfg.system.n = get_int(system, "n", 0, "system");
  if (cfg.system.n < 2) throw ConfigError("system.n must be >= 2");
  cfg.system.j1 = get_number(system, "j1", 1.0, "system");
  cfg.system.j2 = get_number(system, "j2", 0.0, "system");
  cfg.system.j3 = get_number(system, "j3", 0.0, "system");

  const json& train = require(j, "train", "config root");
  reject_unknown_keys(train,
                      {"epochs", "batch", "lr_euclidean", "lr_hyperbolic", "plateau_factor",
                       "plateau_patience", "early_stop_patience", "grad_clip_norm",
                       "variance_tolerance", "seed", "eval_samples"},
                      "train");
  cfg.train.epochs = get_int(train, "epochs", 0, "train");
  if (cfg.train.epochs < 1) throw ConfigError("train.epochs must be a positive integer");
  cfg.train.batch = get_int(train, "batch", 80, "train");
  if (cfg.train.batch < 1) throw ConfigError("train.batch must be >= 1");
  cfg.train.lr_euclidean = get_number(train, "lr_euclidean", 5e-3, "train");
  cfg.train.lr_hyperbolic = get_number(train, "lr_hyperbolic", 5e-3, "train");
  if (!(cfg.train.lr_euclidean > 0.0) || !(cfg.train.lr_hyperbolic > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  cfg.train.plateau_factor = get_number(train, "plateau_factor", 2.0, "train");
  if (!(cfg.train.plateau_factor > 1.0)) throw ConfigError("train.plateau_factor must exceed 1");
  cfg.train.plateau_patience = get_int(train, "plateau_patience", 40, "train");
  cfg.train.early_stop_patience = get_int(train, "early_stop_patience", 200, "train");
  if (cfg.train.plateau_patience < 1 || cfg.train.early_stop_patience < 1) {
    throw ConfigError("patience values must be positive");
  }
  cfg.train.grad_clip_norm = get_number(train, "grad_clip_norm", 1.0, "train");
  cfg.train.variance_tolerance = get_number(train, "variance_tolerance", 0.0, "train");
  if (train.contains("seed")) {
    if (!train.at("seed").is_number_unsigned() && !train.at("seed").is_number_integer()) {
      throw ConfigError("train.seed must be an integer");
    }
    cfg.train.seed = train.at("seed").get<std::uint64_t>();
  }
  cfg.train.eval_samples = get_int(train, "eval_samples", 10000, "train");
  if (cfg.train.eval_samples < 1) throw ConfigError("train.eval_samples must be >= 1");

  const json& output = require(j, "output", "config root");
  reject_unknown_keys(output, {"dir"}, "output");
  cfg.output_dir = require(output, "dir", "output").get<std::string>();
  if (cfg.output_dir.empty()) throw ConfigError("output.dir must not be empty");

  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = {
      {"variant", to_string(cfg.variant)},
      {"hidden", cfg.hidden},
      {"r_max", cfg.geo.r_max},
      {"l_max", cfg.geo.l_max},
      {"clamp_mode", clamp_mode_name(cfg.geo.clamp_mode)},
      {"phase_pi_scaling", cfg.phase_pi_scaling},
      {"marshall_sublattice", sublattice_name(cfg.marshall)},
  };
  j["system"] = {
      {"n", cfg.system.n}, {"j1", cfg.system.j1}, {"j2", cfg.system.j2}, {"j3", cfg.system.j3}};
  j["train"] = {
      {"epochs", cfg.train.epochs},
      {"batch", cfg.train.batch},
      {"lr_euclidean", cfg.train.lr_euclidean},
      {"lr_hyperbolic", cfg.train.lr_hyperbolic},
      {"plateau_factor", cfg.train.plateau_factor},
      {"plateau_patience", cfg.train.plateau_patience},
      {"early_stop_patience", cfg.train.early_stop_patience},
      {"grad_clip_norm", cfg.train.grad_clip_norm},
      {"variance_tolerance", cfg.train.variance_tolerance},
      {"seed", cfg.train.seed},
      {"eval_samples", cfg.train.eval_samples},
  };
  j["output"] = {{"dir", cfg.output_dir}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << config_to_json(cfg).dump(2) << "\n";
}

WavefunctionModel make_model(const ExperimentConfig& cfg) {
  return WavefunctionModel::make(cfg.variant, cfg.hidden, cfg.system.n, cfg.geo, cfg.marshall,
                                 cfg.phase_pi_scaling);
}

std::filesystem::path resolve_output_dir(const std::string& configured) {
  std::filesystem::path p(configured);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("HVMC_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / p;
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& dir, const WavefunctionModel& model,
                     const HeisenbergSpec& system, int epoch, double energy,
                     std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = "hvmc-checkpoint-v1";
  manifest["variant"] = to_string(model.variant());
  manifest["hidden"] = model.layout.hidden;
  manifest["input_dim"] = model.layout.input_dim;
  manifest["n"] = model.n_sites;
  manifest["curvature"] = model.geo.curvature;
  manifest["r_max"] = model.geo.r_max;
  manifest["l_max"] = model.geo.l_max;
  manifest["clamp_mode"] = clamp_mode_name(model.geo.clamp_mode);
  manifest["phase_pi_scaling"] = model.phase_pi_scaling;
  manifest["marshall_sublattice"] = sublattice_name(model.marshall);
  manifest["system"] = {
      {"n", system.n}, {"j1", system.j1}, {"j2", system.j2}, {"j3", system.j3}};
  manifest["epoch"] = epoch;
  manifest["energy"] = energy;
  manifest["seed"] = seed;
  manifest["workers"] = 1;  // sampling fan-out; results are fixed for a given count
  json segments = json::array();
  for (const ParamSegment& seg : model.layout.segments) {
    segments.push_back({{"name", seg.name},
                        {"rows", seg.rows},
                        {"cols", seg.cols},
                        {"file", seg.name + ".bin"}});
    write_doubles(dir / (seg.name + ".bin"), model.params.data() + seg.offset,
                  static_cast<std::size_t>(seg.size()));
  }
  manifest["segments"] = segments;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot open checkpoint manifest in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint manifest parse error: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "hvmc-checkpoint-v1") {
    throw std::runtime_error("unrecognized checkpoint format in " + dir.string());
  }
  GeoConfig geo;
  geo.curvature = manifest.at("curvature").get<double>();
  geo.r_max = manifest.at("r_max").get<double>();
  geo.l_max = manifest.at("l_max").get<double>();
  geo.clamp_mode = parse_clamp_mode(manifest.at("clamp_mode").get<std::string>());
  Checkpoint ck;
  ck.model = WavefunctionModel::make(
      parse_variant(manifest.at("variant").get<std::string>()), manifest.at("hidden").get<int>(),
      manifest.at("n").get<int>(), geo,
      parse_sublattice(manifest.at("marshall_sublattice").get<std::string>()),
      manifest.at("phase_pi_scaling").get<bool>());
  const json& sys = manifest.at("system");
  ck.system = HeisenbergSpec{sys.at("n").get<int>(), sys.at("j1").get<double>(),
                             sys.at("j2").get<double>(), sys.at("j3").get<double>()};
  ck.epoch = manifest.at("epoch").get<int>();
  ck.energy = manifest.at("energy").get<double>();
  ck.seed = manifest.at("seed").get<std::uint64_t>();

  Eigen::VectorXd params = Eigen::VectorXd::Zero(ck.model.layout.total);
  for (const json& seg_json : manifest.at("segments")) {
    const ParamSegment& seg = ck.model.layout.find(seg_json.at("name").get<std::string>());
    if (seg.rows != seg_json.at("rows").get<Eigen::Index>() ||
        seg.cols != seg_json.at("cols").get<Eigen::Index>()) {
      throw std::runtime_error("checkpoint segment shape mismatch for " + seg.name);
    }
    const auto data = read_doubles(dir / seg_json.at("file").get<std::string>(),
                                   static_cast<std::size_t>(seg.size()));
    for (Eigen::Index k = 0; k < seg.size(); ++k) params[seg.offset + k] = data[static_cast<std::size_t>(k)];
  }
  ck.model.set_params(std::move(params));
  return ck;
}

void append_metrics(const std::filesystem::path& file, const EpochRecord& rec) {
  json j{{"epoch", rec.epoch},
         {"energy", rec.energy},
         {"variance", rec.variance},
         {"std_error", rec.std_error},
         {"lr_euclidean", rec.lr_euclidean},
         {"lr_hyperbolic", rec.lr_hyperbolic},
         {"clamp_hits", rec.clamp_hits},
         {"max_hidden_norm", rec.max_hidden_norm},
         {"max_manifold_violation", rec.max_manifold_violation},
         {"improved", rec.improved},
         {"checkpointed", rec.checkpointed},
         {"skipped", rec.skipped}};
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + file.string());
  out << j.dump() << "\n";
}

std::vector<EpochRecord> read_metrics(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open metrics file " + file.string());
  std::vector<EpochRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    EpochRecord rec;
    rec.epoch = j.at("epoch").get<int>();
    rec.energy = j.at("energy").is_null() ? std::nan("") : j.at("energy").get<double>();
    rec.variance = j.at("variance").is_null() ? std::nan("") : j.at("variance").get<double>();
    rec.std_error = j.at("std_error").is_null() ? std::nan("") : j.at("std_error").get<double>();
    rec.lr_euclidean = j.at("lr_euclidean").get<double>();
    rec.lr_hyperbolic = j.at("lr_hyperbolic").get<double>();
    rec.clamp_hits = j.at("clamp_hits").get<long>();
    rec.max_hidden_norm = j.at("max_hidden_norm").get<double>();
    rec.max_manifold_violation = j.at("max_manifold_violation").get<double>();
    rec.improved = j.at("improved").get<bool>();
    rec.checkpointed = j.at("checkpointed").get<bool>();
    rec.skipped = j.at("skipped").get<bool>();
    out.push_back(rec);
  }
  return out;
}

void append_timing(const std::filesystem::path& file, int epoch, double seconds) {
  json j{{"epoch", epoch}, {"seconds", seconds}};
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + file.string());
  out << j.dump() << "\n";
}

void append_result(const std::filesystem::path& file, const EvalRecord& rec) {
  json arr = json::array();
  if (std::filesystem::exists(file)) {
    std::ifstream in(file);
    if (in) {
      try {
        in >> arr;
      } catch (const json::parse_error&) {
        throw std::runtime_error("existing result file is not valid JSON: " + file.string());
      }
      if (!arr.is_array()) throw std::runtime_error("result file must hold a JSON array");
    }
  }
  arr.push_back({{"mean", rec.mean},
                 {"std_error", rec.std_error},
                 {"samples", rec.samples},
                 {"seed", rec.seed}});
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << arr.dump(2) << "\n";
}

std::vector<EvalRecord> read_results(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open result file " + file.string());
  json arr;
  in >> arr;
  std::vector<EvalRecord> out;
  for (const json& j : arr) {
    out.push_back(EvalRecord{j.at("mean").get<double>(), j.at("std_error").get<double>(),
                             j.at("samples").get<int>(), j.at("seed").get<std::uint64_t>()});
  }
  return out;
}

}  // namespace hvmc
