// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include "hvmc/io.hpp"
#include "hvmc/lorentz.hpp"
#include "hvmc/oracle.hpp"
#include "hvmc/poincare.hpp"
#include "hvmc/svg.hpp"
#include "hvmc/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hvmc;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

VectorXd ball_point(Rng& rng, int dim, double max_radius) {
  VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-1.0, 1.0);
  const double r = rng.uniform(0.0, max_radius);
  return v.norm() > 0 ? VectorXd(v * (r / v.norm())) : v;
}

VectorXd hyperboloid_point(Rng& rng, int spatial_dim, double max_norm) {
  VectorXd v(spatial_dim);
  for (int i = 0; i < spatial_dim; ++i) v[i] = rng.uniform(-1.0, 1.0);
  if (v.norm() > 0) v *= rng.uniform(0.0, max_norm) / v.norm();
  return lorentz::exp0_spatial<double>(v);
}

VectorXd tangent_at(Rng& rng, const VectorXd& x, double max_norm) {
  VectorXd w(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) w[i] = rng.uniform(-1.0, 1.0);
  VectorXd v = w + lorentz::inner<double>(w, x) * x;
  const double n = lorentz::norm<double>(v);
  if (n > 1e-12) v *= rng.uniform(0.0, max_norm) / n;
  return v;
}

WavefunctionModel seeded_model(CellVariant variant, int hidden, int n, std::uint64_t seed,
                               GeoConfig geo = {}) {
  WavefunctionModel m = WavefunctionModel::make(variant, hidden, n, geo);
  Rng rng(seed);
  m.set_params(init_params(m.layout, rng));
  return m;
}

const std::vector<CellVariant> kAllVariants = {
    CellVariant::euclidean_rnn, CellVariant::poincare_rnn, CellVariant::lorentz_rnn,
    CellVariant::euclidean_gru, CellVariant::poincare_gru, CellVariant::lorentz_gru};

// ---- criterion 1 ----

void criterion_parameter_counts() {
  bool pass = true;
  std::ostringstream detail;
  for (CellVariant v : {CellVariant::euclidean_rnn, CellVariant::poincare_rnn,
                        CellVariant::lorentz_rnn}) {
    pass = pass && param_count(v, 70) == 5394 && param_count(v, 80) == 6964;
  }
  for (CellVariant v : {CellVariant::euclidean_gru, CellVariant::poincare_gru,
                        CellVariant::lorentz_gru}) {
    pass = pass && param_count(v, 70) == 15614;
  }
  detail << "rnn70=" << param_count(CellVariant::euclidean_rnn, 70)
         << " gru70=" << param_count(CellVariant::euclidean_gru, 70)
         << " rnn80=" << param_count(CellVariant::euclidean_rnn, 80);
  report(1, pass, "parameter counts 5394 / 15614 / 6964", detail.str());
}

// ---- criterion 2 ----

void criterion_geometry_properties() {
  constexpr int kCases = 10000;
  const double tol = 1e-9;
  Rng rng(0xfeedULL);
  double worst = 0.0;
  auto track = [&](double err) { worst = std::max(worst, err); };
  bool pass = true;

  for (int k = 0; k < kCases; ++k) {
    // exp/log roundtrips at the origin and at a generic base, both models
    VectorXd v = ball_point(rng, 3, 1.0);
    if (v.norm() > 0) v *= rng.uniform(0.0, 3.0) / v.norm();
    track((poincare::log0<double>(poincare::exp0<double>(v, 1.0), 1.0) - v).norm());

    const VectorXd base = ball_point(rng, 3, 0.8);
    const VectorXd target = ball_point(rng, 3, 0.8);
    track((poincare::exp_at<double>(base, poincare::log_at<double>(base, target, 1.0), 1.0) -
           target)
              .norm());

    const VectorXd lx = hyperboloid_point(rng, 3, 2.0);
    const VectorXd lv = tangent_at(rng, lx, 3.0);
    track((lorentz::log_at<double>(lx, lorentz::exp_at<double>(lx, lv)) - lv).norm());

    // Mobius left-cancellation
    const VectorXd x = ball_point(rng, 3, 0.9);
    const VectorXd y = ball_point(rng, 3, 0.9);
    const VectorXd sum = poincare::mobius_add<double>(x, y, 1.0);
    track((poincare::mobius_add<double>(VectorXd(-x), sum, 1.0) - y).norm());
    if (sum.norm() >= 1.0) pass = false;  // ball membership preserved

    // transport identity: x (+) b = exp_x(P(log_0 b))
    const VectorXd via = poincare::exp_at<double>(
        x, poincare::transport_from_origin<double>(poincare::log0<double>(y, 1.0), x, 1.0), 1.0);
    track((sum - via).norm());

    // Lorentz transport is an isometry on tangent pairs
    const VectorXd ly = hyperboloid_point(rng, 3, 2.0);
    const VectorXd z1 = tangent_at(rng, lx, 2.0);
    const VectorXd z2 = tangent_at(rng, lx, 2.0);
    const VectorXd t1 = lorentz::transport<double>(lx, ly, z1);
    const VectorXd t2 = lorentz::transport<double>(lx, ly, z2);
    track(std::abs(lorentz::inner<double>(t1, t2) - lorentz::inner<double>(z1, z2)));

    // hyperboloid membership preserved by composite addition
    const VectorXd lsum = lorentz::add<double>(lx, ly);
    track(std::abs(lorentz::inner<double>(lsum, lsum) + 1.0));
    if (lsum[0] <= 0.0) pass = false;
  }
  pass = pass && worst < tol;
  std::ostringstream detail;
  detail << "10^4 cases/property, worst error " << worst;
  report(2, pass, "geometry property suite within 1e-9", detail.str());
}

// ---- criterion 3 ----

void criterion_gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool pass = true;
  const SpinConfig sigma{1, 0, 0, 1};
  for (CellVariant v : kAllVariants) {
    for (int hidden : {4, 8}) {
      GeoConfig geo;
      geo.r_max = 0.9;
      geo.l_max = 3.0;
      geo.clamp_mode = ClampMode::double_clamp;
      const WavefunctionModel m = seeded_model(v, hidden, 4, 1234, geo);

      ad::Tape tape;
      const TracedPsi psi = evaluate_traced(m, sigma, tape);
      const std::pair<std::int32_t, double> seeds[] = {{psi.log_amp.index(), 1.0},
                                                       {psi.phase.index(), 0.7}};
      const VectorXd g_ad = tape.input_gradient(tape.backward(seeds));

      const double step = 1e-5;
      WavefunctionModel probe = m;
      for (Eigen::Index k = 0; k < m.layout.total; ++k) {
        VectorXd p = m.params;
        p[k] += step;
        probe.set_params(p);
        const PsiValue hi = evaluate(probe, sigma);
        p[k] -= 2.0 * step;
        probe.set_params(p);
        const PsiValue lo = evaluate(probe, sigma);
        const double fd =
            (hi.log_amp - lo.log_amp + 0.7 * (hi.phase - lo.phase)) / (2.0 * step);
        const double scale = std::max({std::abs(g_ad[k]), std::abs(fd), 1e-6});
        const double rel = std::abs(g_ad[k] - fd) / scale;
        worst = std::max(worst, rel);
        if (rel > 1e-4) pass = false;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass = pass && secs < 60.0;
  std::ostringstream detail;
  detail << "six variants, h in {4,8}, worst rel err " << worst << ", " << secs << "s";
  report(3, pass, "reverse-mode gradients vs finite differences <= 1e-4", detail.str());
}

// ---- criterion 4 ----

void criterion_normalization() {
  bool pass = true;
  double worst = 0.0;
  for (CellVariant v : kAllVariants) {
    GeoConfig geo;
    geo.r_max = 0.8;
    geo.l_max = 4.0;
    const WavefunctionModel m = seeded_model(v, 6, 8, 31415, geo);
    const auto probs = enumerate_probabilities(m);
    double total = 0.0;
    for (double p : probs) total += p;
    worst = std::max(worst, std::abs(total - 1.0));
    if (std::abs(total - 1.0) > 1e-8) pass = false;
  }
  std::ostringstream detail;
  detail << "N=8, six variants, worst |sum-1| = " << worst;
  report(4, pass, "enumerated |psi|^2 sums to 1 +- 1e-8", detail.str());
}

// ---- criterion 5 ----

void criterion_zero_variance() {
  bool pass = true;
  std::ostringstream detail;
  for (double j2 : {0.0, 0.5}) {
    const HeisenbergSpec spec{8, 1.0, j2, 0.0};
    const EDResult ed = ed_ground_dense(spec);
    const TableModel table = table_model(ed);
    Rng rng(55);
    const auto samples = sample(table, 400, rng);
    const auto eloc = local_energies(spec, table, samples);
    const EnergyStats st = energy_stats(eloc);
    pass = pass && st.variance < 1e-10 && std::abs(st.mean - ed.energy) < 1e-9;
    detail << "J2=" << j2 << ": var=" << st.variance << " |mean-E0|="
           << std::abs(st.mean - ed.energy) << "  ";
  }
  report(5, pass, "zero-variance table model at N=8", detail.str());
}

// ---- criterion 6 ----

void criterion_majumdar_ghosh() {
  const EDResult ed = ed_ground(HeisenbergSpec{10, 1.0, 0.5, 0.0});
  const bool pass = std::abs(ed.energy - (-3.75)) < 1e-9;
  std::ostringstream detail;
  detail << "E0(N=10, J2=0.5) = " << ed.energy;
  report(6, pass, "Majumdar-Ghosh anchor -3.75 +- 1e-9", detail.str());
}

// ---- criteria 7-10 share trained runs ----

struct RunArtifacts {
  TrainResult result;
  double inference = 0.0;
  double std_error = 0.0;
  double seconds = 0.0;
};

RunArtifacts run_experiment(CellVariant variant, int hidden, double j2, GeoConfig geo,
                            int epochs, std::uint64_t seed) {
  const HeisenbergSpec spec{10, 1.0, j2, 0.0};
  WavefunctionModel model = WavefunctionModel::make(variant, hidden, spec.n, geo);
  Rng rng(init_seed(seed));
  model.set_params(init_params(model.layout, rng));
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  RunArtifacts out;
  out.result = train(spec, model, cfg);
  WavefunctionModel best = model;
  best.set_params(out.result.best_params);
  const auto [mean, se] = infer(spec, best, cfg.eval_samples, eval_seed(seed));
  out.inference = mean;
  out.std_error = se;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void criterion_desk_scale_training() {
  bool pass = true;
  std::ostringstream detail;
  const struct {
    double j2;
    double tol;
  } cases[] = {{0.0, 0.02}, {0.5, 0.03}};
  for (const auto& c : cases) {
    const double e0 = ed_ground(HeisenbergSpec{10, 1.0, c.j2, 0.0}).energy;
    const RunArtifacts run =
        run_experiment(CellVariant::euclidean_gru, 16, c.j2, GeoConfig{}, 2000, 7);
    const double rel = std::abs(run.inference - e0) / std::abs(e0);
    const bool ok = rel <= c.tol && run.result.epochs_run <= 2000 && run.seconds <= 900.0;
    pass = pass && ok;
    detail << "J2=" << c.j2 << ": E=" << run.inference << " vs " << e0 << " rel=" << rel
           << " epochs=" << run.result.epochs_run << " t=" << static_cast<int>(run.seconds)
           << "s  ";
  }
  report(7, pass, "euclidean GRU h=16 reaches ED within 2% / 3%", detail.str());
}

void criterion_hyperbolic_stability() {
  bool pass = true;
  std::ostringstream detail;
  const double e0 = ed_ground(HeisenbergSpec{10, 1.0, 0.0, 0.0}).energy;

  struct Case {
    CellVariant variant;
    GeoConfig geo;
    const char* name;
  };
  GeoConfig pgeo;
  pgeo.r_max = 0.618;
  GeoConfig lgeo;
  lgeo.l_max = 2.0;
  lgeo.clamp_mode = ClampMode::double_clamp;
  const Case cases[] = {{CellVariant::poincare_rnn, pgeo, "poincare_rnn(r=0.618)"},
                        {CellVariant::lorentz_rnn, lgeo, "lorentz_rnn(l=2,double)"}};
  for (const Case& c : cases) {
    const RunArtifacts run = run_experiment(c.variant, 16, 0.0, c.geo, 2000, 7);
    bool finite = true, invariants = true;
    for (const auto& rec : run.result.history) {
      finite = finite && std::isfinite(rec.energy) && std::isfinite(rec.variance) &&
               !rec.skipped;
      invariants = invariants && rec.max_manifold_violation < 1e-8;
    }
    const double rel = std::abs(run.inference - e0) / std::abs(e0);
    const bool ok = finite && invariants && rel <= 0.05;
    pass = pass && ok;
    detail << c.name << ": rel=" << rel << " finite=" << finite
           << " invariants=" << invariants << "  ";
  }
  report(8, pass, "hyperbolic RNNs stable and within 5% of ED", detail.str());
}

void criterion_clamp_effect() {
  auto run_with_rmax = [&](double r_max) {
    GeoConfig geo;
    geo.r_max = r_max;
    const HeisenbergSpec spec{10, 1.0, 0.0, 0.0};
    WavefunctionModel model = WavefunctionModel::make(CellVariant::poincare_rnn, 16, spec.n, geo);
    Rng rng(init_seed(7));
    model.set_params(init_params(model.layout, rng));
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 7;
    return train(spec, model, cfg);
  };
  const TrainResult wide = run_with_rmax(0.99);
  const TrainResult tight = run_with_rmax(0.618);
  long wide_hits = 0;
  double wide_max = 0.0, tight_max = 0.0;
  for (const auto& rec : wide.history) {
    wide_hits += rec.clamp_hits;
    wide_max = std::max(wide_max, rec.max_hidden_norm);
  }
  for (const auto& rec : tight.history) tight_max = std::max(tight_max, rec.max_hidden_norm);
  const bool pass = wide_hits > 0 && wide_max >= 0.99 - 1e-9 && tight_max <= 0.618 + 1e-12;
  std::ostringstream detail;
  detail << "r=0.99: hits=" << wide_hits << " max_norm=" << wide_max
         << "; r=0.618: max_norm=" << tight_max;
  report(9, pass, "radial constraint mechanism engages as configured", detail.str());
}

void criterion_determinism() {
  auto run_to_dir = [](const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const HeisenbergSpec spec{10, 1.0, 0.0, 0.0};
    WavefunctionModel model = WavefunctionModel::make(CellVariant::euclidean_gru, 8, spec.n);
    Rng rng(init_seed(11));
    model.set_params(init_params(model.layout, rng));
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 11;
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochRecord& rec) { append_metrics(dir / "metrics.jsonl", rec); };
    hooks.on_checkpoint = [&](const VectorXd& params, int epoch, double energy) {
      WavefunctionModel snap = model;
      snap.set_params(params);
      save_checkpoint(dir / "checkpoint_best", snap, spec, epoch, energy, cfg.seed);
    };
    TrainResult result = train(spec, model, cfg, hooks);
    save_checkpoint(dir / "checkpoint_last", model, spec, result.epochs_run,
                    result.history.back().energy, cfg.seed);
  };
  const fs::path a = fs::temp_directory_path() / "hvmc_acceptance_det_a";
  const fs::path b = fs::temp_directory_path() / "hvmc_acceptance_det_b";
  run_to_dir(a);
  run_to_dir(b);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool pass = slurp(a / "metrics.jsonl") == slurp(b / "metrics.jsonl");
  int files = 0;
  for (const char* ck : {"checkpoint_best", "checkpoint_last"}) {
    for (const auto& entry : fs::directory_iterator(a / ck)) {
      const fs::path rel = entry.path().filename();
      pass = pass && slurp(entry.path()) == slurp(b / ck / rel);
      ++files;
    }
  }
  std::ostringstream detail;
  detail << "metrics + " << files << " checkpoint files byte-compared";
  report(10, pass, "identical seed reproduces metrics and checkpoints bitwise", detail.str());
  std::error_code ec;
  fs::remove_all(a, ec);
  fs::remove_all(b, ec);
}

}  // namespace

int main() {
  criterion_parameter_counts();
  criterion_geometry_properties();
  criterion_gradient_correctness();
  criterion_normalization();
  criterion_zero_variance();
  criterion_majumdar_ghosh();
  criterion_desk_scale_training();
  criterion_hyperbolic_stability();
  criterion_clamp_effect();
  criterion_determinism();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
