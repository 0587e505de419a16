#include "hvmc/train.hpp"

#include "hvmc/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace hvmc {

Eigen::VectorXd init_params(const ParamLayout& layout, Rng& rng) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(layout.total);
  for (const ParamSegment& seg : layout.segments) {
    if (seg.role != SegmentRole::weight) continue;  // biases start at the origin
    const double limit = std::sqrt(6.0 / static_cast<double>(seg.rows + seg.cols));
    for (Eigen::Index k = 0; k < seg.size(); ++k) {
      p[seg.offset + k] = rng.uniform(-limit, limit);
    }
  }
  return p;
}

Eigen::VectorXd gradient_estimate(const HeisenbergSpec& /*spec*/, const WavefunctionModel& model,
                                  const std::vector<Sample>& batch,
                                  const std::vector<std::complex<double>>& eloc) {
  if (batch.empty()) throw std::invalid_argument("gradient_estimate: empty batch");
  if (eloc.size() != batch.size()) {
    throw std::invalid_argument("gradient_estimate: local energy count mismatch");
  }
  std::complex<double> ebar = 0.0;
  for (const auto& e : eloc) ebar += e;
  ebar /= static_cast<double>(eloc.size());

  // The estimator is linear in the per-sample seeds, so large batches are
  // processed in chunks to bound tape memory. The workspace tape keeps its
  // capacity across epochs.
  thread_local ad::Tape tape;
  constexpr std::size_t kChunk = 256;
  const double inv = 2.0 / static_cast<double>(batch.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.layout.total);
  std::vector<std::pair<std::int32_t, double>> seeds;
  for (std::size_t begin = 0; begin < batch.size(); begin += kChunk) {
    const std::size_t end = std::min(batch.size(), begin + kChunk);
    tape.clear();
    ad::TapeScope scope(tape);
    const CellWeights<ad::Var> weights = trace_weights(model.layout, model.params, tape);
    seeds.clear();
    for (std::size_t k = begin; k < end; ++k) {
      const TracedPsi psi = rollout_traced(model, batch[k].config, weights);
      const std::complex<double> c = eloc[k] - ebar;
      // Re[conj(c) (g_amp + i g_phase)] = Re(c) g_amp + Im(c) g_phase
      if (c.real() != 0.0) seeds.emplace_back(psi.log_amp.index(), inv * c.real());
      if (c.imag() != 0.0) seeds.emplace_back(psi.phase.index(), inv * c.imag());
    }
    grad += tape.input_gradient(tape.backward(seeds));
  }
  return grad;
}

Eigen::VectorXd gradient_estimate(const HeisenbergSpec& spec, const WavefunctionModel& model,
                                  const std::vector<Sample>& batch) {
  return gradient_estimate(spec, model, batch, local_energies(spec, model, batch));
}

TrainResult train(const HeisenbergSpec& spec, WavefunctionModel& model, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  if (cfg.epochs < 1 || cfg.batch < 1) {
    throw std::invalid_argument("train: epochs and batch must be positive");
  }
  const double var_tol =
      cfg.variance_tolerance > 0.0 ? cfg.variance_tolerance : 2.0 * static_cast<double>(spec.n);

  Rng rng(cfg.seed);
  AdamConfig adam;
  OptimizerState opt = OptimizerState::make(model.layout, cfg.lr_euclidean, cfg.lr_hyperbolic);

  TrainResult result;
  result.best_energy = std::numeric_limits<double>::infinity();
  int plateau_count = 0;
  int stall_count = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;

    if (!model.params.allFinite()) {
      result.epochs_run = epoch - 1;
      result.last_params = model.params;
      throw NumericalError("train: non-finite parameters entering epoch " +
                           std::to_string(epoch));
    }

    RolloutStats stats;
    const std::vector<Sample> batch = sample(model, cfg.batch, rng, &stats);
    const auto eloc = local_energies(spec, model, batch);
    const EnergyStats st = energy_stats(eloc);

    rec.energy = st.mean;
    rec.variance = st.variance;
    rec.std_error = st.std_error;
    rec.lr_euclidean = opt.lr_euclidean;
    rec.lr_hyperbolic = opt.lr_hyperbolic;
    rec.clamp_hits = stats.clamp_hits;
    rec.max_hidden_norm = stats.max_state_norm;
    rec.max_manifold_violation = stats.max_manifold_violation;

    if (!std::isfinite(st.mean) || !std::isfinite(st.variance)) {
      rec.skipped = true;
      result.history.push_back(rec);
      if (hooks.on_epoch) hooks.on_epoch(rec);
      result.epochs_run = epoch;
      result.last_params = model.params;
      throw NumericalError("train: non-finite energy at epoch " + std::to_string(epoch));
    }

    rec.improved = st.mean < result.best_energy - cfg.improvement_tol;
    if (rec.improved) {
      result.best_energy = st.mean;
      result.best_epoch = epoch;
      plateau_count = 0;
      stall_count = 0;
      if (st.variance <= var_tol) {
        result.best_params = model.params;
        result.has_checkpoint = true;
        rec.checkpointed = true;
        if (hooks.on_checkpoint) hooks.on_checkpoint(model.params, epoch, st.mean);
      }
    } else {
      ++plateau_count;
      ++stall_count;
    }

    if (plateau_count >= cfg.plateau_patience) {
      opt.lr_euclidean /= cfg.plateau_factor;
      opt.lr_hyperbolic /= cfg.plateau_factor;
      plateau_count = 0;
    }

    const bool stop = stall_count >= cfg.early_stop_patience;
    if (!stop) {
      Eigen::VectorXd grads = gradient_estimate(spec, model, batch, eloc);
      if (grads.allFinite()) {
        clip_global_norm(grads, cfg.grad_clip_norm);
        Eigen::VectorXd params = model.params;
        optimizer_step(model.layout, adam, opt, params, grads, model.geo.curvature);
        model.set_params(std::move(params));
      } else {
        rec.skipped = true;
      }
    }

    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    result.epochs_run = epoch;
    if (stop) break;
  }

  result.last_params = model.params;
  if (!result.has_checkpoint) {
    result.best_params = model.params;
    result.best_epoch = result.epochs_run;
  }
  return result;
}

std::pair<double, double> infer(const HeisenbergSpec& spec, const WavefunctionModel& model,
                                int n_samples, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<Sample> samples = sample(model, n_samples, rng);
  return energy_estimate(spec, model, samples);
}

double enumerated_energy(const HeisenbergSpec& spec, const WavefunctionModel& model) {
  const std::vector<double> probs = enumerate_probabilities(model);
  double e = 0.0;
  for (std::uint32_t idx = 0; idx < probs.size(); ++idx) {
    if (probs[idx] <= 0.0) continue;
    const SpinConfig sigma = config_from_index(idx, model.n_sites);
    e += probs[idx] * local_energy(spec, model, sigma).real();
  }
  return e;
}

}  // namespace hvmc
