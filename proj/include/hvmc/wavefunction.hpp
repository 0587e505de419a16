#pragma once

// Autoregressive complex wavefunction over spin configurations. One shared
// rollout drives sampling and evaluation, so the log-probability of a sampled
// configuration is bit-identical to a later evaluate() of the same bits.
//
// For a configuration sigma: log_amp = 1/2 sum_i log P(sigma_i | sigma_<i)
// from the softmax head, and the phase is the sum of the selected softsign
// head components plus pi per occupied site of the configured sublattice
// (the Marshall gauge).

#include "hvmc/cells.hpp"
#include "hvmc/errors.hpp"
#include "hvmc/rng.hpp"

#include <cstdint>
#include <numbers>
#include <vector>

namespace hvmc {

using SpinConfig = std::vector<std::uint8_t>;

enum class Sublattice { even, odd };

struct PsiValue {
  double log_amp = 0.0;
  double phase = 0.0;
};

inline int marshall_count(const SpinConfig& sigma, Sublattice sub) {
  int m = 0;
  const std::size_t start = sub == Sublattice::even ? 0 : 1;
  for (std::size_t k = start; k < sigma.size(); k += 2) m += sigma[k];
  return m;
}

inline std::uint32_t config_index(const SpinConfig& sigma) {
  std::uint32_t idx = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    idx |= static_cast<std::uint32_t>(sigma[i] & 1u) << i;
  }
  return idx;
}

inline SpinConfig config_from_index(std::uint32_t idx, int n) {
  SpinConfig sigma(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) sigma[static_cast<std::size_t>(i)] = (idx >> i) & 1u;
  return sigma;
}

struct WavefunctionModel {
  ParamLayout layout;
  int n_sites = 0;
  GeoConfig geo;
  bool phase_pi_scaling = false;
  Sublattice marshall = Sublattice::even;
  Eigen::VectorXd params;
  CellWeights<double> weights;  // rebuilt by set_params

  static WavefunctionModel make(CellVariant variant, int hidden, int n_sites,
                                GeoConfig geo = {}, Sublattice marshall = Sublattice::even,
                                bool phase_pi_scaling = false) {
    WavefunctionModel m;
    m.layout = make_layout(variant, hidden);
    m.n_sites = n_sites;
    m.geo = geo;
    m.marshall = marshall;
    m.phase_pi_scaling = phase_pi_scaling;
    m.set_params(Eigen::VectorXd::Zero(m.layout.total));
    return m;
  }

  void set_params(Eigen::VectorXd p) {
    params = std::move(p);
    weights = map_weights(layout, params);
  }

  CellVariant variant() const { return layout.variant; }
};

template <class S>
Eigen::VectorXd values_of(const VecX<S>& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = val(v[i]);
  return out;
}

template <class S>
struct RolloutResult {
  SpinConfig config;
  S log_amp;
  S phase;
};

// Runs the recurrence over all sites. With `given` null, spins are drawn from
// the conditionals (exact, independent sampling); otherwise the given bits
// select the factors and the result is the model value at that configuration.
template <class S>
RolloutResult<S> rollout(const ParamLayout& layout, const CellWeights<S>& w,
                         const GeoConfig& geo, int n_sites, bool pi_scaling,
                         Sublattice marshall, const SpinConfig* given, Rng* rng,
                         RolloutStats* stats = nullptr) {
  using std::log;
  if (given != nullptr && static_cast<int>(given->size()) != n_sites) {
    throw std::invalid_argument("rollout: configuration length does not match system size");
  }
  const CellVariant variant = layout.variant;
  VecX<S> h = initial_hidden<S>(variant, layout.hidden);
  VecX<S> x = VecX<S>::Zero(layout.input_dim);  // dummy start token, not a one-hot
  RolloutResult<S> out;
  out.config.reserve(static_cast<std::size_t>(n_sites));
  out.log_amp = S(0.0);
  out.phase = S(0.0);
  for (int i = 0; i < n_sites; ++i) {
    h = step_cell<S>(variant, w, h, x, geo, stats);
    if (stats != nullptr) observe_state(variant, values_of(h), *stats);
    const VecX<S> t = head_input<S>(variant, h, geo.curvature);
    const VecX<S> p = head_softmax<S>(w.amp_w, w.amp_b, t);
    const VecX<S> f = head_softsign<S>(w.phase_w, w.phase_b, t);
    int s;
    if (given != nullptr) {
      s = (*given)[static_cast<std::size_t>(i)] ? 1 : 0;
    } else if (rng != nullptr) {
      s = rng->uniform() < val(p[1]) ? 1 : 0;
    } else {
      throw std::invalid_argument("rollout: need either a configuration or an rng");
    }
    out.log_amp += 0.5 * log(p[s]);
    out.phase += f[s];
    out.config.push_back(static_cast<std::uint8_t>(s));
    x = VecX<S>::Zero(layout.input_dim);
    x[s] = S(1.0);
  }
  if (pi_scaling) out.phase = std::numbers::pi * out.phase;
  out.phase += std::numbers::pi * marshall_count(out.config, marshall);
  return out;
}

inline PsiValue evaluate(const WavefunctionModel& m, const SpinConfig& sigma) {
  const auto r = rollout<double>(m.layout, m.weights, m.geo, m.n_sites, m.phase_pi_scaling,
                                 m.marshall, &sigma, nullptr);
  return PsiValue{r.log_amp, r.phase};
}

struct Sample {
  SpinConfig config;
  PsiValue psi;
};

inline std::vector<Sample> sample(const WavefunctionModel& m, int count, Rng& rng,
                                  RolloutStats* stats = nullptr) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    auto r = rollout<double>(m.layout, m.weights, m.geo, m.n_sites, m.phase_pi_scaling,
                             m.marshall, nullptr, &rng, stats);
    out.push_back(Sample{std::move(r.config), PsiValue{r.log_amp, r.phase}});
  }
  return out;
}

struct TracedPsi {
  ad::Var log_amp;
  ad::Var phase;
};

// Tape-recorded evaluation against pre-traced weights; the caller owns the
// TapeScope so several configurations can share one tape and one weight
// registration.
inline TracedPsi rollout_traced(const WavefunctionModel& m, const SpinConfig& sigma,
                                const CellWeights<ad::Var>& w) {
  const auto r = rollout<ad::Var>(m.layout, w, m.geo, m.n_sites, m.phase_pi_scaling,
                                  m.marshall, &sigma, nullptr);
  return TracedPsi{r.log_amp, r.phase};
}

inline TracedPsi evaluate_traced(const WavefunctionModel& m, const SpinConfig& sigma,
                                 ad::Tape& tape) {
  ad::TapeScope scope(tape);
  const auto w = trace_weights(m.layout, m.params, tape);
  return rollout_traced(m, sigma, w);
}

inline constexpr int kEnumerationLimit = 20;

// |psi(sigma)|^2 for every configuration, indexed by config_index. The
// autoregressive construction normalizes by design; summing this table
// verifies the implementation.
inline std::vector<double> enumerate_probabilities(const WavefunctionModel& m) {
  if (m.n_sites > kEnumerationLimit) {
    throw ResourceLimitError("enumerate: system size exceeds the 2^20 guard");
  }
  const std::uint32_t dim = 1u << m.n_sites;
  std::vector<double> probs(dim);
  for (std::uint32_t idx = 0; idx < dim; ++idx) {
    const SpinConfig sigma = config_from_index(idx, m.n_sites);
    probs[idx] = std::exp(2.0 * evaluate(m, sigma).log_amp);
  }
  return probs;
}

}  // namespace hvmc
