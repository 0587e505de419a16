#pragma once

// Spin-1/2 Heisenberg chain with first, second and third neighbor exchange
// and open boundaries. Conventions: sigma_i in {0,1}, s_i = 2 sigma_i - 1;
// S_i.S_j has diagonal s_i s_j / 4 and off-diagonal 1/2 on antiparallel
// pairs, with both spins flipped in the target configuration.

#include "hvmc/wavefunction.hpp"

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace hvmc {

struct HeisenbergSpec {
  int n = 2;
  double j1 = 1.0;
  double j2 = 0.0;
  double j3 = 0.0;
};

struct Connection {
  SpinConfig target;
  double element;
};

inline std::vector<std::pair<int, int>> neighbor_pairs(const HeisenbergSpec& spec, int d) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + d < spec.n; ++i) pairs.emplace_back(i, i + d);
  return pairs;
}

// All configurations connected to sigma with a nonzero matrix element,
// diagonal entry first.
inline std::vector<Connection> connections(const HeisenbergSpec& spec, const SpinConfig& sigma) {
  if (static_cast<int>(sigma.size()) != spec.n) {
    throw std::invalid_argument("connections: configuration length mismatch");
  }
  const double couplings[3] = {spec.j1, spec.j2, spec.j3};
  std::vector<Connection> out;
  double diag = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const double j = couplings[d - 1];
    if (j == 0.0) continue;
    for (int i = 0; i + d < spec.n; ++i) {
      const int si = sigma[static_cast<std::size_t>(i)] ? 1 : -1;
      const int sj = sigma[static_cast<std::size_t>(i + d)] ? 1 : -1;
      diag += j * 0.25 * si * sj;
      if (si != sj) {
        SpinConfig flipped = sigma;
        flipped[static_cast<std::size_t>(i)] ^= 1u;
        flipped[static_cast<std::size_t>(i + d)] ^= 1u;
        out.push_back(Connection{std::move(flipped), 0.5 * j});
      }
    }
  }
  out.insert(out.begin(), Connection{sigma, diag});
  return out;
}

// E_loc(sigma) = sum_sigma' <sigma|H|sigma'> psi(sigma')/psi(sigma), with the
// ratios computed as exp(dlog_amp + i dphase). Works against any model type
// providing evaluate(model, sigma) -> PsiValue.
template <class Model>
std::complex<double> local_energy(const HeisenbergSpec& spec, const Model& model,
                                  const SpinConfig& sigma, const PsiValue& base) {
  std::complex<double> e = 0.0;
  for (const Connection& conn : connections(spec, sigma)) {
    if (conn.target == sigma) {
      e += conn.element;
      continue;
    }
    const PsiValue other = evaluate(model, conn.target);
    e += conn.element * std::exp(std::complex<double>(other.log_amp - base.log_amp,
                                                      other.phase - base.phase));
  }
  return e;
}

template <class Model>
std::complex<double> local_energy(const HeisenbergSpec& spec, const Model& model,
                                  const SpinConfig& sigma) {
  return local_energy(spec, model, sigma, evaluate(model, sigma));
}

// The samples carry psi at their own configuration, so only the connected
// configurations need fresh evaluations.
template <class Model>
std::vector<std::complex<double>> local_energies(const HeisenbergSpec& spec, const Model& model,
                                                 const std::vector<Sample>& samples) {
  std::vector<std::complex<double>> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(local_energy(spec, model, s.config, s.psi));
  return out;
}

struct EnergyStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance of Re(E_loc)
  double std_error = 0.0;
};

inline EnergyStats energy_stats(const std::vector<std::complex<double>>& eloc) {
  if (eloc.empty()) throw std::invalid_argument("energy_stats: empty sample set");
  const auto count = static_cast<double>(eloc.size());
  EnergyStats st;
  for (const auto& e : eloc) st.mean += e.real();
  st.mean /= count;
  double ss = 0.0;
  for (const auto& e : eloc) {
    const double d = e.real() - st.mean;
    ss += d * d;
  }
  st.variance = eloc.size() > 1 ? ss / (count - 1.0) : 0.0;
  st.std_error = std::sqrt(st.variance / count);
  return st;
}

// Mean and standard error of Re(E_loc) over autoregressive samples; the
// P_loc weighting is implicit in how the samples were drawn.
template <class Model>
std::pair<double, double> energy_estimate(const HeisenbergSpec& spec, const Model& model,
                                          const std::vector<Sample>& samples) {
  const EnergyStats st = energy_stats(local_energies(spec, model, samples));
  return {st.mean, st.std_error};
}

}  // namespace hvmc
