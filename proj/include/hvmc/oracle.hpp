#pragma once

// Exact ground states for small chains: a dense eigensolve up to 12 sites and
// a restarted Lanczos on an implicit matvec up to 20. Stands in for the
// large-scale reference energies at test sizes, and provides the table-backed
// evaluator used by zero-variance checks.

#include "hvmc/hamiltonian.hpp"

#include <Eigen/Core>

#include <vector>

namespace hvmc {

inline constexpr int kDenseLimit = 12;
inline constexpr int kLanczosLimit = 20;

struct EDResult {
  double energy = 0.0;
  Eigen::VectorXd ground_vector;  // real gauge, unit norm, indexed by config_index
  HeisenbergSpec spec;
};

// Dense symmetric matrix assembled from connections(); guarded at 12 sites.
Eigen::MatrixXd dense_hamiltonian(const HeisenbergSpec& spec);

// y = H x over the full 2^n basis without materializing the matrix.
void apply_hamiltonian(const HeisenbergSpec& spec, const Eigen::VectorXd& x, Eigen::VectorXd& y);

EDResult ed_ground_dense(const HeisenbergSpec& spec);
EDResult ed_ground_lanczos(const HeisenbergSpec& spec);

// Dense path up to kDenseLimit, Lanczos beyond, resource guard past
// kLanczosLimit. Residual norm of the returned pair is below 1e-8.
EDResult ed_ground(const HeisenbergSpec& spec);

// Test fixture: evaluates the exact ground vector as amplitude/phase and
// samples from |v|^2, so estimators against it obey the zero-variance
// principle.
struct TableModel {
  int n_sites = 0;
  std::vector<double> log_amp;
  std::vector<double> phase;
  std::vector<double> cdf;
};

TableModel table_model(const EDResult& ed);
PsiValue evaluate(const TableModel& m, const SpinConfig& sigma);
std::vector<Sample> sample(const TableModel& m, int count, Rng& rng);

}  // namespace hvmc
