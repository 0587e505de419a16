#include "hvmc/oracle.hpp"

#include "hvmc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hvmc {

namespace {

void check_size(const HeisenbergSpec& spec, int limit, const char* what) {
  if (spec.n < 2) throw std::invalid_argument("heisenberg: need at least 2 sites");
  if (spec.n > limit) {
    throw ResourceLimitError(std::string(what) + ": system size exceeds the guard of " +
                             std::to_string(limit) + " sites");
  }
}

struct BondList {
  struct Bond {
    std::uint32_t mask_i, mask_j;
    double j;
  };
  std::vector<Bond> bonds;
};

BondList make_bonds(const HeisenbergSpec& spec) {
  BondList list;
  const double couplings[3] = {spec.j1, spec.j2, spec.j3};
  for (int d = 1; d <= 3; ++d) {
    const double j = couplings[d - 1];
    if (j == 0.0) continue;
    for (int i = 0; i + d < spec.n; ++i) {
      list.bonds.push_back({1u << i, 1u << (i + d), j});
    }
  }
  return list;
}

}  // namespace

Eigen::MatrixXd dense_hamiltonian(const HeisenbergSpec& spec) {
  check_size(spec, kDenseLimit, "dense_hamiltonian");
  const Eigen::Index dim = Eigen::Index(1) << spec.n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index row = 0; row < dim; ++row) {
    const SpinConfig sigma = config_from_index(static_cast<std::uint32_t>(row), spec.n);
    for (const Connection& conn : connections(spec, sigma)) {
      h(row, static_cast<Eigen::Index>(config_index(conn.target))) += conn.element;
    }
  }
  return h;
}

void apply_hamiltonian(const HeisenbergSpec& spec, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  check_size(spec, kLanczosLimit, "apply_hamiltonian");
  const auto dim = static_cast<std::uint32_t>(std::uint64_t(1) << spec.n);
  if (x.size() != static_cast<Eigen::Index>(dim)) {
    throw std::invalid_argument("apply_hamiltonian: vector size mismatch");
  }
  y.setZero(x.size());
  const BondList bonds = make_bonds(spec);
  for (std::uint32_t idx = 0; idx < dim; ++idx) {
    double diag = 0.0;
    double off = 0.0;
    for (const auto& b : bonds.bonds) {
      const bool up_i = idx & b.mask_i;
      const bool up_j = idx & b.mask_j;
      if (up_i == up_j) {
        diag += 0.25 * b.j;
      } else {
        diag -= 0.25 * b.j;
        off += 0.5 * b.j * x[static_cast<Eigen::Index>(idx ^ (b.mask_i | b.mask_j))];
      }
    }
    y[static_cast<Eigen::Index>(idx)] = diag * x[static_cast<Eigen::Index>(idx)] + off;
  }
}

EDResult ed_ground_dense(const HeisenbergSpec& spec) {
  const Eigen::MatrixXd h = dense_hamiltonian(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("ed_ground_dense: eigensolver failed");
  }
  EDResult out;
  out.spec = spec;
  out.energy = solver.eigenvalues()[0];
  out.ground_vector = solver.eigenvectors().col(0);
  out.ground_vector.normalize();
  return out;
}

EDResult ed_ground_lanczos(const HeisenbergSpec& spec) {
  check_size(spec, kLanczosLimit, "ed_ground_lanczos");
  const auto dim = static_cast<Eigen::Index>(std::uint64_t(1) << spec.n);
  const int m_max = static_cast<int>(std::min<Eigen::Index>(dim, 160));
  constexpr int kMaxCycles = 60;
  constexpr double kResidualTol = 1e-9;

  Rng rng(0x1a2b3c4dULL);  // fixed start vector for reproducibility
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();

  Eigen::VectorXd w(dim), hritz(dim);
  for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
    std::vector<Eigen::VectorXd> basis;
    basis.push_back(v);
    std::vector<double> alpha, beta;
    bool breakdown = false;
    for (int j = 0; j < m_max; ++j) {
      apply_hamiltonian(spec, basis.back(), w);
      alpha.push_back(basis.back().dot(w));
      w -= alpha.back() * basis.back();
      if (j > 0) w -= beta.back() * basis[static_cast<std::size_t>(j - 1)];
      // full reorthogonalization, two passes
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) w -= q.dot(w) * q;
      }
      const double b = w.norm();
      if (b < 1e-12) {
        breakdown = true;  // invariant subspace reached
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      t(j, j) = alpha[static_cast<std::size_t>(j)];
      if (j + 1 < m) {
        t(j, j + 1) = beta[static_cast<std::size_t>(j)];
        t(j + 1, j) = beta[static_cast<std::size_t>(j)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const double theta = small.eigenvalues()[0];
    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index j = 0; j < m; ++j) {
      ritz += small.eigenvectors()(j, 0) * basis[static_cast<std::size_t>(j)];
    }
    ritz.normalize();
    apply_hamiltonian(spec, ritz, hritz);
    const double residual = (hritz - theta * ritz).norm();
    if (residual < kResidualTol || breakdown) {
      EDResult out;
      out.spec = spec;
      out.energy = theta;
      out.ground_vector = std::move(ritz);
      return out;
    }
    v = std::move(ritz);
  }
  throw NumericalError("ed_ground_lanczos: no convergence within the iteration budget");
}

EDResult ed_ground(const HeisenbergSpec& spec) {
  check_size(spec, kLanczosLimit, "ed_ground");
  if (spec.n <= kDenseLimit) return ed_ground_dense(spec);
  return ed_ground_lanczos(spec);
}

TableModel table_model(const EDResult& ed) {
  TableModel m;
  m.n_sites = ed.spec.n;
  const auto dim = static_cast<std::size_t>(ed.ground_vector.size());
  m.log_amp.resize(dim);
  m.phase.resize(dim);
  m.cdf.resize(dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double v = ed.ground_vector[static_cast<Eigen::Index>(i)];
    m.log_amp[i] = std::log(std::abs(v));
    m.phase[i] = v < 0.0 ? std::numbers::pi : 0.0;
    acc += v * v;
    m.cdf[i] = acc;
  }
  m.cdf.back() = 1.0;
  return m;
}

PsiValue evaluate(const TableModel& m, const SpinConfig& sigma) {
  const std::uint32_t idx = config_index(sigma);
  return PsiValue{m.log_amp[idx], m.phase[idx]};
}

std::vector<Sample> sample(const TableModel& m, int count, Rng& rng) {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(m.cdf.begin(), m.cdf.end(), u);
    const auto idx = static_cast<std::uint32_t>(std::distance(m.cdf.begin(), it));
    SpinConfig sigma = config_from_index(idx, m.n_sites);
    const PsiValue psi = evaluate(m, sigma);
    out.push_back(Sample{std::move(sigma), psi});
  }
  return out;
}

}  // namespace hvmc
