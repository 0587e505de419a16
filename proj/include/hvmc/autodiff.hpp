#pragma once

// Reverse-mode automatic differentiation over scalar primitives.
//
// A Tape is an append-only record of primitive operations. Var is a scalar
// that records onto the thread-local active tape (installed with TapeScope).
// Vars built from plain doubles are constants until they meet a tracked
// operand, so templated numeric code can be instantiated with Var or double
// interchangeably.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hvmc::ad {

enum class Op : std::uint8_t {
  kConst,
  kInput,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kTanh,
  kAtanh,
  kSinh,
  kCosh,
  kAsinh,
  kAcosh,
  kExp,
  kLog,
  kSqrt,
  kSigmoid,
  kAbs,
  kMax,
  kMin,
};

struct Node {
  Op op;
  std::int32_t a;
  std::int32_t b;
  double val;
};

class Tape;

Tape* active_tape() noexcept;

class Var {
 public:
  Var() = default;
  Var(double v) : v_(v) {}  // NOLINT: implicit by design, constants stay off-tape
  Var(double v, std::int32_t idx) : v_(v), idx_(idx) {}

  double value() const noexcept { return v_; }
  std::int32_t index() const noexcept { return idx_; }
  bool tracked() const noexcept { return idx_ >= 0; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);
  Var operator-() const;

 private:
  double v_ = 0.0;
  std::int32_t idx_ = -1;
};

class Tape {
 public:
  Var input(double v) {
    const auto idx = emit(Op::kInput, -1, -1, v);
    inputs_.push_back(idx);
    return Var(v, idx);
  }

  std::int32_t emit(Op op, std::int32_t a, std::int32_t b, double val) {
    nodes_.push_back(Node{op, a, b, val});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  void clear() {
    nodes_.clear();
    inputs_.clear();
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t num_inputs() const noexcept { return inputs_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::int32_t>& inputs() const noexcept { return inputs_; }

  // Recomputes every node value from its parents. Input/const nodes keep
  // their recorded values, so the result must match nodes()[i].val
  // bit-for-bit.
  std::vector<double> replay() const;

  // Propagates the given output seeds backward through the tape and returns
  // the adjoint of every node.
  std::vector<double> backward(
      std::span<const std::pair<std::int32_t, double>> seeds) const;

  // Gathers the adjoints of the input nodes, in registration order.
  Eigen::VectorXd input_gradient(const std::vector<double>& adjoints) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::int32_t> inputs_;
};

namespace detail {

inline thread_local Tape* t_active_tape = nullptr;

inline Tape& require_tape() {
  Tape* t = t_active_tape;
  if (t == nullptr) {
    throw std::logic_error("ad: tracked Var used outside a TapeScope");
  }
  return *t;
}

inline std::int32_t materialize(Tape& t, const Var& x) {
  if (x.tracked()) return x.index();
  return t.emit(Op::kConst, -1, -1, x.value());
}

inline Var binary(Op op, const Var& a, const Var& b, double val) {
  if (!a.tracked() && !b.tracked()) return Var(val);
  Tape& t = require_tape();
  const auto ia = materialize(t, a);
  const auto ib = materialize(t, b);
  return Var(val, t.emit(op, ia, ib, val));
}

inline Var unary(Op op, const Var& a, double val) {
  if (!a.tracked()) return Var(val);
  Tape& t = require_tape();
  return Var(val, t.emit(op, a.index(), -1, val));
}

}  // namespace detail

inline Tape* active_tape() noexcept { return detail::t_active_tape; }

// RAII installer for the thread-local active tape.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : prev_(detail::t_active_tape) {
    detail::t_active_tape = &tape;
  }
  ~TapeScope() { detail::t_active_tape = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

inline Var operator+(const Var& a, const Var& b) {
  return detail::binary(Op::kAdd, a, b, a.value() + b.value());
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::binary(Op::kSub, a, b, a.value() - b.value());
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(Op::kMul, a, b, a.value() * b.value());
}
inline Var operator/(const Var& a, const Var& b) {
  return detail::binary(Op::kDiv, a, b, a.value() / b.value());
}

inline Var Var::operator-() const {
  return detail::unary(Op::kNeg, *this, -v_);
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }
inline bool operator==(const Var& a, const Var& b) { return a.value() == b.value(); }
inline bool operator!=(const Var& a, const Var& b) { return a.value() != b.value(); }

inline Var tanh(const Var& a) { return detail::unary(Op::kTanh, a, std::tanh(a.value())); }
inline Var atanh(const Var& a) { return detail::unary(Op::kAtanh, a, std::atanh(a.value())); }
inline Var sinh(const Var& a) { return detail::unary(Op::kSinh, a, std::sinh(a.value())); }
inline Var cosh(const Var& a) { return detail::unary(Op::kCosh, a, std::cosh(a.value())); }
inline Var asinh(const Var& a) { return detail::unary(Op::kAsinh, a, std::asinh(a.value())); }
inline Var acosh(const Var& a) { return detail::unary(Op::kAcosh, a, std::acosh(a.value())); }
inline Var exp(const Var& a) { return detail::unary(Op::kExp, a, std::exp(a.value())); }
inline Var log(const Var& a) { return detail::unary(Op::kLog, a, std::log(a.value())); }
inline Var sqrt(const Var& a) { return detail::unary(Op::kSqrt, a, std::sqrt(a.value())); }
inline Var abs(const Var& a) { return detail::unary(Op::kAbs, a, std::abs(a.value())); }

inline double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Var sigmoid(const Var& a) {
  return detail::unary(Op::kSigmoid, a, sigmoid_value(a.value()));
}
inline double sigmoid(double x) { return sigmoid_value(x); }

// max/min carry the usual subgradient: the branch holding the value gets
// derivative one, the other zero (ties go to the first operand).
inline Var max(const Var& a, const Var& b) {
  return detail::binary(Op::kMax, a, b, a.value() >= b.value() ? a.value() : b.value());
}
inline Var min(const Var& a, const Var& b) {
  return detail::binary(Op::kMin, a, b, a.value() <= b.value() ? a.value() : b.value());
}
inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }

inline std::vector<double> Tape::replay() const {
  std::vector<double> out(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const auto va = [&](std::int32_t k) { return out[static_cast<std::size_t>(k)]; };
    switch (n.op) {
      case Op::kConst:
      case Op::kInput: out[i] = n.val; break;
      case Op::kAdd: out[i] = va(n.a) + va(n.b); break;
      case Op::kSub: out[i] = va(n.a) - va(n.b); break;
      case Op::kMul: out[i] = va(n.a) * va(n.b); break;
      case Op::kDiv: out[i] = va(n.a) / va(n.b); break;
      case Op::kNeg: out[i] = -va(n.a); break;
      case Op::kTanh: out[i] = std::tanh(va(n.a)); break;
      case Op::kAtanh: out[i] = std::atanh(va(n.a)); break;
      case Op::kSinh: out[i] = std::sinh(va(n.a)); break;
      case Op::kCosh: out[i] = std::cosh(va(n.a)); break;
      case Op::kAsinh: out[i] = std::asinh(va(n.a)); break;
      case Op::kAcosh: out[i] = std::acosh(va(n.a)); break;
      case Op::kExp: out[i] = std::exp(va(n.a)); break;
      case Op::kLog: out[i] = std::log(va(n.a)); break;
      case Op::kSqrt: out[i] = std::sqrt(va(n.a)); break;
      case Op::kSigmoid: out[i] = sigmoid_value(va(n.a)); break;
      case Op::kAbs: out[i] = std::abs(va(n.a)); break;
      case Op::kMax: out[i] = va(n.a) >= va(n.b) ? va(n.a) : va(n.b); break;
      case Op::kMin: out[i] = va(n.a) <= va(n.b) ? va(n.a) : va(n.b); break;
    }
  }
  return out;
}

inline std::vector<double> Tape::backward(
    std::span<const std::pair<std::int32_t, double>> seeds) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  for (const auto& [idx, seed] : seeds) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= nodes_.size()) {
      throw std::out_of_range("ad: backward seed index not on tape");
    }
    adj[static_cast<std::size_t>(idx)] += seed;
  }
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    const double g = adj[k];
    if (g == 0.0) continue;
    const Node& n = nodes_[k];
    const auto va = [&](std::int32_t i) { return nodes_[static_cast<std::size_t>(i)].val; };
    auto& push = adj;
    switch (n.op) {
      case Op::kConst:
      case Op::kInput: break;
      case Op::kAdd:
        push[n.a] += g;
        push[n.b] += g;
        break;
      case Op::kSub:
        push[n.a] += g;
        push[n.b] -= g;
        break;
      case Op::kMul:
        push[n.a] += g * va(n.b);
        push[n.b] += g * va(n.a);
        break;
      case Op::kDiv:
        push[n.a] += g / va(n.b);
        push[n.b] -= g * n.val / va(n.b);
        break;
      case Op::kNeg: push[n.a] -= g; break;
      case Op::kTanh: push[n.a] += g * (1.0 - n.val * n.val); break;
      case Op::kAtanh: push[n.a] += g / (1.0 - va(n.a) * va(n.a)); break;
      case Op::kSinh: push[n.a] += g * std::cosh(va(n.a)); break;
      case Op::kCosh: push[n.a] += g * std::sinh(va(n.a)); break;
      case Op::kAsinh: push[n.a] += g / std::sqrt(1.0 + va(n.a) * va(n.a)); break;
      case Op::kAcosh: push[n.a] += g / std::sqrt(va(n.a) * va(n.a) - 1.0); break;
      case Op::kExp: push[n.a] += g * n.val; break;
      case Op::kLog: push[n.a] += g / va(n.a); break;
      case Op::kSqrt: push[n.a] += g * 0.5 / n.val; break;
      case Op::kSigmoid: push[n.a] += g * n.val * (1.0 - n.val); break;
      case Op::kAbs: push[n.a] += va(n.a) > 0.0 ? g : (va(n.a) < 0.0 ? -g : 0.0); break;
      case Op::kMax:
        if (va(n.a) >= va(n.b)) push[n.a] += g; else push[n.b] += g;
        break;
      case Op::kMin:
        if (va(n.a) <= va(n.b)) push[n.a] += g; else push[n.b] += g;
        break;
    }
  }
  return adj;
}

inline Eigen::VectorXd Tape::input_gradient(const std::vector<double>& adjoints) const {
  Eigen::VectorXd g(static_cast<Eigen::Index>(inputs_.size()));
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    g[static_cast<Eigen::Index>(i)] = adjoints[static_cast<std::size_t>(inputs_[i])];
  }
  return g;
}

// Gradient of a single recorded scalar with respect to every tape input.
inline Eigen::VectorXd grad_of(const Var& output, const Tape& tape) {
  if (!output.tracked()) {
    throw std::invalid_argument("ad: output does not depend on the tape");
  }
  const std::pair<std::int32_t, double> seed{output.index(), 1.0};
  return tape.input_gradient(tape.backward({&seed, 1}));
}

// Value extraction usable from code templated on double-or-Var.
inline double val(double x) noexcept { return x; }
inline double val(const Var& x) noexcept { return x.value(); }

inline double clamp_min(double x, double lo) { return x < lo ? lo : x; }
inline double clamp_max(double x, double hi) { return x > hi ? hi : x; }
inline Var clamp_min(const Var& x, double lo) { return max(x, Var(lo)); }
inline Var clamp_max(const Var& x, double hi) { return min(x, Var(hi)); }

}  // namespace hvmc::ad

namespace Eigen {

template <>
struct NumTraits<hvmc::ad::Var> : GenericNumTraits<hvmc::ad::Var> {
  using Real = hvmc::ad::Var;
  using NonInteger = hvmc::ad::Var;
  using Nested = hvmc::ad::Var;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3,
  };
  static inline Real epsilon() { return NumTraits<double>::epsilon(); }
  static inline Real dummy_precision() { return NumTraits<double>::dummy_precision(); }
  static inline Real highest() { return NumTraits<double>::highest(); }
  static inline Real lowest() { return NumTraits<double>::lowest(); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<hvmc::ad::Var, double, BinaryOp> {
  using ReturnType = hvmc::ad::Var;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, hvmc::ad::Var, BinaryOp> {
  using ReturnType = hvmc::ad::Var;
};

}  // namespace Eigen
