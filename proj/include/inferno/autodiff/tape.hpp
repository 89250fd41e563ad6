#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace inferno::autodiff {

enum class OpKind : std::uint8_t {
  leaf,
  add,
  sub,
  mul,
  div,
  neg,
  exp_op,
  log_op,
  relu,
  sum,
};

inline const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::leaf: return "leaf";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::neg: return "neg";
    case OpKind::exp_op: return "exp";
    case OpKind::log_op: return "log";
    case OpKind::relu: return "relu";
    case OpKind::sum: return "sum";
  }
  return "?";
}

/// Reverse-mode tape over double scalars.  One tape per graph; construction and
/// the backward sweep are single-threaded, independent tapes may run on
/// separate threads concurrently.  Forward order is the topological order.
class Tape {
 public:
  int new_leaf(double v) { return push(OpKind::leaf, v, {}, {}); }

  int push(OpKind kind, double v, std::span<const int> inputs, std::span<const double> partials) {
    assert(inputs.size() == partials.size());
    Node n;
    n.kind = kind;
    n.n_in = static_cast<std::uint32_t>(inputs.size());
    n.edge_off = edges_in_.size();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      edges_in_.push_back(static_cast<std::uint32_t>(inputs[i]));
      edges_p_.push_back(partials[i]);
    }
    nodes_.push_back(n);
    values_.push_back(v);
    return static_cast<int>(nodes_.size()) - 1;
  }

  double value(int i) const { return values_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }

  /// Backward accumulation from a scalar output node.  Throws on NaN, naming
  /// the node kind where it was produced.
  void backward(int output) {
    adjoints_.assign(nodes_.size(), 0.0);
    adjoints_[static_cast<std::size_t>(output)] = 1.0;
    for (int i = output; i >= 0; --i) {
      const double a = adjoints_[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (std::isnan(a))
        throw std::runtime_error(std::string("numerical failure: NaN adjoint at node kind ") +
                                 op_name(n.kind));
      for (std::uint32_t e = 0; e < n.n_in; ++e) {
        adjoints_[edges_in_[n.edge_off + e]] += a * edges_p_[n.edge_off + e];
      }
    }
  }

  double adjoint(int i) const { return adjoints_[static_cast<std::size_t>(i)]; }

  void clear() {
    nodes_.clear();
    values_.clear();
    adjoints_.clear();
    edges_in_.clear();
    edges_p_.clear();
  }

  void reserve(std::size_t nodes, std::size_t edges) {
    nodes_.reserve(nodes);
    values_.reserve(nodes);
    edges_in_.reserve(edges);
    edges_p_.reserve(edges);
  }

 private:
  struct Node {
    OpKind kind;
    std::uint32_t n_in;
    std::size_t edge_off;
  };

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> adjoints_;
  std::vector<std::uint32_t> edges_in_;
  std::vector<double> edges_p_;
};

/// Tape-backed scalar.  A default-constructed Var (or one built from a plain
/// double) is a constant; arithmetic between constants stays off-tape.
struct Var {
  Tape* tape = nullptr;
  int idx = -1;
  double v = 0.0;

  Var() = default;
  Var(double c) : v(c) {}  // NOLINT: implicit constant lift is intended
  Var(Tape* t, int i, double value) : tape(t), idx(i), v(value) {}

  bool on_tape() const { return tape != nullptr; }
};

inline Var make_leaf(Tape& t, double v) { return Var(&t, t.new_leaf(v), v); }

inline Tape* tape_of(const Var& a, const Var& b) {
  if (a.tape && b.tape) {
    assert(a.tape == b.tape);
    return a.tape;
  }
  return a.tape ? a.tape : b.tape;
}

inline Var binary(OpKind kind, double v, const Var& a, double pa, const Var& b, double pb) {
  Tape* t = tape_of(a, b);
  if (!t) return Var(v);
  int in[2];
  double p[2];
  int n = 0;
  if (a.on_tape()) { in[n] = a.idx; p[n] = pa; ++n; }
  if (b.on_tape()) { in[n] = b.idx; p[n] = pb; ++n; }
  return Var(t, t->push(kind, v, std::span<const int>(in, n), std::span<const double>(p, n)), v);
}

inline Var unary(OpKind kind, double v, const Var& a, double pa) {
  if (!a.on_tape()) return Var(v);
  const int in[1] = {a.idx};
  const double p[1] = {pa};
  return Var(a.tape, a.tape->push(kind, v, in, p), v);
}

inline Var operator+(const Var& a, const Var& b) { return binary(OpKind::add, a.v + b.v, a, 1.0, b, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return binary(OpKind::sub, a.v - b.v, a, 1.0, b, -1.0); }
inline Var operator*(const Var& a, const Var& b) { return binary(OpKind::mul, a.v * b.v, a, b.v, b, a.v); }
inline Var operator/(const Var& a, const Var& b) {
  const double v = a.v / b.v;
  return binary(OpKind::div, v, a, 1.0 / b.v, b, -v / b.v);
}
inline Var operator-(const Var& a) { return unary(OpKind::neg, -a.v, a, -1.0); }
inline Var& operator+=(Var& a, const Var& b) { a = a + b; return a; }
inline Var& operator-=(Var& a, const Var& b) { a = a - b; return a; }
inline Var& operator*=(Var& a, const Var& b) { a = a * b; return a; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.v);
  return unary(OpKind::exp_op, e, a, e);
}
inline Var log(const Var& a) { return unary(OpKind::log_op, std::log(a.v), a, 1.0 / a.v); }

/// max(x, 0) with derivative 0 at exactly 0
inline Var relu(const Var& a) {
  const bool on = a.v > 0.0;
  return unary(OpKind::relu, on ? a.v : 0.0, a, on ? 1.0 : 0.0);
}

inline Var sum(std::span<const Var> xs) {
  Tape* t = nullptr;
  double v = 0.0;
  for (const Var& x : xs) {
    v += x.v;
    if (x.tape) t = x.tape;
  }
  if (!t) return Var(v);
  std::vector<int> in;
  std::vector<double> p;
  in.reserve(xs.size());
  for (const Var& x : xs)
    if (x.on_tape()) {
      in.push_back(x.idx);
      p.push_back(1.0);
    }
  return Var(t, t->push(OpKind::sum, v, in, p), v);
}

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

/// d(output)/d(leaf) for every leaf; output is scalar by construction.
inline std::vector<double> gradient(const Var& output, std::span<const Var> leaves) {
  if (!output.on_tape()) return std::vector<double>(leaves.size(), 0.0);
  output.tape->backward(output.idx);
  std::vector<double> g(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i)
    g[i] = leaves[i].on_tape() ? output.tape->adjoint(leaves[i].idx) : 0.0;
  return g;
}

}  // namespace inferno::autodiff
