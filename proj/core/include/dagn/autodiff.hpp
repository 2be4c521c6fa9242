#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagn/rng.hpp"
#include "dagn/tensor.hpp"

namespace dagn {

// Learnable state: a value and its accumulated gradient, always shape-matched.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)), grad(Tensor::zeros(value.shape())) {}

  void zero_grad() { grad = Tensor::zeros(value.shape()); }

  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init off a caller-owned stream.
  static Parameter uniform_init(std::string name, Shape shape, std::size_t fan_in, Rng& rng);
};

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; the tensor itself
// lives in the tape node.
class Var {
 public:
  Var() : tape_(nullptr), id_(0) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_;
  std::size_t id_;
};

enum class Activation { Sigmoid, Relu, Gelu };

// Ordered record of executed primitive ops. backward() replays the record in
// exact reverse execution order, so a node's gradient is complete before its
// own backprop runs. A tape is single-use: one forward build, one backward.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Untracked input; gradient flow stops here.
  Var constant(Tensor value);

  // Tracked leaf bound to a Parameter. Repeated calls with the same Parameter
  // return the same node so gradient contributions accumulate in one place.
  Var leaf(Parameter& param);

  // Accumulates dLoss/dParameter into every reachable Parameter's grad and
  // consumes the tape.
  void backward(const Var& loss);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

  const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }

 private:
  friend class Var;

  using BackpropFn = std::function<void(Tape&, std::size_t self)>;

  struct Node {
    Tensor value;
    std::vector<double> grad;  // empty until first contribution
    BackpropFn backprop;       // null for leaves/constants
    Parameter* param = nullptr;
  };

  Var emplace(Tensor value, BackpropFn backprop);
  std::vector<double>& grad_buffer(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool consumed_ = false;

  // Op implementations append nodes and wire backprop closures.
  friend Var matmul(const Var&, const Var&);
  friend Var add(const Var&, const Var&);
  friend Var sub(const Var&, const Var&);
  friend Var mul(const Var&, const Var&);
  friend Var scale(const Var&, double);
  friend Var add_row_broadcast(const Var&, const Var&);
  friend Var activation(const Var&, Activation);
  friend Var tanh_act(const Var&);
  friend Var softmax(const Var&);
  friend Var layer_norm(const Var&, const Var&, const Var&, double);
  friend Var cross_entropy(const Var&, std::size_t);
  friend Var sum(const Var&);
  friend Var reshape(const Var&, Shape);
  friend Var row(const Var&, std::size_t);
  friend Var stack_rows(const std::vector<Var>&);
  friend Var hconcat(const Var&, const Var&);
  friend Var concat(const std::vector<Var>&);
  friend Var gather_rows(const Var&, const std::vector<std::size_t>&);
  friend Var span_sum(const Var&, const std::vector<std::vector<std::size_t>>&);
  friend Var span_add(const Var&, const Var&, const std::vector<std::vector<std::size_t>>&);
  friend Var scale_rows(const Var&, const Var&);
};

// --- primitive ops ---------------------------------------------------------

// [m x k] * [k x n] -> [m x n]
Var matmul(const Var& a, const Var& b);

// Elementwise, identical shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

Var scale(const Var& x, double c);

// [n x h] + [h], the bias-add pattern.
Var add_row_broadcast(const Var& m, const Var& r);

Var activation(const Var& x, Activation kind);
inline Var sigmoid(const Var& x) { return activation(x, Activation::Sigmoid); }
inline Var relu(const Var& x) { return activation(x, Activation::Relu); }
inline Var gelu(const Var& x) { return activation(x, Activation::Gelu); }
Var tanh_act(const Var& x);

// Rank-1 [n], max-subtracted for stability.
Var softmax(const Var& x);

// Normalizes the last axis of [n x d] (or rank-1 [d]) to zero mean / unit
// variance, then applies gain and bias of shape [d].
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

// -log softmax(scores)[gold] for rank-1 scores.
Var cross_entropy(const Var& scores, std::size_t gold);

// Scalar [1] sum of all entries.
Var sum(const Var& x);

Var reshape(const Var& x, Shape shape);

// Row r of [m x n] as [1 x n].
Var row(const Var& m, std::size_t r);

// Stack L vars of shape [1 x n] into [L x n].
Var stack_rows(const std::vector<Var>& rows);

// [m x a], [m x b] -> [m x a+b]
Var hconcat(const Var& a, const Var& b);

// Rank-1 concat.
Var concat(const std::vector<Var>& parts);

// out[i, :] = table[ids[i], :]; repeated ids accumulate gradient.
Var gather_rows(const Var& table, const std::vector<std::size_t>& ids);

// out[n, :] = sum over l in spans[n] of tokens[l, :]
Var span_sum(const Var& tokens, const std::vector<std::vector<std::size_t>>& spans);

// out = tokens, then out[l, :] += states[n, :] for every l in spans[n].
Var span_add(const Var& tokens, const Var& states,
             const std::vector<std::vector<std::size_t>>& spans);

// out[i, :] = m[i, :] * s[i] with s rank-1 of length rows(m).
Var scale_rows(const Var& m, const Var& s);

}  // namespace dagn
