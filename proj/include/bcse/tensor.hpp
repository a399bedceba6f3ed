/* Copyright 2026 The bcse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Dense row-major tensors with tape-based reverse-mode differentiation.
//
// A Tape is the computation record: while a TapeScope is alive on a thread,
// every primitive whose operands require gradients appends one entry holding
// its operands, its output and a closure that pushes the output gradient back
// into the operands. Entries are appended in execution order, so walking the
// tape backwards from the loss visits each node once in reverse topological
// order. Without an active tape the same primitives run forward only.

#ifndef BCSE_TENSOR_HPP_
#define BCSE_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcse/error.hpp"
#include "bcse/random.hpp"

namespace bcse {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

inline void check_shape(const Shape& shape) {
  if (shape.empty()) throw Error(Errc::invalid_shape, "tensor rank must be at least 1");
  for (std::size_t e : shape)
    if (e == 0) throw Error(Errc::invalid_shape, "zero extent in shape " + shape_str(shape));
}

template <typename T>
class Tape;

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something is accumulated
  bool requires_grad = false;
  const Tape<T>* producer = nullptr;  // tape that recorded this value, if any
  std::uint64_t producer_generation = 0;
  std::size_t producer_index = 0;
  std::size_t tape_refs = 0;  // live tape entries that reference this node

  void accumulate(std::span<const T> g) {
    if (!requires_grad) return;
    if (grad.empty()) grad.assign(data.size(), T(0));
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
  }

  // Hands out the gradient buffer for in-place accumulation.
  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

template <typename T>
using NodePtr = std::shared_ptr<TensorNode<T>>;

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  Tensor(Shape shape, std::vector<T> data) : node_(std::make_shared<TensorNode<T>>()) {
    check_shape(shape);
    if (shape_numel(shape) != data.size())
      throw Error(Errc::invalid_shape, "shape " + shape_str(shape) + " needs " +
                                           std::to_string(shape_numel(shape)) + " values, got " +
                                           std::to_string(data.size()));
    node_->shape = std::move(shape);
    node_->data = std::move(data);
  }

  static Tensor full(Shape shape, T value) {
    check_shape(shape);
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, value));
  }

  static Tensor zeros(Shape shape) { return full(std::move(shape), T(0)); }

  static Tensor uniform(Shape shape, double lo, double hi, std::uint64_t seed) {
    check_shape(shape);
    if (!(lo < hi)) throw Error(Errc::invalid_argument, "uniform fill needs lo < hi");
    Rng rng(seed);
    std::vector<T> data(shape_numel(shape));
    for (T& v : data) v = static_cast<T>(rng.uniform(lo, hi));
    return Tensor(std::move(shape), std::move(data));
  }

  static Tensor normal(Shape shape, double stddev, std::uint64_t seed) {
    check_shape(shape);
    Rng rng(seed);
    std::vector<T> data(shape_numel(shape));
    for (T& v : data) v = static_cast<T>(stddev * rng.normal());
    return Tensor(std::move(shape), std::move(data));
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }

  // Writable view for leaves (parameters, buffers). Refused while a live
  // tape entry still references the value, because backward closures may
  // read the saved data.
  std::span<T> mutable_data() {
    if (node_->tape_refs > 0)
      throw Error(Errc::invalid_argument, "in-place write to a tensor referenced by a live tape");
    return node_->data;
  }

  T item() const {
    if (numel() != 1) throw Error(Errc::invalid_argument, "item() on tensor of shape " + shape_str(shape()));
    return node_->data[0];
  }

  T operator[](std::size_t i) const { return node_->data[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    node_->requires_grad = on;
    if (!on) node_->grad.clear();
    return *this;
  }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  // Detached copy sharing nothing with this tensor.
  Tensor clone() const { return Tensor(shape(), node_->data); }

  const NodePtr<T>& node() const { return node_; }

  static Tensor from_node(NodePtr<T> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

 private:
  NodePtr<T> node_;
};

template <typename T>
class Tape {
 public:
  using Backward = std::function<void(TensorNode<T>& out)>;

  Tape() : generation_(next_generation()) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape() { clear(); }

  void record(std::vector<NodePtr<T>> inputs, const NodePtr<T>& output, Backward backward) {
    for (auto& in : inputs) ++in->tape_refs;
    ++output->tape_refs;
    output->producer = this;
    output->producer_generation = generation_;
    output->producer_index = entries_.size();
    entries_.push_back(Entry{std::move(inputs), output, std::move(backward)});
  }

  std::size_t size() const { return entries_.size(); }

  bool produced(const TensorNode<T>& node) const {
    return node.producer == this && node.producer_generation == generation_ &&
           node.producer_index < entries_.size();
  }

  void backward(const Tensor<T>& loss) {
    if (!loss.defined() || loss.numel() != 1)
      throw Error(Errc::invalid_argument, "backward needs a scalar loss");
    const NodePtr<T>& root = loss.node();
    if (!produced(*root))
      throw Error(Errc::invalid_argument, "loss was not produced under this tape");
    root->grad.assign(1, T(1));
    for (std::size_t i = root->producer_index + 1; i-- > 0;) {
      Entry& e = entries_[i];
      if (e.output->grad.empty()) continue;
      e.backward(*e.output);
    }
  }

  void clear() {
    for (auto& e : entries_) {
      for (auto& in : e.inputs) --in->tape_refs;
      --e.output->tape_refs;
    }
    entries_.clear();
    generation_ = next_generation();
  }

  static Tape*& active() {
    thread_local Tape* current = nullptr;
    return current;
  }

 private:
  struct Entry {
    std::vector<NodePtr<T>> inputs;
    NodePtr<T> output;
    Backward backward;
  };

  static std::uint64_t next_generation() {
    thread_local std::uint64_t counter = 0;
    return ++counter;
  }

  std::vector<Entry> entries_;
  std::uint64_t generation_;
};

// Makes `tape` the active record on this thread for the scope's lifetime.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape) : previous_(Tape<T>::active()) { Tape<T>::active() = &tape; }
  ~TapeScope() { Tape<T>::active() = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

// Suspends recording, e.g. for evaluation inside a training step.
template <typename T>
class NoGradScope {
 public:
  NoGradScope() : previous_(Tape<T>::active()) { Tape<T>::active() = nullptr; }
  ~NoGradScope() { Tape<T>::active() = previous_; }
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* previous_;
};

template <typename T>
void backward(const Tensor<T>& loss) {
  Tape<T>* tape = Tape<T>::active();
  if (tape == nullptr) throw Error(Errc::invalid_argument, "backward called without an active tape");
  tape->backward(loss);
}

namespace detail {

// Wraps a freshly computed value and, when recording, registers its backward
// closure. The closure receives the output node (with its gradient filled).
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::vector<NodePtr<T>> inputs,
                      typename Tape<T>::Backward backward) {
  Tensor<T> out(std::move(shape), std::move(data));
  Tape<T>* tape = Tape<T>::active();
  if (tape == nullptr) return out;
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in->requires_grad;
  if (!needs) return out;
  out.node()->requires_grad = true;
  tape->record(std::move(inputs), out.node(), std::move(backward));
  return out;
}

}  // namespace detail

}  // namespace bcse

#endif  // BCSE_TENSOR_HPP_
