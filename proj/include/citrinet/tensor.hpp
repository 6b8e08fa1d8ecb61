// Copyright 2026 The citrinet-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CITRINET_TENSOR_HPP_
#define CITRINET_TENSOR_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace citrinet {

// Reverse-mode autodiff node. Rank <= 3, row-major storage.
// Values are immutable after the op that created them; grad buffers are
// the only thing mutated afterwards (accumulation during backward()).
template <typename T>
struct TensorImpl {
  std::array<std::int64_t, 3> dims{1, 1, 1};
  int rank = 0;
  std::vector<T> values;
  std::vector<T> grad;  // allocated lazily; same size as values
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  // Pulls from this->grad and accumulates into the parents' grads.
  std::function<void(TensorImpl&)> backprop;

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int i = 0; i < rank; ++i) n *= dims[i];
    return rank == 0 ? 1 : n;
  }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }
};

// While a guard is alive, newly created tensors record no graph edges.
// Used for inference and for finite-difference probing.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
  static bool enabled();

 private:
  bool previous_;
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const std::vector<std::int64_t>& shape,
                      bool requires_grad = false);
  static Tensor full(const std::vector<std::int64_t>& shape, T value,
                     bool requires_grad = false);
  static Tensor from(const std::vector<std::int64_t>& shape,
                     std::vector<T> data, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  int rank() const { return impl_->rank; }
  std::int64_t dim(int i) const { return impl_->dims[static_cast<size_t>(i)]; }
  std::int64_t numel() const { return impl_->numel(); }
  std::vector<std::int64_t> shape() const;

  std::span<T> values() { return impl_->values; }
  std::span<const T> values() const { return impl_->values; }
  bool requires_grad() const { return impl_->requires_grad; }

  // Grad of a leaf (or any node after backward()); empty span if absent.
  std::span<const T> grad() const { return impl_->grad; }
  std::span<T> grad() { return impl_->grad; }

  T& at(std::int64_t i) { return impl_->values[static_cast<size_t>(i)]; }
  T at(std::int64_t i) const { return impl_->values[static_cast<size_t>(i)]; }
  T& at(std::int64_t i, std::int64_t j) {
    return impl_->values[static_cast<size_t>(i * impl_->dims[1] + j)];
  }
  T at(std::int64_t i, std::int64_t j) const {
    return impl_->values[static_cast<size_t>(i * impl_->dims[1] + j)];
  }
  T& at(std::int64_t i, std::int64_t j, std::int64_t k) {
    return impl_->values[static_cast<size_t>(
        (i * impl_->dims[1] + j) * impl_->dims[2] + k)];
  }
  T at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return impl_->values[static_cast<size_t>(
        (i * impl_->dims[1] + j) * impl_->dims[2] + k)];
  }

  // Backpropagates from a scalar tensor, seeding d(this)/d(this) = 1.
  void backward();
  // Backpropagates from an arbitrary tensor with an explicit output grad,
  // e.g. the CTC loss gradient computed outside the graph.
  void backward(std::span<const T> seed);

  void zero_grad();
  void set_requires_grad(bool flag);

  std::shared_ptr<TensorImpl<T>> impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl<T>> impl_;
};

// A named trainable tensor. The name encodes the position in the model
// ("megablock1.block0.sub2.depthwise.weight") so per-layer optimizer state
// is addressable. decay_exempt marks biases and batch-norm affine params.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
  bool decay_exempt = false;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace citrinet

#endif  // CITRINET_TENSOR_HPP_
