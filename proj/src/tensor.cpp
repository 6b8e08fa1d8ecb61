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

#include "citrinet/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace citrinet {

namespace {
thread_local bool g_grad_disabled = false;

std::int64_t product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_disabled) {
  g_grad_disabled = true;
}
NoGradGuard::~NoGradGuard() { g_grad_disabled = previous_; }
bool NoGradGuard::enabled() { return g_grad_disabled; }

template <typename T>
Tensor<T> Tensor<T>::zeros(const std::vector<std::int64_t>& shape,
                           bool requires_grad) {
  return full(shape, T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(const std::vector<std::int64_t>& shape, T value,
                          bool requires_grad) {
  return from(shape,
              std::vector<T>(static_cast<size_t>(product(shape)), value),
              requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from(const std::vector<std::int64_t>& shape,
                          std::vector<T> data, bool requires_grad) {
  if (shape.size() > 3) throw std::invalid_argument("tensor rank > 3");
  for (auto d : shape) {
    if (d < 0) throw std::invalid_argument("negative tensor extent");
  }
  if (product(shape) != static_cast<std::int64_t>(data.size())) {
    throw std::invalid_argument("tensor data does not match shape");
  }
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->rank = static_cast<int>(shape.size());
  for (size_t i = 0; i < shape.size(); ++i) impl->dims[i] = shape[i];
  impl->values = std::move(data);
  impl->requires_grad = requires_grad && !NoGradGuard::enabled();
  if (impl->requires_grad) impl->ensure_grad();
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from({}, std::vector<T>{value}, requires_grad);
}

template <typename T>
std::vector<std::int64_t> Tensor<T>::shape() const {
  std::vector<std::int64_t> s(static_cast<size_t>(impl_->rank));
  for (int i = 0; i < impl_->rank; ++i) s[static_cast<size_t>(i)] = impl_->dims[static_cast<size_t>(i)];
  return s;
}

namespace {

// Post-order DFS from the root; reversing the result yields an order where
// every node precedes its parents, so grads are complete before being pulled.
template <typename T>
std::vector<TensorImpl<T>*> topo_order(TensorImpl<T>* root) {
  std::vector<TensorImpl<T>*> order;
  std::unordered_set<TensorImpl<T>*> seen;
  std::vector<std::pair<TensorImpl<T>*, size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl<T>* parent = node->parents[next].get();
      ++next;
      if (seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename T>
void run_backward(TensorImpl<T>* root) {
  auto order = topo_order(root);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl<T>* node = *it;
    if (node->backprop) {
      node->ensure_grad();
      node->backprop(*node);
    }
  }
}

}  // namespace

template <typename T>
void Tensor<T>::backward() {
  if (numel() != 1) {
    throw std::invalid_argument("backward() requires a scalar tensor");
  }
  impl_->ensure_grad();
  impl_->grad[0] += T(1);
  run_backward(impl_.get());
}

template <typename T>
void Tensor<T>::backward(std::span<const T> seed) {
  if (static_cast<std::int64_t>(seed.size()) != numel()) {
    throw std::invalid_argument("backward seed does not match tensor size");
  }
  impl_->ensure_grad();
  for (size_t i = 0; i < seed.size(); ++i) impl_->grad[i] += seed[i];
  run_backward(impl_.get());
}

template <typename T>
void Tensor<T>::zero_grad() {
  impl_->grad.assign(impl_->values.size(), T(0));
}

template <typename T>
void Tensor<T>::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
  if (flag) impl_->ensure_grad();
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace citrinet
