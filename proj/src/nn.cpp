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

#include "citrinet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace citrinet::nn {

namespace {

template <typename T>
Tensor<T> make_result(std::vector<std::int64_t> shape, std::vector<T> values,
                      std::vector<Tensor<T>> inputs,
                      std::function<void(TensorImpl<T>&)> backprop) {
  bool needs_grad = false;
  for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
  Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(values));
  if (needs_grad && !NoGradGuard::enabled()) {
    auto impl = out.impl();
    impl->requires_grad = true;
    for (const auto& in : inputs) impl->parents.push_back(in.impl());
    impl->backprop = std::move(backprop);
  }
  return out;
}

template <typename T>
void accumulate(TensorImpl<T>& node, size_t parent_index,
                const std::vector<T>& contribution) {
  auto& parent = *node.parents[parent_index];
  if (!parent.requires_grad && !parent.backprop) return;
  parent.ensure_grad();
  for (size_t i = 0; i < contribution.size(); ++i) {
    parent.grad[i] += contribution[i];
  }
}

}  // namespace

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight,
                 const Tensor<T>& bias, std::int64_t stride,
                 std::int64_t groups) {
  if (input.rank() != 2) throw std::invalid_argument("conv1d: input must be [C x T]");
  if (weight.rank() != 3) {
    throw std::invalid_argument("conv1d: weight must be [C_out x C_in/groups x K]");
  }
  const std::int64_t c_in = input.dim(0);
  const std::int64_t t_in = input.dim(1);
  const std::int64_t c_out = weight.dim(0);
  const std::int64_t c_group = weight.dim(1);
  const std::int64_t k = weight.dim(2);
  if (k % 2 == 0) throw std::invalid_argument("conv1d: kernel width must be odd");
  if (stride < 1) throw std::invalid_argument("conv1d: stride must be positive");
  if (groups < 1 || c_in % groups != 0 || c_out % groups != 0) {
    throw std::invalid_argument("conv1d: channels not divisible by groups");
  }
  if (c_group != c_in / groups) {
    throw std::invalid_argument("conv1d: weight shape does not match groups");
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != c_out)) {
    throw std::invalid_argument("conv1d: bias shape mismatch");
  }
  const std::int64_t pad = (k - 1) / 2;
  const std::int64_t t_out = (t_in - 1) / stride + 1;  // == ceil(t_in/stride)
  const std::int64_t out_per_group = c_out / groups;

  std::vector<T> out(static_cast<size_t>(c_out * t_out), T(0));
  for (std::int64_t oc = 0; oc < c_out; ++oc) {
    const std::int64_t g = oc / out_per_group;
    const T b = bias.defined() ? bias.at(oc) : T(0);
    for (std::int64_t to = 0; to < t_out; ++to) {
      double acc = static_cast<double>(b);
      const std::int64_t t0 = to * stride - pad;
      for (std::int64_t icg = 0; icg < c_group; ++icg) {
        const std::int64_t ic = g * c_group + icg;
        for (std::int64_t kk = 0; kk < k; ++kk) {
          const std::int64_t ti = t0 + kk;
          if (ti < 0 || ti >= t_in) continue;
          acc += static_cast<double>(weight.at(oc, icg, kk)) *
                 static_cast<double>(input.at(ic, ti));
        }
      }
      out[static_cast<size_t>(oc * t_out + to)] = static_cast<T>(acc);
    }
  }

  std::vector<Tensor<T>> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  auto x = input, w = weight, bi = bias;
  auto backprop = [x, w, bi, stride, groups, pad, c_in, t_in, c_out, c_group,
                   k, t_out, out_per_group](TensorImpl<T>& node) {
    std::vector<T> dx(static_cast<size_t>(c_in * t_in), T(0));
    std::vector<T> dw(static_cast<size_t>(c_out * c_group * k), T(0));
    std::vector<T> db(bi.defined() ? static_cast<size_t>(c_out) : 0, T(0));
    const auto xv = x.values();
    const auto wv = w.values();
    for (std::int64_t oc = 0; oc < c_out; ++oc) {
      const std::int64_t g = oc / out_per_group;
      for (std::int64_t to = 0; to < t_out; ++to) {
        const T gy = node.grad[static_cast<size_t>(oc * t_out + to)];
        if (gy == T(0)) continue;
        if (!db.empty()) db[static_cast<size_t>(oc)] += gy;
        const std::int64_t t0 = to * stride - pad;
        for (std::int64_t icg = 0; icg < c_group; ++icg) {
          const std::int64_t ic = g * c_group + icg;
          for (std::int64_t kk = 0; kk < k; ++kk) {
            const std::int64_t ti = t0 + kk;
            if (ti < 0 || ti >= t_in) continue;
            const size_t xi = static_cast<size_t>(ic * t_in + ti);
            const size_t wi = static_cast<size_t>((oc * c_group + icg) * k + kk);
            dx[xi] += gy * wv[wi];
            dw[wi] += gy * xv[xi];
          }
        }
      }
    }
    accumulate(node, 0, dx);
    accumulate(node, 1, dw);
    if (!db.empty()) accumulate(node, 2, db);
  };
  return make_result<T>({c_out, t_out}, std::move(out), std::move(inputs),
                        std::move(backprop));
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight,
                 std::int64_t stride, std::int64_t groups) {
  return conv1d(input, weight, Tensor<T>(), stride, groups);
}

template <typename T>
Tensor<T> batchnorm1d(const Tensor<T>& input, const Tensor<T>& gamma,
                      const Tensor<T>& beta, Tensor<T>& running_mean,
                      Tensor<T>& running_var, bool train, double momentum,
                      double eps) {
  if (input.rank() != 2) throw std::invalid_argument("batchnorm1d: input must be [C x T]");
  const std::int64_t c = input.dim(0);
  const std::int64_t t = input.dim(1);
  if (t == 0) throw std::invalid_argument("batchnorm1d: empty time axis");
  if (gamma.dim(0) != c || beta.dim(0) != c) {
    throw std::invalid_argument("batchnorm1d: affine parameter shape mismatch");
  }

  std::vector<T> mean(static_cast<size_t>(c)), inv_std(static_cast<size_t>(c));
  if (train) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      double m = 0.0;
      for (std::int64_t i = 0; i < t; ++i) m += input.at(ch, i);
      m /= static_cast<double>(t);
      double v = 0.0;
      for (std::int64_t i = 0; i < t; ++i) {
        const double d = input.at(ch, i) - m;
        v += d * d;
      }
      v /= static_cast<double>(t);  // biased variance
      mean[static_cast<size_t>(ch)] = static_cast<T>(m);
      inv_std[static_cast<size_t>(ch)] = static_cast<T>(1.0 / std::sqrt(v + eps));
      running_mean.at(ch) = static_cast<T>((1.0 - momentum) * running_mean.at(ch) + momentum * m);
      running_var.at(ch) = static_cast<T>((1.0 - momentum) * running_var.at(ch) + momentum * v);
    }
  } else {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      mean[static_cast<size_t>(ch)] = running_mean.at(ch);
      inv_std[static_cast<size_t>(ch)] =
          static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var.at(ch)) + eps));
    }
  }

  std::vector<T> out(static_cast<size_t>(c * t));
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const T m = mean[static_cast<size_t>(ch)];
    const T is = inv_std[static_cast<size_t>(ch)];
    const T g = gamma.at(ch);
    const T b = beta.at(ch);
    for (std::int64_t i = 0; i < t; ++i) {
      out[static_cast<size_t>(ch * t + i)] = g * ((input.at(ch, i) - m) * is) + b;
    }
  }

  auto x = input, ga = gamma;
  auto backprop = [x, ga, mean, inv_std, train, c, t](TensorImpl<T>& node) {
    std::vector<T> dx(static_cast<size_t>(c * t), T(0));
    std::vector<T> dgamma(static_cast<size_t>(c), T(0));
    std::vector<T> dbeta(static_cast<size_t>(c), T(0));
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const double m = mean[static_cast<size_t>(ch)];
      const double is = inv_std[static_cast<size_t>(ch)];
      const double g = ga.at(ch);
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::int64_t i = 0; i < t; ++i) {
        const double dy = node.grad[static_cast<size_t>(ch * t + i)];
        const double xhat = (x.at(ch, i) - m) * is;
        sum_dy += dy;
        sum_dy_xhat += dy * xhat;
        dgamma[static_cast<size_t>(ch)] += static_cast<T>(dy * xhat);
        dbeta[static_cast<size_t>(ch)] += static_cast<T>(dy);
      }
      if (train) {
        const double n = static_cast<double>(t);
        for (std::int64_t i = 0; i < t; ++i) {
          const double dy = node.grad[static_cast<size_t>(ch * t + i)];
          const double xhat = (x.at(ch, i) - m) * is;
          dx[static_cast<size_t>(ch * t + i)] = static_cast<T>(
              g * is * (dy - sum_dy / n - xhat * sum_dy_xhat / n));
        }
      } else {
        for (std::int64_t i = 0; i < t; ++i) {
          const double dy = node.grad[static_cast<size_t>(ch * t + i)];
          dx[static_cast<size_t>(ch * t + i)] = static_cast<T>(g * is * dy);
        }
      }
    }
    accumulate(node, 0, dx);
    accumulate(node, 1, dgamma);
    accumulate(node, 2, dbeta);
  };
  return make_result<T>({c, t}, std::move(out), {input, gamma, beta},
                        std::move(backprop));
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  std::vector<T> out(input.values().begin(), input.values().end());
  for (auto& v : out) v = v > T(0) ? v : T(0);
  auto x = input;
  auto backprop = [x](TensorImpl<T>& node) {
    std::vector<T> dx(node.grad.size());
    const auto xv = x.values();
    for (size_t i = 0; i < dx.size(); ++i) {
      dx[i] = xv[i] > T(0) ? node.grad[i] : T(0);
    }
    accumulate(node, 0, dx);
  };
  return make_result<T>(input.shape(), std::move(out), {input},
                        std::move(backprop));
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input) {
  std::vector<T> out(input.values().size());
  const auto xv = input.values();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(xv[i]))));
  }
  auto y = out;
  auto backprop = [y](TensorImpl<T>& node) {
    std::vector<T> dx(node.grad.size());
    for (size_t i = 0; i < dx.size(); ++i) {
      dx[i] = node.grad[i] * y[i] * (T(1) - y[i]);
    }
    accumulate(node, 0, dx);
  };
  return make_result<T>(input.shape(), std::move(out), {input},
                        std::move(backprop));
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& input, double p, bool train,
                  std::mt19937& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
  if (!train || p == 0.0) return input;  // identity, same buffer
  std::bernoulli_distribution drop(p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(input.values().size());
  for (auto& m : mask) m = drop(rng) ? T(0) : scale;
  std::vector<T> out(input.values().size());
  const auto xv = input.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  auto backprop = [mask](TensorImpl<T>& node) {
    std::vector<T> dx(node.grad.size());
    for (size_t i = 0; i < dx.size(); ++i) dx[i] = node.grad[i] * mask[i];
    accumulate(node, 0, dx);
  };
  return make_result<T>(input.shape(), std::move(out), {input},
                        std::move(backprop));
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("add: shape mismatch");
  std::vector<T> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  auto backprop = [](TensorImpl<T>& node) {
    accumulate(node, 0, node.grad);
    accumulate(node, 1, node.grad);
  };
  return make_result<T>(a.shape(), std::move(out), {a, b}, std::move(backprop));
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("mul: shape mismatch");
  std::vector<T> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  auto ta = a, tb = b;
  auto backprop = [ta, tb](TensorImpl<T>& node) {
    std::vector<T> da(node.grad.size()), db(node.grad.size());
    for (size_t i = 0; i < node.grad.size(); ++i) {
      da[i] = node.grad[i] * tb.values()[i];
      db[i] = node.grad[i] * ta.values()[i];
    }
    accumulate(node, 0, da);
    accumulate(node, 1, db);
  };
  return make_result<T>(a.shape(), std::move(out), {a, b}, std::move(backprop));
}

template <typename T>
Tensor<T> reduce_mean_time(const Tensor<T>& input, std::int64_t window) {
  if (input.rank() != 2) throw std::invalid_argument("reduce_mean_time: input must be [C x T]");
  const std::int64_t c = input.dim(0);
  const std::int64_t t = input.dim(1);
  if (t == 0) throw std::invalid_argument("reduce_mean_time: empty time axis");
  if (window < 0) throw std::invalid_argument("reduce_mean_time: negative window");
  const std::int64_t w = window == 0 ? t : window;
  const std::int64_t n_windows = (t + w - 1) / w;

  std::vector<T> out(static_cast<size_t>(c * n_windows));
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t wi = 0; wi < n_windows; ++wi) {
      const std::int64_t lo = wi * w;
      const std::int64_t hi = std::min(lo + w, t);
      double acc = 0.0;
      for (std::int64_t i = lo; i < hi; ++i) acc += input.at(ch, i);
      out[static_cast<size_t>(ch * n_windows + wi)] =
          static_cast<T>(acc / static_cast<double>(hi - lo));
    }
  }
  auto backprop = [c, t, w, n_windows](TensorImpl<T>& node) {
    std::vector<T> dx(static_cast<size_t>(c * t));
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t wi = 0; wi < n_windows; ++wi) {
        const std::int64_t lo = wi * w;
        const std::int64_t hi = std::min(lo + w, t);
        const T share = node.grad[static_cast<size_t>(ch * n_windows + wi)] /
                        static_cast<T>(hi - lo);
        for (std::int64_t i = lo; i < hi; ++i) {
          dx[static_cast<size_t>(ch * t + i)] = share;
        }
      }
    }
    accumulate(node, 0, dx);
  };
  return make_result<T>({c, n_windows}, std::move(out), {input},
                        std::move(backprop));
}

template <typename T>
Tensor<T> expand_time(const Tensor<T>& input, std::int64_t window,
                      std::int64_t frames) {
  if (input.rank() != 2) throw std::invalid_argument("expand_time: input must be [C x W]");
  const std::int64_t c = input.dim(0);
  const std::int64_t n_windows = input.dim(1);
  const std::int64_t w = window == 0 ? frames : window;
  if ((frames + w - 1) / w != n_windows) {
    throw std::invalid_argument("expand_time: window count mismatch");
  }
  std::vector<T> out(static_cast<size_t>(c * frames));
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t i = 0; i < frames; ++i) {
      out[static_cast<size_t>(ch * frames + i)] = input.at(ch, i / w);
    }
  }
  auto backprop = [c, frames, w, n_windows](TensorImpl<T>& node) {
    std::vector<T> dx(static_cast<size_t>(c * n_windows), T(0));
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t i = 0; i < frames; ++i) {
        dx[static_cast<size_t>(ch * n_windows + i / w)] +=
            node.grad[static_cast<size_t>(ch * frames + i)];
      }
    }
    accumulate(node, 0, dx);
  };
  return make_result<T>({c, frames}, std::move(out), {input},
                        std::move(backprop));
}

template <typename T>
Tensor<T> log_softmax_channels(const Tensor<T>& input) {
  if (input.rank() != 2) {
    throw std::invalid_argument("log_softmax_channels: input must be [C x T]");
  }
  const std::int64_t c = input.dim(0);
  const std::int64_t t = input.dim(1);
  std::vector<T> out(static_cast<size_t>(c * t));
  for (std::int64_t i = 0; i < t; ++i) {
    double max = -std::numeric_limits<double>::infinity();
    for (std::int64_t ch = 0; ch < c; ++ch) {
      max = std::max(max, static_cast<double>(input.at(ch, i)));
    }
    double lse = 0.0;
    for (std::int64_t ch = 0; ch < c; ++ch) {
      lse += std::exp(static_cast<double>(input.at(ch, i)) - max);
    }
    lse = max + std::log(lse);
    for (std::int64_t ch = 0; ch < c; ++ch) {
      out[static_cast<size_t>(ch * t + i)] =
          static_cast<T>(static_cast<double>(input.at(ch, i)) - lse);
    }
  }
  auto y = out;
  auto backprop = [y, c, t](TensorImpl<T>& node) {
    std::vector<T> dx(node.grad.size());
    for (std::int64_t i = 0; i < t; ++i) {
      double sum_dy = 0.0;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        sum_dy += node.grad[static_cast<size_t>(ch * t + i)];
      }
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const size_t idx = static_cast<size_t>(ch * t + i);
        dx[idx] = static_cast<T>(node.grad[idx] -
                                 std::exp(static_cast<double>(y[idx])) * sum_dy);
      }
    }
    accumulate(node, 0, dx);
  };
  return make_result<T>({c, t}, std::move(out), {input}, std::move(backprop));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
  double acc = 0.0;
  for (const auto v : input.values()) acc += v;
  const std::int64_t n = input.numel();
  auto backprop = [n](TensorImpl<T>& node) {
    accumulate(node, 0, std::vector<T>(static_cast<size_t>(n), node.grad[0]));
  };
  return make_result<T>({}, {static_cast<T>(acc)}, {input}, std::move(backprop));
}

#define CITRINET_INSTANTIATE_NN(T)                                            \
  template Tensor<T> conv1d<T>(const Tensor<T>&, const Tensor<T>&,            \
                               const Tensor<T>&, std::int64_t, std::int64_t); \
  template Tensor<T> conv1d<T>(const Tensor<T>&, const Tensor<T>&,            \
                               std::int64_t, std::int64_t);                   \
  template Tensor<T> batchnorm1d<T>(const Tensor<T>&, const Tensor<T>&,       \
                                    const Tensor<T>&, Tensor<T>&, Tensor<T>&, \
                                    bool, double, double);                    \
  template Tensor<T> relu<T>(const Tensor<T>&);                               \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                            \
  template Tensor<T> dropout<T>(const Tensor<T>&, double, bool,               \
                                std::mt19937&);                               \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> reduce_mean_time<T>(const Tensor<T>&, std::int64_t);     \
  template Tensor<T> expand_time<T>(const Tensor<T>&, std::int64_t,           \
                                    std::int64_t);                            \
  template Tensor<T> log_softmax_channels<T>(const Tensor<T>&);               \
  template Tensor<T> sum<T>(const Tensor<T>&);

CITRINET_INSTANTIATE_NN(float)
CITRINET_INSTANTIATE_NN(double)

#undef CITRINET_INSTANTIATE_NN

}  // namespace citrinet::nn
