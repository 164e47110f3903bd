// Copyright 2026 The cgvo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cgvo/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "cgvo/error.hpp"

namespace cgvo::nn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
bool wants_grad(const Tape<T>& tape, std::initializer_list<const Tensor<T>*> inputs) {
  if (!tape.enabled()) return false;
  for (const auto* t : inputs)
    if (t && t->requires_grad()) return true;
  return false;
}

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

struct ConvGeometry {
  std::size_t in_ch, in_h, in_w, out_ch, k, stride, pad, out_h, out_w;
  std::size_t patch() const { return in_ch * k * k; }
  std::size_t positions() const { return out_h * out_w; }
};

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols) {
  const std::size_t p = g.positions();
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    const T* plane = x + c * g.in_h * g.in_w;
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        T* row = cols + ((c * g.k + ki) * g.k + kj) * p;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
          T* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = plane + iy * g.in_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(g.in_w)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, T* dx) {
  const std::size_t p = g.positions();
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    T* plane = dx + c * g.in_h * g.in_w;
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const T* row = cols + ((c * g.k + ki) * g.k + kj) * p;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
          T* dst = plane + iy * g.in_w;
          const T* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
            if (ix >= 0 && ix < static_cast<long>(g.in_w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// 1x1 stride-1 unpadded convolutions read the input directly.
bool is_pointwise(const ConvGeometry& g) { return g.k == 1 && g.stride == 1 && g.pad == 0; }

template <typename T, typename F, typename D>
TensorPtr<T> unary(Tape<T>& tape, const TensorPtr<T>& input, F f, D derivative_from_output) {
  auto out = make_tensor<T>(input->shape());
  const std::size_t n = input->size();
  for (std::size_t i = 0; i < n; ++i) (*out)[i] = f((*input)[i]);
  if (wants_grad(tape, {input.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [input, o, n, derivative_from_output] {
      auto gi = input->grad();
      auto go = o->grad();
      for (std::size_t i = 0; i < n; ++i)
        gi[i] += go[i] * derivative_from_output((*input)[i], (*o)[i]);
    });
  }
  return out;
}

}  // namespace

template <typename T>
TensorPtr<T> conv2d(Tape<T>& tape, const TensorPtr<T>& input, const TensorPtr<T>& weights,
                    const TensorPtr<T>& bias, int stride, int padding) {
  if (input->rank() != 3 || weights->rank() != 4 || weights->dim(2) != weights->dim(3))
    throw ShapeError("conv2d: expected input CxHxW and weights (out, in, k, k), got " +
                     to_string(input->shape()) + " and " + to_string(weights->shape()));
  if (input->dim(0) != weights->dim(1))
    throw ShapeError("conv2d: input channels of " + to_string(input->shape()) +
                     " do not match weights " + to_string(weights->shape()));
  if (stride <= 0 || padding < 0)
    throw ShapeError("conv2d: non-positive stride for input " + to_string(input->shape()) +
                     " and weights " + to_string(weights->shape()));
  if (bias && (bias->size() != weights->dim(0)))
    throw ShapeError("conv2d: bias " + to_string(bias->shape()) + " does not match weights " +
                     to_string(weights->shape()));

  ConvGeometry g{input->dim(0), input->dim(1), input->dim(2), weights->dim(0), weights->dim(2),
                 static_cast<std::size_t>(stride), static_cast<std::size_t>(padding), 0, 0};
  if (g.in_h + 2 * g.pad < g.k || g.in_w + 2 * g.pad < g.k)
    throw ShapeError("conv2d: kernel larger than padded input " + to_string(input->shape()));
  g.out_h = conv_out_extent(g.in_h, g.k, g.stride, g.pad);
  g.out_w = conv_out_extent(g.in_w, g.k, g.stride, g.pad);

  const std::size_t kp = g.patch(), np = g.positions();
  auto out = make_tensor<T>({g.out_ch, g.out_h, g.out_w});
  ConstMatMap<T> w(weights->data(), g.out_ch, kp);
  MatMap<T> y(out->data(), g.out_ch, np);

  nn::AlignedVector<T> cols;
  if (is_pointwise(g)) {
    y.noalias() = w * ConstMatMap<T>(input->data(), kp, np);
  } else {
    cols.resize(kp * np);
    im2col(input->data(), g, cols.data());
    y.noalias() = w * ConstMatMap<T>(cols.data(), kp, np);
  }
  if (bias) y.colwise() += ConstVecMap<T>(bias->data(), g.out_ch);

  if (wants_grad(tape, {input.get(), weights.get(), bias.get()})) {
    Tensor<T>* o = out.get();
    // The patch matrix is rebuilt in backward rather than kept alive.
    tape.record(out, [input, weights, bias, o, g] {
      const std::size_t kp = g.patch(), np = g.positions();
      ConstMatMap<T> dy(o->grad().data(), g.out_ch, np);
      nn::AlignedVector<T> cols;
      const T* colp = input->data();
      if (weights->requires_grad() && !is_pointwise(g)) {
        cols.resize(kp * np);
        im2col(input->data(), g, cols.data());
        colp = cols.data();
      }
      if (weights->requires_grad()) {
        MatMap<T> dw(weights->grad().data(), g.out_ch, kp);
        dw.noalias() += dy * ConstMatMap<T>(colp, kp, np).transpose();
      }
      if (bias && bias->requires_grad()) {
        VecMap<T> db(bias->grad().data(), g.out_ch);
        db += dy.rowwise().sum();
      }
      if (input->requires_grad()) {
        ConstMatMap<T> w(weights->data(), g.out_ch, kp);
        if (is_pointwise(g)) {
          MatMap<T> dx(input->grad().data(), kp, np);
          dx.noalias() += w.transpose() * dy;
        } else {
          cols.resize(kp * np);
          MatMap<T> dcols(cols.data(), kp, np);
          dcols.noalias() = w.transpose() * dy;
          col2im_add(cols.data(), g, input->grad().data());
        }
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> max_pool2(Tape<T>& tape, const TensorPtr<T>& input) {
  if (input->rank() != 3)
    throw ShapeError("max_pool2: expected CxHxW, got " + to_string(input->shape()));
  const std::size_t c = input->dim(0), h = input->dim(1), w = input->dim(2);
  if (h % 2 != 0 || w % 2 != 0)
    throw ShapeError("max_pool2: spatial extents must be even, got " + to_string(input->shape()));
  const std::size_t oh = h / 2, ow = w / 2;
  auto out = make_tensor<T>({c, oh, ow});
  std::vector<std::uint32_t> argmax(out->size());
  const T* x = input->data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t base = ch * h * w + 2 * oy * w + 2 * ox;
        const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k)
          if (x[cand[k]] > x[best]) best = cand[k];
        const std::size_t oi = (ch * oh + oy) * ow + ox;
        (*out)[oi] = x[best];
        argmax[oi] = static_cast<std::uint32_t>(best);
      }
    }
  }
  if (wants_grad(tape, {input.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [input, o, argmax = std::move(argmax)] {
      auto gi = input->grad();
      auto go = o->grad();
      for (std::size_t i = 0; i < argmax.size(); ++i) gi[argmax[i]] += go[i];
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> relu(Tape<T>& tape, const TensorPtr<T>& input) {
  return unary(
      tape, input, [](T v) { return v > T(0) ? v : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
TensorPtr<T> sigmoid(Tape<T>& tape, const TensorPtr<T>& input) {
  return unary(
      tape, input, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
TensorPtr<T> tanh(Tape<T>& tape, const TensorPtr<T>& input) {
  return unary(
      tape, input, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
TensorPtr<T> linear(Tape<T>& tape, const TensorPtr<T>& input, const TensorPtr<T>& weights,
                    const TensorPtr<T>& bias) {
  if (weights->rank() != 2 || input->size() != weights->dim(1))
    throw ShapeError("linear: input " + to_string(input->shape()) + " does not match weights " +
                     to_string(weights->shape()));
  const std::size_t out_n = weights->dim(0), in_n = weights->dim(1);
  if (bias && bias->size() != out_n)
    throw ShapeError("linear: bias " + to_string(bias->shape()) + " does not match weights " +
                     to_string(weights->shape()));
  auto out = make_tensor<T>({out_n});
  ConstMatMap<T> w(weights->data(), out_n, in_n);
  VecMap<T> y(out->data(), out_n);
  y.noalias() = w * ConstVecMap<T>(input->data(), in_n);
  if (bias) y += ConstVecMap<T>(bias->data(), out_n);

  if (wants_grad(tape, {input.get(), weights.get(), bias.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [input, weights, bias, o, out_n, in_n] {
      ConstVecMap<T> dy(o->grad().data(), out_n);
      if (weights->requires_grad()) {
        MatMap<T> dw(weights->grad().data(), out_n, in_n);
        dw.noalias() += dy * ConstVecMap<T>(input->data(), in_n).transpose();
      }
      if (bias && bias->requires_grad()) VecMap<T>(bias->grad().data(), out_n) += dy;
      if (input->requires_grad()) {
        VecMap<T> dx(input->grad().data(), in_n);
        dx.noalias() += ConstMatMap<T>(weights->data(), out_n, in_n).transpose() * dy;
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> add(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require_same_shape("add", *a, *b);
  auto out = make_tensor<T>(a->shape());
  const std::size_t n = a->size();
  for (std::size_t i = 0; i < n; ++i) (*out)[i] = (*a)[i] + (*b)[i];
  if (wants_grad(tape, {a.get(), b.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [a, b, o, n] {
      auto go = o->grad();
      if (a->requires_grad()) {
        auto ga = a->grad();
        for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
      }
      if (b->requires_grad()) {
        auto gb = b->grad();
        for (std::size_t i = 0; i < n; ++i) gb[i] += go[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> multiply(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require_same_shape("multiply", *a, *b);
  auto out = make_tensor<T>(a->shape());
  const std::size_t n = a->size();
  for (std::size_t i = 0; i < n; ++i) (*out)[i] = (*a)[i] * (*b)[i];
  if (wants_grad(tape, {a.get(), b.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [a, b, o, n] {
      auto go = o->grad();
      if (a->requires_grad()) {
        auto ga = a->grad();
        for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * (*b)[i];
      }
      if (b->requires_grad()) {
        auto gb = b->grad();
        for (std::size_t i = 0; i < n; ++i) gb[i] += go[i] * (*a)[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> one_minus(Tape<T>& tape, const TensorPtr<T>& a) {
  return unary(tape, a, [](T v) { return T(1) - v; }, [](T, T) { return T(-1); });
}

template <typename T>
TensorPtr<T> concat_channels(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->rank() != b->rank() || a->rank() == 0 ||
      !std::equal(a->shape().begin() + 1, a->shape().end(), b->shape().begin() + 1))
    throw ShapeError("concat_channels: incompatible shapes " + to_string(a->shape()) + " and " +
                     to_string(b->shape()));
  Shape shape = a->shape();
  shape[0] += b->dim(0);
  auto out = make_tensor<T>(shape);
  std::copy(a->values().begin(), a->values().end(), out->values().begin());
  std::copy(b->values().begin(), b->values().end(), out->values().begin() + a->size());
  if (wants_grad(tape, {a.get(), b.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [a, b, o] {
      auto go = o->grad();
      if (a->requires_grad()) {
        auto ga = a->grad();
        for (std::size_t i = 0; i < a->size(); ++i) ga[i] += go[i];
      }
      if (b->requires_grad()) {
        auto gb = b->grad();
        const std::size_t off = a->size();
        for (std::size_t i = 0; i < b->size(); ++i) gb[i] += go[off + i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> stack(Tape<T>& tape, std::span<const TensorPtr<T>> parts) {
  if (parts.empty()) throw ShapeError("stack: no tensors");
  const Shape& inner = parts.front()->shape();
  bool any_grad = false;
  for (const auto& p : parts) {
    if (p->shape() != inner)
      throw ShapeError("stack: shape mismatch " + to_string(inner) + " vs " + to_string(p->shape()));
    any_grad = any_grad || p->requires_grad();
  }
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  auto out = make_tensor<T>(shape);
  const std::size_t n = parts.front()->size();
  for (std::size_t k = 0; k < parts.size(); ++k)
    std::copy(parts[k]->values().begin(), parts[k]->values().end(), out->values().begin() + k * n);
  if (tape.enabled() && any_grad) {
    Tensor<T>* o = out.get();
    std::vector<TensorPtr<T>> keep(parts.begin(), parts.end());
    tape.record(out, [keep = std::move(keep), o, n] {
      auto go = o->grad();
      for (std::size_t k = 0; k < keep.size(); ++k) {
        if (!keep[k]->requires_grad()) continue;
        auto g = keep[k]->grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += go[k * n + i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> flatten(Tape<T>& tape, const TensorPtr<T>& input) {
  auto out = make_tensor<T>({input->size()},
                            std::vector<T>(input->values().begin(), input->values().end()));
  if (wants_grad(tape, {input.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [input, o] {
      auto gi = input->grad();
      auto go = o->grad();
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go[i];
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> sum(Tape<T>& tape, const TensorPtr<T>& input) {
  T acc = T(0);
  for (T v : input->values()) acc += v;
  auto out = make_tensor<T>({1}, acc);
  if (wants_grad(tape, {input.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [input, o] {
      const T g = o->grad()[0];
      for (T& v : input->grad()) v += g;
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> dropout(Tape<T>& tape, const TensorPtr<T>& input, double p, bool training,
                     std::mt19937_64& rng) {
  if (!training || p <= 0.0) return input;
  if (p >= 1.0) throw ContractError("dropout: rate must be < 1");
  const T scale = T(1.0 / (1.0 - p));
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<T> mask(input->size());
  for (T& m : mask) m = keep(rng) ? scale : T(0);
  auto out = make_tensor<T>(input->shape());
  for (std::size_t i = 0; i < mask.size(); ++i) (*out)[i] = (*input)[i] * mask[i];
  if (wants_grad(tape, {input.get()})) {
    Tensor<T>* o = out.get();
    tape.record(out, [input, o, mask = std::move(mask)] {
      auto gi = input->grad();
      auto go = o->grad();
      for (std::size_t i = 0; i < mask.size(); ++i) gi[i] += go[i] * mask[i];
    });
  }
  return out;
}

#define CGVO_INSTANTIATE_OPS(T)                                                                  \
  template TensorPtr<T> conv2d(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&,               \
                               const TensorPtr<T>&, int, int);                                   \
  template TensorPtr<T> max_pool2(Tape<T>&, const TensorPtr<T>&);                                \
  template TensorPtr<T> relu(Tape<T>&, const TensorPtr<T>&);                                     \
  template TensorPtr<T> sigmoid(Tape<T>&, const TensorPtr<T>&);                                  \
  template TensorPtr<T> tanh(Tape<T>&, const TensorPtr<T>&);                                     \
  template TensorPtr<T> linear(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&,               \
                               const TensorPtr<T>&);                                             \
  template TensorPtr<T> add(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&);                 \
  template TensorPtr<T> multiply(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&);            \
  template TensorPtr<T> one_minus(Tape<T>&, const TensorPtr<T>&);                                \
  template TensorPtr<T> concat_channels(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&);     \
  template TensorPtr<T> stack(Tape<T>&, std::span<const TensorPtr<T>>);                          \
  template TensorPtr<T> flatten(Tape<T>&, const TensorPtr<T>&);                                  \
  template TensorPtr<T> sum(Tape<T>&, const TensorPtr<T>&);                                      \
  template TensorPtr<T> dropout(Tape<T>&, const TensorPtr<T>&, double, bool, std::mt19937_64&);

CGVO_INSTANTIATE_OPS(float)
CGVO_INSTANTIATE_OPS(double)

#undef CGVO_INSTANTIATE_OPS

}  // namespace cgvo::nn
