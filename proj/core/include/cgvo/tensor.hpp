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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <new>
#include <vector>

namespace cgvo::nn {

using Shape = std::vector<std::size_t>;

// Packet-aligned storage. Vectorized kernels peel a head that depends on the
// address, so a fixed alignment keeps results bitwise reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major array with an optional gradient slot. Layout for feature
// maps is channels x height x width.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return values_.size(); }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool has_grad() const { return !grad_.empty(); }
  // Allocates a zero gradient if none exists.
  std::span<T> grad();
  std::span<const T> grad() const { return grad_; }
  void zero_grad();
  void drop_grad() { grad_.clear(); grad_.shrink_to_fit(); }

  // Same values, new shape with identical element count.
  void reshape(Shape shape);

  bool all_finite() const;

 private:
  Shape shape_;
  AlignedVector<T> values_;
  AlignedVector<T> grad_;
  bool requires_grad_ = false;
};

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <typename T>
TensorPtr<T> make_tensor(Shape shape, T fill = T(0)) {
  return std::make_shared<Tensor<T>>(std::move(shape), fill);
}

template <typename T>
TensorPtr<T> make_tensor(Shape shape, std::vector<T> values) {
  return std::make_shared<Tensor<T>>(std::move(shape), std::move(values));
}

template <typename T>
TensorPtr<T> make_parameter(Shape shape) {
  auto t = std::make_shared<Tensor<T>>(std::move(shape));
  t->set_requires_grad(true);
  return t;
}

// Reverse-mode record. Operators append one entry per executed op whose
// inputs require gradients; backward() replays entries in reverse order.
// A tape is single-threaded state; use one tape per thread.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Disabled tapes record nothing (inference mode).
  bool enabled() const { return enabled_; }
  void set_enabled(bool on) { enabled_ = on; }

  void record(TensorPtr<T> output, std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1, resets intermediate gradients and
  // propagates. Leaf gradients (parameters) accumulate across calls.
  // Throws ContractError if loss is not scalar-shaped.
  void backward(const TensorPtr<T>& loss);

  void clear() { entries_.clear(); }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    TensorPtr<T> output;
    std::function<void()> backward;
  };
  std::vector<Entry> entries_;
  bool enabled_ = true;
};

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace cgvo::nn
