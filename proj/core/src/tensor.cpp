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

#include "cgvo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cgvo/error.hpp"

namespace cgvo::nn {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {
void check_extents(const Shape& shape) {
  for (std::size_t d : shape)
    if (d == 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
}
}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  values_.assign(element_count(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  check_extents(shape_);
  if (values_.size() != element_count(shape_))
    throw ShapeError("value count " + std::to_string(values_.size()) + " does not match shape " +
                     to_string(shape_));
}

template <typename T>
std::span<T> Tensor<T>::grad() {
  if (grad_.empty()) grad_.assign(values_.size(), T(0));
  return grad_;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (grad_.empty())
    grad_.assign(values_.size(), T(0));
  else
    std::fill(grad_.begin(), grad_.end(), T(0));
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
  check_extents(shape);
  if (element_count(shape) != values_.size())
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  shape_ = std::move(shape);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  auto finite = [](T v) { return std::isfinite(v); };
  return std::all_of(values_.begin(), values_.end(), finite) &&
         std::all_of(grad_.begin(), grad_.end(), finite);
}

template <typename T>
void Tape<T>::record(TensorPtr<T> output, std::function<void()> backward) {
  if (!enabled_) return;
  output->set_requires_grad(true);
  entries_.push_back({std::move(output), std::move(backward)});
}

template <typename T>
void Tape<T>::backward(const TensorPtr<T>& loss) {
  if (!loss || loss->size() != 1)
    throw ContractError("backward: loss must be scalar-shaped, got " +
                        (loss ? to_string(loss->shape()) : std::string("null")));
  for (auto& e : entries_) e.output->zero_grad();
  loss->grad()[0] += T(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace cgvo::nn
