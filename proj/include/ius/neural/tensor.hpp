#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ius/error.hpp"

namespace ius::neural {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Eigen picks its vectorized reduction path from the runtime address, so
// storage that is only malloc-aligned makes float sums depend on where the
// heap put them. Aligned storage keeps training bit-reproducible.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

// Named, shaped, row-major parameter array.
template <typename T>
struct ParamTensor {
  std::vector<int> shape;
  AlignedVector<T> data;

  ParamTensor() = default;
  explicit ParamTensor(std::vector<int> s) : shape(std::move(s)), data(element_count(shape), T(0)) {}

  static std::size_t element_count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t size() const noexcept { return data.size(); }
  std::span<T> span() noexcept { return data; }
  std::span<const T> span() const noexcept { return data; }

  // View as (shape[0]) x (product of the rest), row-major.
  Eigen::Map<RowMatrix<T>> as_matrix() {
    const int rows = shape.empty() ? 1 : shape[0];
    return {data.data(), rows, static_cast<Eigen::Index>(data.size() / rows)};
  }
  Eigen::Map<const RowMatrix<T>> as_matrix() const {
    const int rows = shape.empty() ? 1 : shape[0];
    return {data.data(), rows, static_cast<Eigen::Index>(data.size() / rows)};
  }
  Eigen::Map<Vector<T>> as_vector() { return {data.data(), static_cast<Eigen::Index>(data.size())}; }
  Eigen::Map<const Vector<T>> as_vector() const {
    return {data.data(), static_cast<Eigen::Index>(data.size())};
  }

  template <typename U>
  ParamTensor<U> cast() const {
    ParamTensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

// Visitor signature used to walk every parameter array of a model:
//   void(const std::string& name, std::span<T> values)
template <typename T>
using TensorVisitor = std::function<void(const std::string&, std::span<T>)>;

template <typename T>
bool all_finite(std::span<const T> values) {
  for (T v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace ius::neural
