#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace hypervae::nn {

// Batches are stored row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

// Mutable views over every trainable tensor of a model, in a fixed order.
using ParameterList = std::vector<std::span<double>>;
using ConstParameterList = std::vector<std::span<const double>>;

template <typename Derived>
std::span<double> view(Eigen::PlainObjectBase<Derived>& tensor) {
  return {tensor.data(), static_cast<std::size_t>(tensor.size())};
}

template <typename Derived>
std::span<const double> view(const Eigen::PlainObjectBase<Derived>& tensor) {
  return {tensor.data(), static_cast<std::size_t>(tensor.size())};
}

inline ConstParameterList as_const(const ParameterList& list) {
  return {list.begin(), list.end()};
}

bool all_finite(const Matrix& m);

}  // namespace hypervae::nn
