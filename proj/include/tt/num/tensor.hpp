#ifndef TT_NUM_TENSOR_HPP_
#define TT_NUM_TENSOR_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tt/error.hpp"

namespace tt::num {

using Rng = std::mt19937_64;

// Cache-line aligned storage. Vectorized kernels pick their loop split from
// the address of the first element, so a fixed alignment keeps results
// bit-identical from run to run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using Storage = std::vector<T, AlignedAllocator<T>>;

// Independent generator for a named sub-stream of one experiment seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Dense row-major array. Rank 0, 1 and 2 are supported by the differentiable
// ops; a rank-1 tensor of length n behaves as a 1 x n row.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(std::vector<int> shape, T fill = T(0))
      : shape_(std::move(shape)) {
    data_.assign(checked_count(shape_), fill);
  }

  Tensor(std::vector<int> shape, std::span<const T> data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    if (checked_count(shape_) != data_.size()) {
      throw DimensionError("tensor data length " +
                           std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  Tensor(std::vector<int> shape, std::initializer_list<T> data)
      : Tensor(std::move(shape), std::span<const T>(data.begin(), data.size())) {}

  static Tensor zeros(int rows, int cols) { return Tensor({rows, cols}); }

  static Tensor from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    std::vector<T> data;
    data.reserve(static_cast<std::size_t>(r) * c);
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != c) {
        throw DimensionError("ragged rows in Tensor::from_rows");
      }
      data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, data);
  }

  static Tensor row(std::vector<T> values) {
    const int n = static_cast<int>(values.size());
    return Tensor({1, n}, values);
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int rows() const { return rank() == 2 ? shape_[0] : 1; }
  int cols() const {
    if (rank() == 2) return shape_[1];
    if (rank() == 1) return shape_[0];
    return 1;
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  Storage<T>& storage() { return data_; }
  const Storage<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  const T& at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // Same element count and same (rows, cols) view.
  bool same_shape(const Tensor& o) const {
    return rows() == o.rows() && cols() == o.cols() && size() == o.size();
  }

  bool all_finite() const {
    for (const T& v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    const std::vector<U> converted(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::span<const U>(converted));
  }

  std::string shape_string() const { return shape_string(shape_); }

  static std::string shape_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << "x";
      os << shape[i];
    }
    os << "]";
    return os.str();
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static std::size_t checked_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw DimensionError("negative dimension in " + shape_string(shape));
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::vector<int> shape_;
  Storage<T> data_;
};

}  // namespace tt::num

#endif  // TT_NUM_TENSOR_HPP_
