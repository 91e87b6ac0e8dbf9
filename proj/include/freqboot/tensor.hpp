#pragma once

#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

namespace freqboot {

/// Dense row-major tensor of rank 1..3. Storage is contiguous; layout for
/// rank-3 [B, C, T] is ((b * C) + c) * T + t.
template <class S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
    v_.assign(static_cast<std::size_t>(numel(shape_)), S(0));
  }

  Tensor(std::initializer_list<long> shape) : Tensor(std::vector<long>(shape)) {}

  static long numel(const std::vector<long>& shape) {
    long n = 1;
    for (long d : shape) {
      assert(d >= 0);
      n *= d;
    }
    return n;
  }

  const std::vector<long>& shape() const { return shape_; }
  long rank() const { return static_cast<long>(shape_.size()); }
  long dim(std::size_t i) const { return shape_.at(i); }
  long size() const { return static_cast<long>(v_.size()); }
  bool empty() const { return v_.empty(); }

  S* data() { return v_.data(); }
  const S* data() const { return v_.data(); }

  S& operator[](long i) { return v_[static_cast<std::size_t>(i)]; }
  const S& operator[](long i) const { return v_[static_cast<std::size_t>(i)]; }

  S& at2(long i, long j) { return v_[static_cast<std::size_t>(i * shape_[1] + j)]; }
  const S& at2(long i, long j) const { return v_[static_cast<std::size_t>(i * shape_[1] + j)]; }

  S& at3(long b, long c, long t) {
    return v_[static_cast<std::size_t>((b * shape_[1] + c) * shape_[2] + t)];
  }
  const S& at3(long b, long c, long t) const {
    return v_[static_cast<std::size_t>((b * shape_[1] + c) * shape_[2] + t)];
  }

  void fill(S value) { std::fill(v_.begin(), v_.end(), value); }
  void zero() { fill(S(0)); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  /// Reinterpret as a different shape with the same element count.
  Tensor reshaped(std::vector<long> shape) const {
    assert(numel(shape) == size());
    Tensor out;
    out.shape_ = std::move(shape);
    out.v_ = v_;
    return out;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  template <class S2>
  Tensor<S2> cast() const {
    Tensor<S2> out(shape_);
    for (long i = 0; i < size(); ++i) out[i] = static_cast<S2>(v_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  template <class S2>
  friend class Tensor;

  std::vector<long> shape_;
  std::vector<S> v_;
};

}  // namespace freqboot
