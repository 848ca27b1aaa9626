#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace phonemt {

// Dense row-major array. Just enough structure for named parameters and
// activation buffers; the math lives in kernels.hpp.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), T(0));
  }
  Tensor(std::initializer_list<std::size_t> s) : Tensor(std::vector<std::size_t>(s)) {}

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
  }

  std::size_t numel() const { return data.size(); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  bool operator==(const Tensor&) const = default;
};

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

// Parameters (or their gradients / optimizer moments) as an ordered list of
// named arrays. Order is fixed at construction and shared between a model's
// parameters, gradients and moments, so index-wise iteration lines up.
template <typename T>
class ParameterStore {
 public:
  std::size_t add(const std::string& name, std::vector<std::size_t> shape) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    index_[name] = items_.size();
    items_.push_back({name, Tensor<T>(std::move(shape))});
    return items_.size() - 1;
  }

  Tensor<T>& operator[](std::size_t i) { return items_[i].tensor; }
  const Tensor<T>& operator[](std::size_t i) const { return items_[i].tensor; }

  Tensor<T>& at(const std::string& name) { return items_[index_at(name)].tensor; }
  const Tensor<T>& at(const std::string& name) const { return items_[index_at(name)].tensor; }

  std::size_t index_at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no such parameter: " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const std::string& name(std::size_t i) const { return items_[i].name; }
  std::size_t size() const { return items_.size(); }

  std::size_t total_scalars() const {
    std::size_t n = 0;
    for (const auto& item : items_) n += item.tensor.numel();
    return n;
  }

  // Same names and shapes, all zeros.
  ParameterStore zeros_like() const {
    ParameterStore out;
    for (const auto& item : items_) out.add(item.name, item.tensor.shape);
    return out;
  }

  void zero_all() {
    for (auto& item : items_) item.tensor.zero();
  }

  bool operator==(const ParameterStore& other) const {
    if (items_.size() != other.items_.size()) return false;
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i].name != other.items_[i].name ||
          items_[i].tensor != other.items_[i].tensor)
        return false;
    return true;
  }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<NamedTensor<T>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace phonemt
