#ifndef TT_NUM_PARAMETER_HPP_
#define TT_NUM_PARAMETER_HPP_

#include <cstddef>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "tt/num/tensor.hpp"

namespace tt::num {

// A named learned tensor. `trainable` is only consulted by optimizers: the
// tape still differentiates through (and into) frozen parameters.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;

  void zero_grad() {
    if (!grad.same_shape(value)) {
      grad = Tensor<T>(value.shape());
    } else {
      grad.fill(T(0));
    }
  }
};

// Owning, insertion-ordered collection of parameters. Element addresses are
// stable for the lifetime of the set (including across moves), so models keep
// raw Parameter pointers into it.
template <typename T>
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet&) = delete;
  ParamSet& operator=(const ParamSet&) = delete;
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  Parameter<T>& add(const std::string& name, Tensor<T> value) {
    if (index_.count(name)) {
      throw ConfigError("duplicate parameter name '" + name + "'");
    }
    index_[name] = items_.size();
    Parameter<T>& p = items_.emplace_back();
    p.name = name;
    p.grad = Tensor<T>(value.shape());
    p.value = std::move(value);
    return p;
  }

  std::size_t size() const { return items_.size(); }

  Parameter<T>& operator[](std::size_t i) { return items_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return items_[i]; }

  Parameter<T>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second];
  }
  const Parameter<T>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second];
  }

  std::vector<Parameter<T>*> pointers() {
    std::vector<Parameter<T>*> out;
    out.reserve(items_.size());
    for (auto& p : items_) out.push_back(&p);
    return out;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p.value.size();
    return n;
  }

  void set_trainable(bool trainable) {
    for (auto& p : items_) p.trainable = trainable;
  }

  void zero_grad() {
    for (auto& p : items_) p.zero_grad();
  }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::deque<Parameter<T>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Copies values by name from `src` into `dst` (precision conversion allowed).
// Every parameter of `dst` must exist in `src` with the same shape.
template <typename To, typename From>
void copy_values(ParamSet<To>& dst, const ParamSet<From>& src) {
  for (auto& p : dst) {
    const Parameter<From>* s = src.find(p.name);
    if (s == nullptr) {
      throw ShapeMismatchError("missing parameter '" + p.name + "'");
    }
    if (s->value.shape() != p.value.shape()) {
      throw ShapeMismatchError("shape mismatch for '" + p.name + "': " +
                               s->value.shape_string() + " vs " +
                               p.value.shape_string());
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      p.value[i] = static_cast<To>(s->value[i]);
    }
  }
}

}  // namespace tt::num

#endif  // TT_NUM_PARAMETER_HPP_
