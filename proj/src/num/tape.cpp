#include "tt/num/tape.hpp"

#include <string>

namespace tt::num {

template <typename T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Tape<T>::parameter(Parameter<T>& p) {
  Node& n = nodes_.emplace_back();
  n.ref = &p.value;
  n.param = &p;
  switch (mode_) {
    case GradMode::kAllParameters:
      n.requires_grad = true;
      break;
    case GradMode::kTrainableOnly:
      n.requires_grad = p.trainable;
      break;
    case GradMode::kNone:
      n.requires_grad = false;
      break;
  }
  return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
void Tape<T>::check(Var<T> v) const {
  if (v.tape != this || v.id < 0 ||
      static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw ContractError("variable does not belong to this tape");
  }
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                       Backward backward) {
  return record(std::move(value), std::vector<Var<T>>(inputs),
                std::move(backward));
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, const std::vector<Var<T>>& inputs,
                       Backward backward) {
  bool needs = false;
  for (const Var<T>& in : inputs) {
    check(in);
    needs = needs || nodes_[static_cast<std::size_t>(in.id)].requires_grad;
  }
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by op with output shape " +
                       value.shape_string());
  }
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.requires_grad = needs && mode_ != GradMode::kNone;
  if (n.requires_grad) n.backward = std::move(backward);
  return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Tensor<T>* Tape<T>::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor<T>(value(id).shape());
    n.has_grad = true;
  }
  return &n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  check(loss);
  if (value(loss.id).size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        value(loss.id).shape_string());
  }
  if (backward_done_) {
    throw ContractError("backward already ran on this tape");
  }
  backward_done_ = true;
  Tensor<T>* seed = grad(loss.id);
  if (seed == nullptr) return;  // nothing upstream requires grad
  seed->fill(T(1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || !n.has_grad) continue;
    if (n.param != nullptr) {
      Parameter<T>& p = *n.param;
      if (!p.grad.same_shape(p.value)) p.grad = Tensor<T>(p.value.shape());
      for (std::size_t k = 0; k < p.grad.size(); ++k) p.grad[k] += n.grad[k];
    } else if (n.backward) {
      n.backward(*this, i);
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace tt::num
