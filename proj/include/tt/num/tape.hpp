#ifndef TT_NUM_TAPE_HPP_
#define TT_NUM_TAPE_HPP_

#include <deque>
#include <functional>
#include <initializer_list>

#include "tt/num/parameter.hpp"
#include "tt/num/tensor.hpp"

namespace tt::num {

template <typename T>
class Tape;

// Handle to a value recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Tensor<T>& value() const { return tape->value(id); }
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
};

enum class GradMode {
  // Gradients reach every parameter, frozen or not.
  kAllParameters,
  // Frozen parameters are treated as constants. Gradients still flow
  // *through* ops that consume them, only their own grad is skipped.
  kTrainableOnly,
  // Forward only; nothing is recorded for backward.
  kNone,
};

// Reverse-mode recording of forward ops. Nodes are appended in evaluation
// order, so the node index is a topological order and backward simply walks
// it in reverse.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(GradMode mode = GradMode::kAllParameters) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  GradMode mode() const { return mode_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  Var<T> constant(Tensor<T> value);
  Var<T> parameter(Parameter<T>& p);

  // Appends an op result. The node requires grad iff any input does; the
  // backward closure is dropped otherwise. Non-finite values throw.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                Backward backward);
  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs,
                Backward backward);

  const Tensor<T>& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref != nullptr ? *n.ref : n.value;
  }
  bool requires_grad(Var<T> v) const {
    return nodes_[static_cast<std::size_t>(v.id)].requires_grad;
  }
  bool requires_grad(int id) const {
    return nodes_[static_cast<std::size_t>(id)].requires_grad;
  }

  // Gradient buffer of a node, allocated (zeroed) on first use. Returns
  // nullptr for nodes that do not require grad.
  Tensor<T>* grad(int id);
  const Tensor<T>& grad_of(int id) const {
    return nodes_[static_cast<std::size_t>(id)].grad;
  }

  // Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure once,
  // in reverse order. Parameter leaves add their gradient into
  // Parameter::grad (accumulating; callers zero grads between steps).
  void backward(Var<T> loss);

 private:
  struct Node {
    Tensor<T> value;
    const Tensor<T>* ref = nullptr;
    Tensor<T> grad;
    bool has_grad = false;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    Backward backward;
  };

  void check(Var<T> v) const;

  GradMode mode_;
  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace tt::num

#endif  // TT_NUM_TAPE_HPP_
