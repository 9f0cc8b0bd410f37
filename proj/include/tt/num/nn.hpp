#ifndef TT_NUM_NN_HPP_
#define TT_NUM_NN_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tt/num/ops.hpp"

namespace tt::num {

enum class Activation { kIdentity, kRelu, kTanh };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation a);

template <typename T>
Var<T> activate(Var<T> x, Activation a);

// One affine layer followed by an activation.
template <typename T>
struct DenseLayer {
  Parameter<T>* weight = nullptr;  // [in x out]
  Parameter<T>* bias = nullptr;    // [out]
  Activation activation = Activation::kIdentity;
};

template <typename T>
Var<T> mlp_forward(Tape<T>& tape, Var<T> x, std::span<const DenseLayer<T>> layers);

// Adds a dense layer named `<prefix>.w` / `<prefix>.b`. Weights are drawn
// from N(0, gain^2 / fan_in); biases start at zero.
template <typename T>
DenseLayer<T> make_dense(ParamSet<T>& params, const std::string& prefix, int in,
                         int out, Activation act, Rng& rng, double gain = 1.0);

template <typename T>
class Mlp {
 public:
  Mlp() = default;
  // in -> hidden... -> out. `out_gain` == 0 zero-initializes the last layer.
  Mlp(ParamSet<T>& params, const std::string& prefix, int in,
      const std::vector<int>& hidden, int out, Activation hidden_act,
      Activation out_act, Rng& rng, double out_gain = 1.0);

  Var<T> forward(Tape<T>& tape, Var<T> x) const;

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  const std::vector<DenseLayer<T>>& layers() const { return layers_; }
  // Sum over layers of (fan_in + 1) * fan_out.
  std::size_t parameter_count() const;

 private:
  int in_ = 0;
  int out_ = 0;
  std::vector<DenseLayer<T>> layers_;
};

// Pre-norm transformer block: x + Wo*attn(LN1(x)), then h + FF(LN2(h)).
template <typename T>
struct AttentionBlock {
  int d_model = 0;
  int n_heads = 1;
  int ff_width = 0;
  Activation ff_activation = Activation::kTanh;
  Parameter<T>* ln1_gain = nullptr;
  Parameter<T>* ln1_bias = nullptr;
  Parameter<T>* wq = nullptr;
  Parameter<T>* wk = nullptr;
  Parameter<T>* wv = nullptr;
  Parameter<T>* wo = nullptr;
  Parameter<T>* bo = nullptr;
  Parameter<T>* ln2_gain = nullptr;
  Parameter<T>* ln2_bias = nullptr;
  Parameter<T>* w1 = nullptr;
  Parameter<T>* b1 = nullptr;
  Parameter<T>* w2 = nullptr;
  Parameter<T>* b2 = nullptr;
};

template <typename T>
AttentionBlock<T> make_attention_block(ParamSet<T>& params, const std::string& prefix,
                                       int d_model, int n_heads, int ff_width,
                                       Activation ff_activation, Rng& rng);

// tokens: [B*T x d_model] with rows grouped per sample. No positional
// information is added and attention is bidirectional.
template <typename T>
Var<T> mha_forward(Tape<T>& tape, Var<T> tokens, const TokenMask& mask,
                   const AttentionBlock<T>& block);

}  // namespace tt::num

#endif  // TT_NUM_NN_HPP_
