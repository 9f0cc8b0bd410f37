#include "tt/num/nn.hpp"

#include <cmath>

namespace tt::num {

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
  }
  return "identity";
}

template <typename T>
Var<T> activate(Var<T> x, Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return x;
    case Activation::kRelu:
      return relu(x);
    case Activation::kTanh:
      return tanh(x);
  }
  throw ConfigError("unknown activation");
}

template <typename T>
Var<T> mlp_forward(Tape<T>& tape, Var<T> x, std::span<const DenseLayer<T>> layers) {
  for (const DenseLayer<T>& l : layers) {
    x = activate(linear(x, tape.parameter(*l.weight), tape.parameter(*l.bias)),
                 l.activation);
  }
  return x;
}

template <typename T>
DenseLayer<T> make_dense(ParamSet<T>& params, const std::string& prefix, int in,
                         int out, Activation act, Rng& rng, double gain) {
  if (in <= 0 || out <= 0) {
    throw ConfigError("dense layer '" + prefix + "' needs positive sizes");
  }
  Tensor<T> w({in, out});
  if (gain != 0.0) {
    std::normal_distribution<double> n(0.0, gain / std::sqrt(static_cast<double>(in)));
    for (auto& v : w.values()) v = static_cast<T>(n(rng));
  }
  DenseLayer<T> l;
  l.weight = &params.add(prefix + ".w", std::move(w));
  l.bias = &params.add(prefix + ".b", Tensor<T>({out}));
  l.activation = act;
  return l;
}

template <typename T>
Mlp<T>::Mlp(ParamSet<T>& params, const std::string& prefix, int in,
            const std::vector<int>& hidden, int out, Activation hidden_act,
            Activation out_act, Rng& rng, double out_gain)
    : in_(in), out_(out) {
  int fan_in = in;
  const double hidden_gain = hidden_act == Activation::kRelu ? std::sqrt(2.0) : 1.0;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layers_.push_back(make_dense(params, prefix + ".l" + std::to_string(i), fan_in,
                                 hidden[i], hidden_act, rng, hidden_gain));
    fan_in = hidden[i];
  }
  layers_.push_back(make_dense(params, prefix + ".l" + std::to_string(hidden.size()),
                               fan_in, out, out_act, rng, out_gain));
}

template <typename T>
Var<T> Mlp<T>::forward(Tape<T>& tape, Var<T> x) const {
  if (x.cols() != in_) {
    throw DimensionError("mlp expects input width " + std::to_string(in_) + ", got " +
                         std::to_string(x.cols()));
  }
  return mlp_forward<T>(tape, x, layers_);
}

template <typename T>
std::size_t Mlp<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.weight->value.rows() + 1) * l.weight->value.cols();
  }
  return n;
}

template <typename T>
AttentionBlock<T> make_attention_block(ParamSet<T>& params, const std::string& prefix,
                                       int d_model, int n_heads, int ff_width,
                                       Activation ff_activation, Rng& rng) {
  if (n_heads <= 0 || d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) +
                      " is not divisible by heads " + std::to_string(n_heads));
  }
  if (ff_width <= 0) throw ConfigError("feed-forward width must be positive");
  AttentionBlock<T> b;
  b.d_model = d_model;
  b.n_heads = n_heads;
  b.ff_width = ff_width;
  b.ff_activation = ff_activation;
  auto normal = [&rng](int in, int out, double gain) {
    Tensor<T> w({in, out});
    std::normal_distribution<double> n(0.0, gain / std::sqrt(static_cast<double>(in)));
    for (auto& v : w.values()) v = static_cast<T>(n(rng));
    return w;
  };
  b.ln1_gain = &params.add(prefix + ".ln1.g", Tensor<T>({d_model}, T(1)));
  b.ln1_bias = &params.add(prefix + ".ln1.b", Tensor<T>({d_model}));
  b.wq = &params.add(prefix + ".attn.wq", normal(d_model, d_model, 1.0));
  b.wk = &params.add(prefix + ".attn.wk", normal(d_model, d_model, 1.0));
  b.wv = &params.add(prefix + ".attn.wv", normal(d_model, d_model, 1.0));
  b.wo = &params.add(prefix + ".attn.wo", normal(d_model, d_model, 0.5));
  b.bo = &params.add(prefix + ".attn.bo", Tensor<T>({d_model}));
  b.ln2_gain = &params.add(prefix + ".ln2.g", Tensor<T>({d_model}, T(1)));
  b.ln2_bias = &params.add(prefix + ".ln2.b", Tensor<T>({d_model}));
  b.w1 = &params.add(prefix + ".ff.w1", normal(d_model, ff_width, 1.0));
  b.b1 = &params.add(prefix + ".ff.b1", Tensor<T>({ff_width}));
  b.w2 = &params.add(prefix + ".ff.w2", normal(ff_width, d_model, 0.5));
  b.b2 = &params.add(prefix + ".ff.b2", Tensor<T>({d_model}));
  return b;
}

template <typename T>
Var<T> mha_forward(Tape<T>& tape, Var<T> tokens, const TokenMask& mask,
                   const AttentionBlock<T>& blk) {
  if (blk.n_heads <= 0 || blk.d_model % blk.n_heads != 0) {
    throw ConfigError("d_model not divisible by heads");
  }
  if (tokens.cols() != blk.d_model) {
    throw DimensionError("token width " + std::to_string(tokens.cols()) +
                         " does not match d_model " + std::to_string(blk.d_model));
  }
  auto p = [&tape](Parameter<T>* x) { return tape.parameter(*x); };
  Var<T> h = layer_norm(tokens, p(blk.ln1_gain), p(blk.ln1_bias));
  Var<T> q = matmul(h, p(blk.wq));
  Var<T> k = matmul(h, p(blk.wk));
  Var<T> v = matmul(h, p(blk.wv));
  Var<T> a = attention(q, k, v, mask, blk.n_heads);
  Var<T> x = add(tokens, linear(a, p(blk.wo), p(blk.bo)));
  Var<T> f = layer_norm(x, p(blk.ln2_gain), p(blk.ln2_bias));
  f = activate(linear(f, p(blk.w1), p(blk.b1)), blk.ff_activation);
  f = linear(f, p(blk.w2), p(blk.b2));
  return add(x, f);
}

#define TT_INSTANTIATE_NN(T)                                                          \
  template Var<T> activate(Var<T>, Activation);                                       \
  template Var<T> mlp_forward(Tape<T>&, Var<T>, std::span<const DenseLayer<T>>);      \
  template DenseLayer<T> make_dense(ParamSet<T>&, const std::string&, int, int,       \
                                    Activation, Rng&, double);                        \
  template class Mlp<T>;                                                              \
  template AttentionBlock<T> make_attention_block(ParamSet<T>&, const std::string&,   \
                                                  int, int, int, Activation, Rng&);   \
  template Var<T> mha_forward(Tape<T>&, Var<T>, const TokenMask&, const AttentionBlock<T>&);

TT_INSTANTIATE_NN(float)
TT_INSTANTIATE_NN(double)

#undef TT_INSTANTIATE_NN

}  // namespace tt::num
