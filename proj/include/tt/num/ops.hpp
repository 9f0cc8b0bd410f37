#ifndef TT_NUM_OPS_HPP_
#define TT_NUM_OPS_HPP_

#include <cstdint>
#include <vector>

#include "tt/num/tape.hpp"

namespace tt::num {

// Presence mask of a batch of token sequences: present[b * tokens + t].
struct TokenMask {
  int batch = 0;
  int tokens = 0;
  std::vector<std::uint8_t> present;

  static TokenMask all(int batch, int tokens) {
    return TokenMask{batch, tokens,
                     std::vector<std::uint8_t>(
                         static_cast<std::size_t>(batch) * tokens, 1)};
  }
  bool at(int b, int t) const {
    return present[static_cast<std::size_t>(b) * tokens + t] != 0;
  }
  int count(int b) const {
    int n = 0;
    for (int t = 0; t < tokens; ++t) n += at(b, t) ? 1 : 0;
    return n;
  }
};

// All ops take and return rank <= 2 values viewed as rows x cols.

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
// x[B x in] * w[in x out] + b[out], broadcast over rows.
template <typename T> Var<T> linear(Var<T> x, Var<T> w, Var<T> b);

template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);
// a[B x n] + row[1 x n].
template <typename T> Var<T> add_row(Var<T> a, Var<T> row);
template <typename T> Var<T> scale(Var<T> a, T s);
template <typename T> Var<T> add_scalar(Var<T> a, T s);

template <typename T> Var<T> relu(Var<T> a);
template <typename T> Var<T> tanh(Var<T> a);
template <typename T> Var<T> exp(Var<T> a);
template <typename T> Var<T> square(Var<T> a);
// Gradient passes where lo <= a <= hi.
template <typename T> Var<T> clamp(Var<T> a, T lo, T hi);
// Elementwise min; ties route the gradient to `a`.
template <typename T> Var<T> minimum(Var<T> a, Var<T> b);

template <typename T> Var<T> sum(Var<T> a);
template <typename T> Var<T> mean(Var<T> a);
// Per-row sum: [B x n] -> [B x 1].
template <typename T> Var<T> row_sum(Var<T> a);

template <typename T> Var<T> concat_cols(const std::vector<Var<T>>& parts);
template <typename T> Var<T> slice_cols(Var<T> a, int start, int count);
// table[K x d] gathered by row index -> [B x d].
template <typename T> Var<T> gather_rows(Var<T> table, const std::vector<int>& index);

// Row-wise layer normalization with learned gain and bias (both [d]).
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

// slots[t] is [B x d]; output row b * T + t holds slots[t] row b.
template <typename T> Var<T> interleave_tokens(const std::vector<Var<T>>& slots);

// Scaled dot-product attention over each sample's token group, heads split
// along columns. q, k, v are [B*T x d]. Absent keys get zero weight; every
// sample needs at least one present token.
template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, const TokenMask& mask,
                 int n_heads);

// Mean of the present tokens of each sample: [B*T x d] -> [B x d]. Tokens are
// summed in index order.
template <typename T>
Var<T> masked_mean_pool(Var<T> x, const TokenMask& mask);

// Mean squared error against a constant target, as a 1 x 1 value.
template <typename T> Var<T> mse(Var<T> a, const Tensor<T>& target);

}  // namespace tt::num

#endif  // TT_NUM_OPS_HPP_
