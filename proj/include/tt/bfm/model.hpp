#ifndef TT_BFM_MODEL_HPP_
#define TT_BFM_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "tt/bfm/config.hpp"
#include "tt/num/gaussian.hpp"
#include "tt/num/nn.hpp"
#include "tt/num/ops.hpp"

namespace tt::bfm {

inline constexpr int kStateDim = 13;

// Token-conditioned behavior model: per-modality encoders, attention trunk
// without positional encoding, mean pooling and a Gaussian action head with
// a state-independent log-std.
//
// Parameter names: state.*, pose.*, pose.k_offset, trunk.<i>.*, head.*,
// log_std.
template <typename T>
class Bfm {
 public:
  explicit Bfm(const BfmConfig& cfg, std::uint64_t seed = 0);
  Bfm(Bfm&&) noexcept = default;
  Bfm& operator=(Bfm&&) noexcept = default;

  // Independent copy with the same values and trainable flags.
  Bfm clone() const;

  const BfmConfig& config() const { return cfg_; }
  num::ParamSet<T>& params() { return params_; }
  const num::ParamSet<T>& params() const { return params_; }

  // [B x 13] -> [B x d_model]. DimensionError on width mismatch.
  num::Var<T> encode_state(num::Tape<T>& tape, const num::Tensor<T>& proprio);
  // [B x 9] pose features plus per-row lookahead index -> [B x d_model].
  num::Var<T> encode_pose(num::Tape<T>& tape, const num::Tensor<T>& features,
                          const std::vector<int>& k_index);
  // Slot j holds token j of every sample ([B x d_model] each). Absent tokens
  // are excluded from attention and pooling. ContractError if a sample has
  // no token.
  num::GaussianDist<T> trunk(num::Tape<T>& tape, const std::vector<num::Var<T>>& slots,
                             const num::TokenMask& mask);

 private:
  BfmConfig cfg_;
  num::ParamSet<T> params_;
  num::Mlp<T> state_encoder_;
  num::Mlp<T> pose_encoder_;
  num::Parameter<T>* k_offset_ = nullptr;
  std::vector<num::AttentionBlock<T>> blocks_;
  num::DenseLayer<T> head_;
  num::Parameter<T>* log_std_ = nullptr;
};

// Packs equally sized rows into a [rows x width] tensor.
template <typename T, typename Row>
num::Tensor<T> pack_rows(std::span<const Row> rows, int width) {
  num::Tensor<T> out({static_cast<int>(rows.size()), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != width) {
      throw DimensionError("pack_rows: row " + std::to_string(r) + " has width " +
                           std::to_string(rows[r].size()) + ", expected " +
                           std::to_string(width));
    }
    for (int c = 0; c < width; ++c) out[r * width + c] = static_cast<T>(rows[r][c]);
  }
  return out;
}

}  // namespace tt::bfm

#endif  // TT_BFM_MODEL_HPP_
