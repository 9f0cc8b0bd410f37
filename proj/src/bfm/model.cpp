#include "tt/bfm/model.hpp"

namespace tt::bfm {

using num::Tensor;
using num::Var;

template <typename T>
Bfm<T>::Bfm(const BfmConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  num::Rng rng(seed);
  const int d = cfg_.d_model;
  state_encoder_ = num::Mlp<T>(params_, "state", kStateDim, cfg_.state_hidden, d,
                               cfg_.activation, num::Activation::kIdentity, rng);
  pose_encoder_ = num::Mlp<T>(params_, "pose", kPoseFeatureDim, cfg_.pose_hidden, d,
                              cfg_.activation, num::Activation::kIdentity, rng);
  {
    Tensor<T> offsets({static_cast<int>(kLookaheads.size()), d});
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto& v : offsets.values()) v = static_cast<T>(n(rng));
    k_offset_ = &params_.add("pose.k_offset", std::move(offsets));
  }
  for (int i = 0; i < cfg_.layers; ++i) {
    blocks_.push_back(num::make_attention_block<T>(params_, "trunk." + std::to_string(i), d,
                                                   cfg_.heads, cfg_.ff_width,
                                                   cfg_.activation, rng));
  }
  head_ = num::make_dense<T>(params_, "head", d, cfg_.action_dim, num::Activation::kIdentity,
                             rng, 0.1);
  log_std_ = &params_.add("log_std",
                          Tensor<T>({cfg_.action_dim}, static_cast<T>(cfg_.log_std_init)));
}

template <typename T>
Var<T> Bfm<T>::encode_state(num::Tape<T>& tape, const Tensor<T>& proprio) {
  if (proprio.cols() != kStateDim) {
    throw DimensionError("encode_state: expected " + std::to_string(kStateDim) +
                         " proprio features, got " + std::to_string(proprio.cols()));
  }
  return state_encoder_.forward(tape, tape.constant(proprio));
}

template <typename T>
Var<T> Bfm<T>::encode_pose(num::Tape<T>& tape, const Tensor<T>& features,
                           const std::vector<int>& k_index) {
  if (features.cols() != kPoseFeatureDim) {
    throw DimensionError("encode_pose: expected " + std::to_string(kPoseFeatureDim) +
                         " pose features, got " + std::to_string(features.cols()));
  }
  if (static_cast<int>(k_index.size()) != features.rows()) {
    throw DimensionError("encode_pose: one lookahead index per row required");
  }
  const Var<T> body = pose_encoder_.forward(tape, tape.constant(features));
  return num::add(body, num::gather_rows(tape.parameter(*k_offset_), k_index));
}

template <typename T>
num::GaussianDist<T> Bfm<T>::trunk(num::Tape<T>& tape, const std::vector<Var<T>>& slots,
                                   const num::TokenMask& mask) {
  if (slots.empty() || static_cast<int>(slots.size()) != mask.tokens) {
    throw ContractError("trunk: slot count does not match the token mask");
  }
  for (int b = 0; b < mask.batch; ++b) {
    if (mask.count(b) == 0) {
      throw ContractError("trunk: sample " + std::to_string(b) + " has no tokens");
    }
  }
  Var<T> x = slots.size() == 1 ? slots[0] : num::interleave_tokens(slots);
  for (const auto& block : blocks_) x = num::mha_forward(tape, x, mask, block);
  const Var<T> pooled = num::masked_mean_pool(x, mask);
  const std::vector<num::DenseLayer<T>> head{head_};
  const Var<T> mean = num::mlp_forward<T>(tape, pooled, head);
  return num::make_gaussian(mean, tape.parameter(*log_std_));
}

template <typename T>
Bfm<T> Bfm<T>::clone() const {
  Bfm<T> out(cfg_);
  num::copy_values(out.params_, params_);
  for (auto& p : out.params_) p.trainable = params_.find(p.name)->trainable;
  return out;
}

template class Bfm<float>;
template class Bfm<double>;

}  // namespace tt::bfm
