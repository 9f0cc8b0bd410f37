#ifndef TT_BFM_CONFIG_HPP_
#define TT_BFM_CONFIG_HPP_

#include <array>
#include <string>
#include <vector>

#include "tt/num/nn.hpp"

namespace tt::bfm {

inline constexpr int kPoseFeatureDim = 9;
inline constexpr std::array<int, 3> kLookaheads{5, 15, 30};

// Index of k in kLookaheads; ConfigError if k is not one of them.
int lookahead_index(int k);

struct BfmConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int ff_width = 128;
  std::vector<int> state_hidden{64};
  std::vector<int> pose_hidden{64};
  num::Activation activation = num::Activation::kTanh;
  int action_dim = 5;
  double log_std_init = -1.0;

  // Goal masking during pretraining.
  int goal_slots = 2;
  double keep_prob = 0.7;
  double full_view_prob = 0.5;  // chance the first slot carries every component

  // ConfigError on d_model % heads != 0 or non-positive sizes.
  void validate() const;
  bool operator==(const BfmConfig&) const = default;
};

}  // namespace tt::bfm

#endif  // TT_BFM_CONFIG_HPP_
