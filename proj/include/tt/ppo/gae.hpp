#ifndef TT_PPO_GAE_HPP_
#define TT_PPO_GAE_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace tt::ppo {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values[:-1]
};

// One env stream of length n: values has n + 1 entries (the last one is the
// bootstrap). done_t cuts both the bootstrap and the advantage carry:
//   delta_t = r_t + gamma (1 - done_t) V_{t+1} - V_t
//   A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
// ContractError on length mismatch.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma, double lambda);

// (x - mean) / (std + eps) with the population std.
std::vector<double> normalize_advantages(std::span<const double> adv, double eps = 1e-8);

}  // namespace tt::ppo

#endif  // TT_PPO_GAE_HPP_
