#include "tt/ppo/gae.hpp"

#include <cmath>
#include <string>

#include "tt/error.hpp"

namespace tt::ppo {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) {
    throw ContractError("compute_gae: " + std::to_string(n) + " rewards need " +
                        std::to_string(n + 1) + " values and " + std::to_string(n) +
                        " done flags, got " + std::to_string(values.size()) + " and " +
                        std::to_string(dones.size()));
  }
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * live * values[i + 1] - values[i];
    carry = delta + gamma * lambda * live * carry;
    out.advantages[i] = carry;
    out.returns[i] = carry + values[i];
  }
  return out;
}

std::vector<double> normalize_advantages(std::span<const double> adv, double eps) {
  if (adv.empty()) return {};
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(adv.size()));
  std::vector<double> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = (adv[i] - mean) / (sd + eps);
  return out;
}

}  // namespace tt::ppo
