#ifndef TT_NUM_FINITE_DIFF_HPP_
#define TT_NUM_FINITE_DIFF_HPP_

#include <functional>
#include <string>
#include <vector>

#include "tt/num/tape.hpp"

namespace tt::num {

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares backward() against central differences
//   (f(theta + eps e_i) - f(theta - eps e_i)) / (2 eps)
// for every scalar of `params`. `loss` must build a scalar on the tape it is
// given and be deterministic. The relative error of one entry is
// |a - n| / max(|a|, |n|, abs_floor).
template <typename T>
FiniteDiffReport finite_diff_check(const std::function<Var<T>(Tape<T>&)>& loss,
                                   const std::vector<Parameter<T>*>& params, double eps,
                                   double abs_floor = 1e-6);

}  // namespace tt::num

#endif  // TT_NUM_FINITE_DIFF_HPP_
