#include "tt/num/finite_diff.hpp"

#include <algorithm>
#include <cmath>

namespace tt::num {
namespace {

template <typename T>
double evaluate(const std::function<Var<T>(Tape<T>&)>& loss) {
  Tape<T> tape(GradMode::kNone);
  Var<T> out = loss(tape);
  if (out.value().size() != 1) {
    throw ContractError("finite_diff_check: loss is not a scalar");
  }
  return static_cast<double>(out.value()[0]);
}

}  // namespace

template <typename T>
FiniteDiffReport finite_diff_check(const std::function<Var<T>(Tape<T>&)>& loss,
                                   const std::vector<Parameter<T>*>& params, double eps,
                                   double abs_floor) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_check: eps must be positive");
  const double f0 = evaluate(loss);
  if (evaluate(loss) != f0) {
    throw ContractError("finite_diff_check: loss is not deterministic");
  }

  for (Parameter<T>* p : params) p->zero_grad();
  {
    Tape<T> tape(GradMode::kAllParameters);
    tape.backward(loss(tape));
  }

  FiniteDiffReport report;
  for (Parameter<T>* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const T saved = p->value[i];
      p->value[i] = static_cast<T>(saved + eps);
      const double up = evaluate(loss);
      p->value[i] = static_cast<T>(saved - eps);
      const double down = evaluate(loss);
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = static_cast<double>(p->grad[i]);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (report.checked == 1 || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_parameter = p->name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

template FiniteDiffReport finite_diff_check(const std::function<Var<float>(Tape<float>&)>&,
                                            const std::vector<Parameter<float>*>&, double,
                                            double);
template FiniteDiffReport finite_diff_check(const std::function<Var<double>(Tape<double>&)>&,
                                            const std::vector<Parameter<double>*>&, double,
                                            double);

}  // namespace tt::num
