#include "tt/num/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace tt::num {

template <typename T>
GaussianDist<T> make_gaussian(Var<T> mean, Var<T> raw_log_std) {
  if (raw_log_std.value().size() != static_cast<std::size_t>(mean.cols())) {
    throw DimensionError("log_std length does not match action dimension");
  }
  Var<T> ls = raw_log_std;
  if (ls.value().rank() != 2) {
    // Present the shared log-std as a 1 x A row.
    const int ia = ls.id;
    Tensor<T> row({1, static_cast<int>(ls.value().size())}, ls.value().storage());
    ls = ls.tape->record(std::move(row), {ls}, [ia](Tape<T>& tp, int self) {
      Tensor<T>* g = tp.grad(ia);
      if (g == nullptr) return;
      const Tensor<T>& go = *tp.grad(self);
      for (std::size_t i = 0; i < go.size(); ++i) (*g)[i] += go[i];
    });
  }
  return GaussianDist<T>{mean, clamp(ls, static_cast<T>(kLogStdMin),
                                     static_cast<T>(kLogStdMax))};
}

template <typename T>
Var<T> gaussian_log_prob(const GaussianDist<T>& dist, Var<T> action) {
  const Tensor<T>& mu = dist.mean.value();
  const Tensor<T>& ls = dist.log_std.value();
  const Tensor<T>& a = action.value();
  if (!a.same_shape(mu)) {
    throw DimensionError("action shape does not match distribution mean");
  }
  const int B = mu.rows();
  const int A = mu.cols();
  const T half_log_2pi = static_cast<T>(0.5 * std::log(2.0 * std::numbers::pi));
  Tensor<T> out({B, 1});
  std::vector<T> inv_var(static_cast<std::size_t>(A));
  T log_norm = T(0);
  for (int j = 0; j < A; ++j) {
    inv_var[static_cast<std::size_t>(j)] = std::exp(T(-2) * ls[static_cast<std::size_t>(j)]);
    log_norm += ls[static_cast<std::size_t>(j)] + half_log_2pi;
  }
  for (int b = 0; b < B; ++b) {
    T s = T(0);
    for (int j = 0; j < A; ++j) {
      const T z = a.at(b, j) - mu.at(b, j);
      s += z * z * inv_var[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(b)] = T(-0.5) * s - log_norm;
  }
  const int im = dist.mean.id, il = dist.log_std.id, ia = action.id;
  return dist.mean.tape->record(
      std::move(out), {dist.mean, dist.log_std, action},
      [im, il, ia, inv_var](Tape<T>& tp, int self) {
        const Tensor<T>& g = *tp.grad(self);
        const Tensor<T>& mu = tp.value(im);
        const Tensor<T>& a = tp.value(ia);
        Tensor<T>* gm = tp.grad(im);
        Tensor<T>* gl = tp.grad(il);
        Tensor<T>* ga = tp.grad(ia);
        const int B = mu.rows();
        const int A = mu.cols();
        for (int b = 0; b < B; ++b) {
          const T gb = g[static_cast<std::size_t>(b)];
          for (int j = 0; j < A; ++j) {
            const T iv = inv_var[static_cast<std::size_t>(j)];
            const T z = a.at(b, j) - mu.at(b, j);
            if (gm) gm->at(b, j) += gb * z * iv;
            if (ga) ga->at(b, j) -= gb * z * iv;
            if (gl) (*gl)[static_cast<std::size_t>(j)] += gb * (z * z * iv - T(1));
          }
        }
      });
}

template <typename T>
Var<T> gaussian_entropy(const GaussianDist<T>& dist) {
  const T c = static_cast<T>(0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e));
  return add_scalar(sum(dist.log_std), c * static_cast<T>(dist.action_dim()));
}

template <typename T>
Tensor<T> gaussian_sample(const GaussianDist<T>& dist, Rng& rng) {
  const Tensor<T>& mu = dist.mean.value();
  const Tensor<T>& ls = dist.log_std.value();
  Tensor<T> out({mu.rows(), mu.cols()});
  std::normal_distribution<double> n(0.0, 1.0);
  for (int b = 0; b < mu.rows(); ++b) {
    for (int j = 0; j < mu.cols(); ++j) {
      out.at(b, j) = mu.at(b, j) +
                     static_cast<T>(std::exp(static_cast<double>(ls[static_cast<std::size_t>(j)])) * n(rng));
    }
  }
  return out;
}

#define TT_INSTANTIATE_GAUSSIAN(T)                                        \
  template GaussianDist<T> make_gaussian(Var<T>, Var<T>);                 \
  template Var<T> gaussian_log_prob(const GaussianDist<T>&, Var<T>);      \
  template Var<T> gaussian_entropy(const GaussianDist<T>&);               \
  template Tensor<T> gaussian_sample(const GaussianDist<T>&, Rng&);

TT_INSTANTIATE_GAUSSIAN(float)
TT_INSTANTIATE_GAUSSIAN(double)

#undef TT_INSTANTIATE_GAUSSIAN

}  // namespace tt::num
