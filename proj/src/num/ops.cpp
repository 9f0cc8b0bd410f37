#include "tt/num/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tt::num {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<RowMat<T>> map(Tensor<T>& t) {
  return Eigen::Map<RowMat<T>>(t.data(), t.rows(), t.cols());
}

template <typename T>
Eigen::Map<const RowMat<T>> cmap(const Tensor<T>& t) {
  return Eigen::Map<const RowMat<T>>(t.data(), t.rows(), t.cols());
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

template <typename T>
std::string dims(const Tensor<T>& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  require(a.same_shape(b), std::string(op) + ": shape mismatch " + dims(a) +
                               " vs " + dims(b));
}

// Elementwise unary op: `deriv(x, y)` gives dy/dx from input and output.
template <typename T, typename F, typename D>
Var<T> unary(Var<T> a, F f, D deriv) {
  const Tensor<T>& x = a.value();
  Tensor<T> out({x.rows(), x.cols()});
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  const int ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia, deriv](Tape<T>& tp, int self) {
    Tensor<T>* ga = tp.grad(ia);
    if (ga == nullptr) return;
    const Tensor<T>& g = *tp.grad(self);
    const Tensor<T>& x = tp.value(ia);
    const Tensor<T>& y = tp.value(self);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  require(A.cols() == B.rows(),
          "matmul: inner dimensions differ " + dims(A) + " * " + dims(B));
  Tensor<T> out({A.rows(), B.cols()});
  map(out).noalias() = cmap(A) * cmap(B);
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    if (Tensor<T>* ga = tp.grad(ia)) {
      map(*ga).noalias() += cmap(g) * cmap(tp.value(ib)).transpose();
    }
    if (Tensor<T>* gb = tp.grad(ib)) {
      map(*gb).noalias() += cmap(tp.value(ia)).transpose() * cmap(g);
    }
  });
}

template <typename T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  const Tensor<T>& X = x.value();
  const Tensor<T>& W = w.value();
  const Tensor<T>& Bv = b.value();
  require(X.cols() == W.rows(),
          "linear: input width " + std::to_string(X.cols()) +
              " does not match weight " + dims(W));
  require(Bv.size() == static_cast<std::size_t>(W.cols()),
          "linear: bias length does not match weight " + dims(W));
  Tensor<T> out({X.rows(), W.cols()});
  auto o = map(out);
  o.noalias() = cmap(X) * cmap(W);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(Bv.data(), W.cols());
  o.rowwise() += bias;
  const int ix = x.id, iw = w.id, ib = b.id;
  return x.tape->record(std::move(out), {x, w, b}, [ix, iw, ib](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    if (Tensor<T>* gx = tp.grad(ix)) {
      map(*gx).noalias() += cmap(g) * cmap(tp.value(iw)).transpose();
    }
    if (Tensor<T>* gw = tp.grad(iw)) {
      map(*gw).noalias() += cmap(tp.value(ix)).transpose() * cmap(g);
    }
    if (Tensor<T>* gb = tp.grad(ib)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gbias(gb->data(), g.cols());
      gbias += cmap(g).colwise().sum();
    }
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same(a.value(), b.value(), "add");
  Tensor<T> out({a.rows(), a.cols()});
  map(out) = cmap(a.value()) + cmap(b.value());
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    if (Tensor<T>* ga = tp.grad(ia)) map(*ga) += cmap(g);
    if (Tensor<T>* gb = tp.grad(ib)) map(*gb) += cmap(g);
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same(a.value(), b.value(), "sub");
  Tensor<T> out({a.rows(), a.cols()});
  map(out) = cmap(a.value()) - cmap(b.value());
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    if (Tensor<T>* ga = tp.grad(ia)) map(*ga) += cmap(g);
    if (Tensor<T>* gb = tp.grad(ib)) map(*gb) -= cmap(g);
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  require_same(a.value(), b.value(), "mul");
  Tensor<T> out({a.rows(), a.cols()});
  map(out) = cmap(a.value()).cwiseProduct(cmap(b.value()));
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    if (Tensor<T>* ga = tp.grad(ia)) map(*ga) += cmap(g).cwiseProduct(cmap(tp.value(ib)));
    if (Tensor<T>* gb = tp.grad(ib)) map(*gb) += cmap(g).cwiseProduct(cmap(tp.value(ia)));
  });
}

template <typename T>
Var<T> add_row(Var<T> a, Var<T> row) {
  const Tensor<T>& A = a.value();
  const Tensor<T>& R = row.value();
  require(R.size() == static_cast<std::size_t>(A.cols()),
          "add_row: row length does not match " + dims(A));
  Tensor<T> out({A.rows(), A.cols()});
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> r(R.data(), A.cols());
  map(out) = cmap(A).rowwise() + r;
  const int ia = a.id, ir = row.id;
  return a.tape->record(std::move(out), {a, row}, [ia, ir](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    if (Tensor<T>* ga = tp.grad(ia)) map(*ga) += cmap(g);
    if (Tensor<T>* gr = tp.grad(ir)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> m(gr->data(), g.cols());
      m += cmap(g).colwise().sum();
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  return unary<T>(a, [s](T x) { return s * x; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> add_scalar(Var<T> a, T s) {
  return unary<T>(a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> relu(Var<T> a) {
  return unary<T>(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> tanh(Var<T> a) {
  // Eigen's packet tanh; libm tanhf dominated small-network profiles.
  const Tensor<T>& x = a.value();
  Tensor<T> out({x.rows(), x.cols()});
  map(out).array() = cmap(x).array().tanh();
  const int ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia](Tape<T>& tp, int self) {
    Tensor<T>* ga = tp.grad(ia);
    if (ga == nullptr) return;
    map(*ga).array() +=
        cmap(*tp.grad(self)).array() * (T(1) - cmap(tp.value(self)).array().square());
  });
}

template <typename T>
Var<T> exp(Var<T> a) {
  return unary<T>(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> square(Var<T> a) {
  return unary<T>(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Var<T> clamp(Var<T> a, T lo, T hi) {
  if (!(lo <= hi)) throw ContractError("clamp: lo > hi");
  return unary<T>(
      a, [lo, hi](T x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Var<T> minimum(Var<T> a, Var<T> b) {
  require_same(a.value(), b.value(), "minimum");
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  Tensor<T> out({A.rows(), A.cols()});
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] <= B[i] ? A[i] : B[i];
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, int self) {
    const Tensor<T>& g = *tp.grad(self);
    const Tensor<T>& A = tp.value(ia);
    const Tensor<T>& B = tp.value(ib);
    Tensor<T>* ga = tp.grad(ia);
    Tensor<T>* gb = tp.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (A[i] <= B[i]) {
        if (ga) (*ga)[i] += g[i];
      } else if (gb) {
        (*gb)[i] += g[i];
      }
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  const Tensor<T>& A = a.value();
  T s = T(0);
  for (const T& v : A.values()) s += v;
  const int ia = a.id;
  return a.tape->record(Tensor<T>({1, 1}, {s}), {a}, [ia](Tape<T>& tp, int self) {
    Tensor<T>* ga = tp.grad(ia);
    if (ga == nullptr) return;
    const T g = (*tp.grad(self))[0];
    for (auto& v : ga->values()) v += g;
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  const std::size_t n = a.value().size();
  require(n > 0, "mean of an empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(n));
}

template <typename T>
Var<T> row_sum(Var<T> a) {
  const Tensor<T>& A = a.value();
  Tensor<T> out({A.rows(), 1});
  map(out) = cmap(A).rowwise().sum();
  const int ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia](Tape<T>& tp, int self) {
    Tensor<T>* ga = tp.grad(ia);
    if (ga == nullptr) return;
    const Tensor<T>& g = *tp.grad(self);
    auto m = map(*ga);
    for (int r = 0; r < m.rows(); ++r) m.row(r).array() += g[static_cast<std::size_t>(r)];
  });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const int rows = parts.front().rows();
  int cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == rows, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Tensor<T> out({rows, cols});
  std::vector<int> ids, offsets;
  int off = 0;
  for (const auto& p : parts) {
    map(out).block(0, off, rows, p.cols()) = cmap(p.value());
    ids.push_back(p.id);
    offsets.push_back(off);
    off += p.cols();
  }
  return parts.front().tape->record(
      std::move(out), parts, [ids, offsets](Tape<T>& tp, int self) {
        const Tensor<T>& g = *tp.grad(self);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (Tensor<T>* gi = tp.grad(ids[i])) {
            map(*gi) += cmap(g).block(0, offsets[i], gi->rows(), gi->cols());
          }
        }
      });
}

template <typename T>
Var<T> slice_cols(Var<T> a, int start, int count) {
  const Tensor<T>& A = a.value();
  require(start >= 0 && count >= 0 && start + count <= A.cols(),
          "slice_cols: range out of bounds for " + dims(A));
  Tensor<T> out({A.rows(), count});
  map(out) = cmap(A).block(0, start, A.rows(), count);
  const int ia = a.id;
  return a.tape->record(std::move(out), {a}, [ia, start, count](Tape<T>& tp, int self) {
    Tensor<T>* ga = tp.grad(ia);
    if (ga == nullptr) return;
    map(*ga).block(0, start, ga->rows(), count) += cmap(*tp.grad(self));
  });
}

template <typename T>
Var<T> gather_rows(Var<T> table, const std::vector<int>& index) {
  const Tensor<T>& tab = table.value();
  const int d = tab.cols();
  Tensor<T> out({static_cast<int>(index.size()), d});
  for (std::size_t r = 0; r < index.size(); ++r) {
    require(index[r] >= 0 && index[r] < tab.rows(), "gather_rows: index out of range");
    std::copy_n(tab.data() + static_cast<std::size_t>(index[r]) * d, d,
                out.data() + r * d);
  }
  const int it = table.id;
  return table.tape->record(std::move(out), {table}, [it, index, d](Tape<T>& tp, int self) {
    Tensor<T>* gt = tp.grad(it);
    if (gt == nullptr) return;
    const Tensor<T>& g = *tp.grad(self);
    for (std::size_t r = 0; r < index.size(); ++r) {
      T* dst = gt->data() + static_cast<std::size_t>(index[r]) * d;
      const T* src = g.data() + r * d;
      for (int c = 0; c < d; ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  const Tensor<T>& X = x.value();
  const int n = X.rows();
  const int d = X.cols();
  require(gain.value().size() == static_cast<std::size_t>(d) &&
              bias.value().size() == static_cast<std::size_t>(d),
          "layer_norm: gain/bias length does not match width " + std::to_string(d));
  Tensor<T> xhat({n, d});
  std::vector<T> inv(static_cast<std::size_t>(n));
  Tensor<T> out({n, d});
  const T* gv = gain.value().data();
  const T* bv = bias.value().data();
  for (int r = 0; r < n; ++r) {
    const T* row = X.data() + static_cast<std::size_t>(r) * d;
    T mu = T(0);
    for (int c = 0; c < d; ++c) mu += row[c];
    mu /= static_cast<T>(d);
    T var = T(0);
    for (int c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<T>(d);
    const T is = T(1) / std::sqrt(var + eps);
    inv[static_cast<std::size_t>(r)] = is;
    T* xh = xhat.data() + static_cast<std::size_t>(r) * d;
    T* o = out.data() + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) {
      xh[c] = (row[c] - mu) * is;
      o[c] = xh[c] * gv[c] + bv[c];
    }
  }
  const int ix = x.id, ig = gain.id, ib = bias.id;
  return x.tape->record(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, xhat = std::move(xhat), inv = std::move(inv), n, d](Tape<T>& tp, int self) {
        const Tensor<T>& g = *tp.grad(self);
        const T* gv = tp.value(ig).data();
        Tensor<T>* gx = tp.grad(ix);
        Tensor<T>* gg = tp.grad(ig);
        Tensor<T>* gb = tp.grad(ib);
        std::vector<T> gxh(static_cast<std::size_t>(d));
        for (int r = 0; r < n; ++r) {
          const T* gr = g.data() + static_cast<std::size_t>(r) * d;
          const T* xh = xhat.data() + static_cast<std::size_t>(r) * d;
          if (gg) for (int c = 0; c < d; ++c) (*gg)[c] += gr[c] * xh[c];
          if (gb) for (int c = 0; c < d; ++c) (*gb)[c] += gr[c];
          if (gx) {
            T m1 = T(0), m2 = T(0);
            for (int c = 0; c < d; ++c) {
              gxh[c] = gr[c] * gv[c];
              m1 += gxh[c];
              m2 += gxh[c] * xh[c];
            }
            m1 /= static_cast<T>(d);
            m2 /= static_cast<T>(d);
            T* dst = gx->data() + static_cast<std::size_t>(r) * d;
            const T is = inv[static_cast<std::size_t>(r)];
            for (int c = 0; c < d; ++c) dst[c] += is * (gxh[c] - m1 - xh[c] * m2);
          }
        }
      });
}

template <typename T>
Var<T> interleave_tokens(const std::vector<Var<T>>& slots) {
  require(!slots.empty(), "interleave_tokens: no slots");
  const int tokens = static_cast<int>(slots.size());
  const int batch = slots.front().rows();
  const int d = slots.front().cols();
  for (const auto& s : slots) {
    require(s.rows() == batch && s.cols() == d, "interleave_tokens: slot shapes differ");
  }
  Tensor<T> out({batch * tokens, d});
  std::vector<int> ids;
  for (int t = 0; t < tokens; ++t) {
    const Tensor<T>& s = slots[static_cast<std::size_t>(t)].value();
    for (int b = 0; b < batch; ++b) {
      std::copy_n(s.data() + static_cast<std::size_t>(b) * d, d,
                  out.data() + (static_cast<std::size_t>(b) * tokens + t) * d);
    }
    ids.push_back(slots[static_cast<std::size_t>(t)].id);
  }
  return slots.front().tape->record(
      std::move(out), slots, [ids, batch, tokens, d](Tape<T>& tp, int self) {
        const Tensor<T>& g = *tp.grad(self);
        for (int t = 0; t < tokens; ++t) {
          Tensor<T>* gs = tp.grad(ids[static_cast<std::size_t>(t)]);
          if (gs == nullptr) continue;
          for (int b = 0; b < batch; ++b) {
            const T* src = g.data() + (static_cast<std::size_t>(b) * tokens + t) * d;
            T* dst = gs->data() + static_cast<std::size_t>(b) * d;
            for (int c = 0; c < d; ++c) dst[c] += src[c];
          }
        }
      });
}

template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, const TokenMask& mask, int n_heads) {
  const Tensor<T>& Q = q.value();
  const Tensor<T>& K = k.value();
  const Tensor<T>& V = v.value();
  require_same(Q, K, "attention");
  require_same(Q, V, "attention");
  const int B = mask.batch;
  const int Tn = mask.tokens;
  const int d = Q.cols();
  require(Q.rows() == B * Tn, "attention: rows do not match mask batch x tokens");
  if (n_heads <= 0 || d % n_heads != 0) {
    throw ConfigError("attention: width " + std::to_string(d) +
                      " not divisible by heads " + std::to_string(n_heads));
  }
  const int dh = d / n_heads;
  const T sc = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<T> probs(static_cast<std::size_t>(B) * n_heads * Tn * Tn, T(0));
  Tensor<T> out({B * Tn, d});
  std::vector<T> scores(static_cast<std::size_t>(Tn));
  for (int b = 0; b < B; ++b) {
    if (mask.count(b) == 0) {
      throw ContractError("attention: sample " + std::to_string(b) + " has no tokens");
    }
    for (int h = 0; h < n_heads; ++h) {
      const int c0 = h * dh;
      for (int i = 0; i < Tn; ++i) {
        const T* qi = Q.data() + (static_cast<std::size_t>(b) * Tn + i) * d + c0;
        T m = -std::numeric_limits<T>::infinity();
        for (int j = 0; j < Tn; ++j) {
          if (!mask.at(b, j)) continue;
          const T* kj = K.data() + (static_cast<std::size_t>(b) * Tn + j) * d + c0;
          T s = T(0);
          for (int c = 0; c < dh; ++c) s += qi[c] * kj[c];
          s *= sc;
          scores[static_cast<std::size_t>(j)] = s;
          m = std::max(m, s);
        }
        T* p = probs.data() + ((static_cast<std::size_t>(b) * n_heads + h) * Tn + i) * Tn;
        T z = T(0);
        for (int j = 0; j < Tn; ++j) {
          if (!mask.at(b, j)) continue;
          p[j] = std::exp(scores[static_cast<std::size_t>(j)] - m);
          z += p[j];
        }
        T* oi = out.data() + (static_cast<std::size_t>(b) * Tn + i) * d + c0;
        for (int j = 0; j < Tn; ++j) {
          if (!mask.at(b, j)) continue;
          p[j] /= z;
          const T* vj = V.data() + (static_cast<std::size_t>(b) * Tn + j) * d + c0;
          for (int c = 0; c < dh; ++c) oi[c] += p[j] * vj[c];
        }
      }
    }
  }
  const int iq = q.id, ik = k.id, iv = v.id;
  return q.tape->record(
      std::move(out), {q, k, v},
      [iq, ik, iv, mask, n_heads, dh, sc, probs = std::move(probs)](Tape<T>& tp, int self) {
        const Tensor<T>& G = *tp.grad(self);
        const Tensor<T>& Q = tp.value(iq);
        const Tensor<T>& K = tp.value(ik);
        const Tensor<T>& V = tp.value(iv);
        Tensor<T>* gq = tp.grad(iq);
        Tensor<T>* gk = tp.grad(ik);
        Tensor<T>* gv = tp.grad(iv);
        const int B = mask.batch;
        const int Tn = mask.tokens;
        const int d = Q.cols();
        std::vector<T> gp(static_cast<std::size_t>(Tn));
        for (int b = 0; b < B; ++b) {
          for (int h = 0; h < n_heads; ++h) {
            const int c0 = h * dh;
            for (int i = 0; i < Tn; ++i) {
              const std::size_t ri = (static_cast<std::size_t>(b) * Tn + i) * d + c0;
              const T* go = G.data() + ri;
              const T* p = probs.data() + ((static_cast<std::size_t>(b) * n_heads + h) * Tn + i) * Tn;
              T dot = T(0);
              for (int j = 0; j < Tn; ++j) {
                if (!mask.at(b, j)) continue;
                const std::size_t rj = (static_cast<std::size_t>(b) * Tn + j) * d + c0;
                T s = T(0);
                for (int c = 0; c < dh; ++c) s += go[c] * V[rj + c];
                gp[static_cast<std::size_t>(j)] = s;
                dot += p[j] * s;
                if (gv) for (int c = 0; c < dh; ++c) (*gv)[rj + c] += p[j] * go[c];
              }
              for (int j = 0; j < Tn; ++j) {
                if (!mask.at(b, j)) continue;
                const std::size_t rj = (static_cast<std::size_t>(b) * Tn + j) * d + c0;
                const T gs = p[j] * (gp[static_cast<std::size_t>(j)] - dot) * sc;
                if (gq) for (int c = 0; c < dh; ++c) (*gq)[ri + c] += gs * K[rj + c];
                if (gk) for (int c = 0; c < dh; ++c) (*gk)[rj + c] += gs * Q[ri + c];
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> masked_mean_pool(Var<T> x, const TokenMask& mask) {
  const Tensor<T>& X = x.value();
  const int B = mask.batch;
  const int Tn = mask.tokens;
  const int d = X.cols();
  require(X.rows() == B * Tn, "masked_mean_pool: rows do not match mask");
  Tensor<T> out({B, d});
  for (int b = 0; b < B; ++b) {
    const int n = mask.count(b);
    if (n == 0) throw ContractError("masked_mean_pool: sample has no tokens");
    T* o = out.data() + static_cast<std::size_t>(b) * d;
    for (int t = 0; t < Tn; ++t) {
      if (!mask.at(b, t)) continue;
      const T* row = X.data() + (static_cast<std::size_t>(b) * Tn + t) * d;
      for (int c = 0; c < d; ++c) o[c] += row[c];
    }
    for (int c = 0; c < d; ++c) o[c] /= static_cast<T>(n);
  }
  const int ix = x.id;
  return x.tape->record(std::move(out), {x}, [ix, mask, d](Tape<T>& tp, int self) {
    Tensor<T>* gx = tp.grad(ix);
    if (gx == nullptr) return;
    const Tensor<T>& g = *tp.grad(self);
    for (int b = 0; b < mask.batch; ++b) {
      const T inv = T(1) / static_cast<T>(mask.count(b));
      const T* src = g.data() + static_cast<std::size_t>(b) * d;
      for (int t = 0; t < mask.tokens; ++t) {
        if (!mask.at(b, t)) continue;
        T* dst = gx->data() + (static_cast<std::size_t>(b) * mask.tokens + t) * d;
        for (int c = 0; c < d; ++c) dst[c] += src[c] * inv;
      }
    }
  });
}

template <typename T>
Var<T> mse(Var<T> a, const Tensor<T>& target) {
  require_same(a.value(), target, "mse");
  const Tensor<T>& A = a.value();
  const std::size_t n = A.size();
  require(n > 0, "mse of an empty tensor");
  T s = T(0);
  for (std::size_t i = 0; i < n; ++i) s += (A[i] - target[i]) * (A[i] - target[i]);
  const int ia = a.id;
  return a.tape->record(
      Tensor<T>({1, 1}, {s / static_cast<T>(n)}), {a},
      [ia, target, n](Tape<T>& tp, int self) {
        Tensor<T>* ga = tp.grad(ia);
        if (ga == nullptr) return;
        const T g = (*tp.grad(self))[0] * T(2) / static_cast<T>(n);
        const Tensor<T>& A = tp.value(ia);
        for (std::size_t i = 0; i < n; ++i) (*ga)[i] += g * (A[i] - target[i]);
      });
}

#define TT_INSTANTIATE_OPS(T)                                                  \
  template Var<T> matmul(Var<T>, Var<T>);                                      \
  template Var<T> linear(Var<T>, Var<T>, Var<T>);                              \
  template Var<T> add(Var<T>, Var<T>);                                         \
  template Var<T> sub(Var<T>, Var<T>);                                         \
  template Var<T> mul(Var<T>, Var<T>);                                         \
  template Var<T> add_row(Var<T>, Var<T>);                                     \
  template Var<T> scale(Var<T>, T);                                            \
  template Var<T> add_scalar(Var<T>, T);                                       \
  template Var<T> relu(Var<T>);                                                \
  template Var<T> tanh(Var<T>);                                                \
  template Var<T> exp(Var<T>);                                                 \
  template Var<T> square(Var<T>);                                              \
  template Var<T> clamp(Var<T>, T, T);                                         \
  template Var<T> minimum(Var<T>, Var<T>);                                     \
  template Var<T> sum(Var<T>);                                                 \
  template Var<T> mean(Var<T>);                                                \
  template Var<T> row_sum(Var<T>);                                             \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                     \
  template Var<T> slice_cols(Var<T>, int, int);                                \
  template Var<T> gather_rows(Var<T>, const std::vector<int>&);                \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, T);                       \
  template Var<T> interleave_tokens(const std::vector<Var<T>>&);               \
  template Var<T> attention(Var<T>, Var<T>, Var<T>, const TokenMask&, int);    \
  template Var<T> masked_mean_pool(Var<T>, const TokenMask&);                  \
  template Var<T> mse(Var<T>, const Tensor<T>&);

TT_INSTANTIATE_OPS(float)
TT_INSTANTIATE_OPS(double)

#undef TT_INSTANTIATE_OPS

}  // namespace tt::num
