#pragma once

// Independent reference implementations used by unit and acceptance tests.
// Written from the definitions, sharing no code with the library.

#include <cmath>
#include <string>
#include <vector>

#include "parasent/params.h"
#include "parasent/transfer.h"

namespace parasent::testing {

inline double ref_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Exhaustive argmax over the other pairs, lowest candidate id on ties.
inline std::vector<Negatives> brute_force_negatives(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
  std::vector<Negatives> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      const auto& anchor = side == 0 ? a[i] : b[i];
      double best = -2.0;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (j == i) continue;
        for (int s = 0; s < 2; ++s) {
          const double c = ref_cosine(anchor, s == 0 ? a[j] : b[j]);
          if (c > best) {
            best = c;
            arg = 2 * j + s;
          }
        }
      }
      (side == 0 ? out[i].t1 : out[i].t2) = arg;
    }
  }
  return out;
}

// Textbook single-pass sums: r = (nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²)).
// Long double keeps the cancellation harmless at the sizes tested.
inline double ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((n * sxy - sx * sy) /
                             std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

// Rank = 1 + #smaller + (#equal − 1) / 2, counted directly.
inline std::vector<double> ref_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) ++less;
      if (v == x[i]) ++equal;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double ref_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return ref_pearson(ref_ranks(x), ref_ranks(y));
}

// Peephole LSTM hidden states transcribed over named tensors.
template <class T>
std::vector<std::vector<double>> ref_lstm_states(const ParameterSet<T>& ps,
                                                 const std::vector<std::uint32_t>& ids,
                                                 const std::string& p = "") {
  const auto& W = ps["W_w"];
  const std::size_t dh = ps[p + "lstm.b_i"].rows();
  auto at = [&](const std::string& n, std::size_t r, std::size_t c) {
    return static_cast<double>(ps[p + n](r, c));
  };
  auto affine = [&](char g, const std::vector<double>& x,
                    const std::vector<double>& h) {
    const std::string s(1, g);
    std::vector<double> z(dh);
    for (std::size_t r = 0; r < dh; ++r) {
      z[r] = at("lstm.b_" + s, r, 0);
      for (std::size_t c = 0; c < x.size(); ++c) z[r] += at("lstm.W_x" + s, r, c) * x[c];
      for (std::size_t c = 0; c < dh; ++c) z[r] += at("lstm.W_h" + s, r, c) * h[c];
    }
    return z;
  };
  auto sig = [](double v) { return 1 / (1 + std::exp(-v)); };
  std::vector<double> h(dh, 0.0), c(dh, 0.0);
  std::vector<std::vector<double>> hs;
  for (auto id : ids) {
    std::vector<double> x(W.cols());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = static_cast<double>(W(id, j));
    const auto zi = affine('i', x, h), zf = affine('f', x, h),
               zc = affine('c', x, h), zo = affine('o', x, h);
    std::vector<double> cn(dh);
    for (std::size_t k = 0; k < dh; ++k) {
      const double i = sig(zi[k] + at("lstm.w_ci", k, 0) * c[k]);
      const double f = sig(zf[k] + at("lstm.w_cf", k, 0) * c[k]);
      cn[k] = f * c[k] + i * std::tanh(zc[k]);
    }
    for (std::size_t k = 0; k < dh; ++k) {
      const double o = sig(zo[k] + at("lstm.w_co", k, 0) * cn[k]);
      h[k] = o * std::tanh(cn[k]);
    }
    c = cn;
    hs.push_back(h);
  }
  return hs;
}

// GRAN-1 gate L1 norm per position: Σ_k σ(W_x x_t + W_h h_t + b)_k.
template <class T>
std::vector<double> ref_gate_l1(const ParameterSet<T>& ps,
                                const std::vector<std::uint32_t>& ids) {
  const auto hs = ref_lstm_states(ps, ids);
  const auto& W = ps["W_w"];
  const auto& wx = ps["gate1.W_x"];
  const auto& wh = ps["gate1.W_h"];
  const auto& b = ps["gate1.b"];
  std::vector<double> out;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    double total = 0;
    for (std::size_t r = 0; r < wx.rows(); ++r) {
      double z = static_cast<double>(b(r, 0));
      for (std::size_t c = 0; c < wx.cols(); ++c) {
        z += static_cast<double>(wx(r, c)) * static_cast<double>(W(ids[t], c));
      }
      for (std::size_t c = 0; c < wh.cols(); ++c) {
        z += static_cast<double>(wh(r, c)) * hs[t][c];
      }
      total += 1 / (1 + std::exp(-z));
    }
    out.push_back(total);
  }
  return out;
}

}  // namespace parasent::testing
