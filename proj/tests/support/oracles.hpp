#pragma once

// Independent reference implementations used to check the library. They use
// plain loops over std::vector and share no code with src/.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double> &a, const std::vector<double> &b) {
  return dot(a, b) / (std::sqrt(dot(a, a)) * std::sqrt(dot(b, b)));
}

inline std::vector<double> matvec(const std::vector<std::vector<double>> &m,
                                  const std::vector<double> &v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

/// Softmax cross-entropy over cosine logits, averaged per (example, gold)
/// pair, plus l2 * |W - I|_F^2. `protos[k]` is prototype k.
inline double adapter_loss(const std::vector<std::vector<double>> &W,
                           const std::vector<std::vector<double>> &protos,
                           const std::vector<std::vector<double>> &xs,
                           const std::vector<std::vector<std::size_t>> &golds, double temperature,
                           double l2) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const auto u = matvec(W, xs[n]);
    std::vector<double> z;
    for (const auto &p : protos) z.push_back(cosine(u, p) / temperature);
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double denom = 0.0;
    for (double v : z) denom += std::exp(v - mx);
    for (std::size_t g : golds[n]) {
      total += -(z[g] - mx - std::log(denom));
      ++pairs;
    }
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < W.size(); ++i)
    for (std::size_t j = 0; j < W[i].size(); ++j) {
      const double d = W[i][j] - (i == j ? 1.0 : 0.0);
      reg += d * d;
    }
  return total / static_cast<double>(pairs) + l2 * reg;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct F1 {
  double macro = 0.0, micro = 0.0, weighted = 0.0;
  std::vector<Counts> counts;
};

inline double f1_of(const Counts &c) {
  const double p = c.tp + c.fp == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 0.0 : double(c.tp) / double(c.tp + c.fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

/// Per-element counting over sector indices 0..k-1.
inline F1 f1(std::size_t k, const std::vector<std::set<std::size_t>> &gold,
             const std::vector<std::set<std::size_t>> &pred) {
  F1 out;
  out.counts.assign(k, {});
  for (std::size_t n = 0; n < gold.size(); ++n) {
    if (gold[n].empty()) continue;
    for (std::size_t s = 0; s < k; ++s) {
      const bool g = gold[n].count(s) > 0;
      const bool p = pred[n].count(s) > 0;
      if (g && p) ++out.counts[s].tp;
      if (!g && p) ++out.counts[s].fp;
      if (g && !p) ++out.counts[s].fn;
    }
  }
  Counts pooled;
  double support = 0.0;
  for (const auto &c : out.counts) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    out.macro += f1_of(c);
    out.weighted += f1_of(c) * double(c.tp + c.fn);
    support += double(c.tp + c.fn);
  }
  out.macro /= double(k);
  out.weighted = support == 0.0 ? 0.0 : out.weighted / support;
  out.micro = f1_of(pooled);
  return out;
}

/// company -> sorted (day serial, open) list.
using Prices = std::map<std::string, std::vector<std::pair<long, double>>>;

/// Mean next-day return over companies with an anchor (first day >= d) and a
/// later day. Returns false when no company qualifies.
inline bool sector_return(const Prices &prices, const std::vector<std::string> &companies, long d,
                          double &value, int &used) {
  double sum = 0.0;
  used = 0;
  for (const auto &c : companies) {
    auto it = prices.find(c);
    if (it == prices.end()) continue;
    const auto &days = it->second;
    std::size_t a = 0;
    while (a < days.size() && days[a].first < d) ++a;
    if (a + 1 >= days.size()) continue;
    sum += (days[a + 1].second - days[a].second) / days[a].second;
    ++used;
  }
  if (used == 0) return false;
  value = sum / used;
  return true;
}

/// NDCG with relevance N - j for the item at truth position j.
inline double ndcg(const std::vector<std::string> &predicted, const std::vector<std::string> &truth) {
  const std::size_t n = truth.size();
  std::map<std::string, double> rel;
  for (std::size_t j = 0; j < n; ++j) rel[truth[j]] = double(n - j);
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dcg += rel[predicted[i]] / std::log2(double(i) + 2.0);
    idcg += double(n - i) / std::log2(double(i) + 2.0);
  }
  return dcg / idcg;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

/// Central-difference derivative of f at x along coordinate `i`.
template <typename F>
double central_difference(F &&f, std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

} // namespace oracle
