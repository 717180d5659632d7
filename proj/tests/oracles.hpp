// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.
//
// Reference implementations the tests compare the library against. Everything
// here is written as plain scalar loops that follow the defining formulas
// term by term — no shared code with the library, no vectorization, no
// numerical shortcuts — so agreement is meaningful evidence and disagreement
// localizes the bug on the library side.

#ifndef CCPV_TESTS_ORACLES_HPP
#define CCPV_TESTS_ORACLES_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ccpv/common.hpp"
#include "ccpv/metrics.hpp"

namespace oracle {

inline double dot_rows(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b,
                       int j) {
  double s = 0.0;
  for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
  return s;
}

// Mean softmax cross-entropy, evaluated directly. Assumes moderate logits
// (the library's stabilized path is exercised separately with extreme ones).
inline double cross_entropy(const Eigen::MatrixXd& logits,
                            const std::vector<int>& labels) {
  double total = 0.0;
  for (int i = 0; i < logits.rows(); ++i) {
    double denom = 0.0;
    for (int c = 0; c < logits.cols(); ++c) denom += std::exp(logits(i, c));
    total += -std::log(std::exp(logits(i, labels[i])) / denom);
  }
  return total / static_cast<double>(logits.rows());
}

// One consistency term, one anchor at a time:
//   A(i) = { a != i }, P(i) = { p in A(i) : labels[p] == labels[i] }
//   term_i = -(1/|P(i)|) sum_{p in P(i)} log( exp(anchor_i.positive_p / tau)
//              / sum_{a in A(i)} exp(anchor_i.den_a / tau) )
// mean over anchors with non-empty P(i). den is the anchor view when
// as_written, the positive view otherwise.
inline double cc_term(const Eigen::MatrixXd& anchor,
                      const Eigen::MatrixXd& positive,
                      const std::vector<int>& labels, double tau,
                      bool as_written, bool* degenerate = nullptr) {
  const int m = static_cast<int>(anchor.rows());
  const Eigen::MatrixXd& den_view = as_written ? anchor : positive;
  double total = 0.0;
  int contributing = 0;
  for (int i = 0; i < m; ++i) {
    std::vector<int> positives;
    for (int p = 0; p < m; ++p)
      if (p != i && labels[p] == labels[i]) positives.push_back(p);
    if (positives.empty()) continue;
    double denom = 0.0;
    for (int a = 0; a < m; ++a)
      if (a != i) denom += std::exp(dot_rows(anchor, i, den_view, a) / tau);
    double inner = 0.0;
    for (int p : positives)
      inner += std::log(std::exp(dot_rows(anchor, i, positive, p) / tau) / denom);
    total += -inner / static_cast<double>(positives.size());
    ++contributing;
  }
  if (degenerate) *degenerate = contributing == 0;
  if (contributing == 0) return 0.0;
  return total / static_cast<double>(contributing);
}

inline Eigen::MatrixXd stack_twice(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(2 * m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = out(i + m.rows(), j) = m(i, j);
  return out;
}

inline std::vector<int> labels_twice(const std::vector<int>& labels) {
  std::vector<int> out(labels);
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

// Mean of the four consistency terms with pairings (l,fr), (fl,r), (r,l),
// (fr,fl), each evaluated on the duplicated stacks.
inline double cc_loss(const Eigen::MatrixXd& e_l, const Eigen::MatrixXd& e_r,
                      const Eigen::MatrixXd& e_fl, const Eigen::MatrixXd& e_fr,
                      const std::vector<int>& labels, double tau,
                      bool as_written) {
  const std::vector<int> twice = labels_twice(labels);
  const double t1 =
      cc_term(stack_twice(e_l), stack_twice(e_fr), twice, tau, as_written);
  const double t2 =
      cc_term(stack_twice(e_fl), stack_twice(e_r), twice, tau, as_written);
  const double t3 =
      cc_term(stack_twice(e_r), stack_twice(e_l), twice, tau, as_written);
  const double t4 =
      cc_term(stack_twice(e_fr), stack_twice(e_fl), twice, tau, as_written);
  return (t1 + t2 + t3 + t4) / 4.0;
}

// --- Verification metrics, by exhaustive counting -------------------------

inline double far_count(const std::vector<double>& impostor, double t) {
  std::size_t accepted = 0;
  for (double s : impostor)
    if (s <= t) ++accepted;
  return static_cast<double>(accepted) / static_cast<double>(impostor.size());
}

inline double frr_count(const std::vector<double>& genuine, double t) {
  std::size_t rejected = 0;
  for (double s : genuine)
    if (s > t) ++rejected;
  return static_cast<double>(rejected) / static_cast<double>(genuine.size());
}

inline double gar_count(const std::vector<double>& genuine, double t) {
  std::size_t accepted = 0;
  for (double s : genuine)
    if (s <= t) ++accepted;
  return static_cast<double>(accepted) / static_cast<double>(genuine.size());
}

// Sorted distinct scores, midpoints between neighbours, and sentinels one
// unit below and above everything.
inline std::vector<double> candidate_grid(const ccpv::ScoreSet& scores) {
  std::vector<double> all(scores.genuine);
  all.insert(all.end(), scores.impostor.begin(), scores.impostor.end());
  std::sort(all.begin(), all.end());
  std::vector<double> distinct;
  for (double s : all)
    if (distinct.empty() || s != distinct.back()) distinct.push_back(s);
  std::vector<double> grid;
  grid.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    grid.push_back(distinct[i]);
    if (i + 1 < distinct.size())
      grid.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  }
  grid.push_back(distinct.back() + 1.0);
  return grid;
}

struct EerScan {
  double eer = 0.0;
  double threshold = 0.0;
};

inline EerScan eer_scan(const ccpv::ScoreSet& scores) {
  EerScan best;
  best.eer = 2.0;
  for (double t : candidate_grid(scores)) {
    const double balanced =
        0.5 * (far_count(scores.impostor, t) + frr_count(scores.genuine, t));
    if (balanced < best.eer) {
      best.eer = balanced;
      best.threshold = t;
    }
  }
  return best;
}

struct GarScan {
  double gar = 0.0;
  double threshold = 0.0;
  bool unreliable = false;
};

inline GarScan gar_scan(const ccpv::ScoreSet& scores, double target) {
  GarScan best;
  std::size_t qualifying = 0;
  // The grid is ascending, so the last candidate whose FAR stays within the
  // target is the largest one.
  for (double t : candidate_grid(scores)) {
    if (far_count(scores.impostor, t) > target) continue;
    best.threshold = t;
    ++qualifying;
  }
  // The below-all sentinel always qualifies (FAR = 0); if nothing else does,
  // the target is unattainable.
  best.unreliable = qualifying <= 1;
  best.gar = best.unreliable ? 0.0 : gar_count(scores.genuine, best.threshold);
  return best;
}

// --- Finite differences ----------------------------------------------------

// Central difference of a scalar function over every entry of x.
template <typename F>
Eigen::MatrixXd fd_grad(Eigen::MatrixXd& x, F loss, double h = 1e-6) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + h;
      const double up = loss();
      x(i, j) = saved - h;
      const double down = loss();
      x(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

// Largest relative error between two gradients, scaled per entry by
// max(1, |a|, |b|) so tiny entries are compared absolutely.
inline double max_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double scale = std::max({1.0, std::abs(a(i, j)), std::abs(b(i, j))});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

// --- Random test-case generators -------------------------------------------

inline Eigen::MatrixXd random_unit_rows(int n, int d, std::uint64_t seed) {
  ccpv::Rng rng = ccpv::make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        m(i, j) = normal(rng);
        norm2 += m(i, j) * m(i, j);
      }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (int j = 0; j < d; ++j) m(i, j) *= inv;
  }
  return m;
}

// Labels over [0, n_classes) with every class present at least once when
// n >= n_classes.
inline std::vector<int> random_labels(int n, int n_classes, std::uint64_t seed) {
  ccpv::Rng rng = ccpv::make_rng(seed);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i)
    labels[i] = i < n_classes ? i : static_cast<int>(rng() % n_classes);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

inline ccpv::ScoreSet random_scores(std::size_t n_genuine, std::size_t n_impostor,
                                    std::uint64_t seed, bool allow_ties = true) {
  ccpv::Rng rng = ccpv::make_rng(seed);
  std::normal_distribution<double> gen(0.5, 0.25), imp(1.1, 0.3);
  std::uniform_int_distribution<int> coarse(0, 20);
  ccpv::ScoreSet scores;
  for (std::size_t i = 0; i < n_genuine; ++i)
    scores.genuine.push_back(allow_ties ? coarse(rng) / 10.0 : gen(rng));
  for (std::size_t i = 0; i < n_impostor; ++i)
    scores.impostor.push_back(allow_ties ? coarse(rng) / 10.0 + 0.05 : imp(rng));
  return scores;
}

}  // namespace oracle

#endif  // CCPV_TESTS_ORACLES_HPP
