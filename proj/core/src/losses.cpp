// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ccpv/common.hpp"

namespace ccpv {

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     Eigen::MatrixXd* grad) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (n == 0) raise(ErrorCode::EmptyInput, "cross_entropy on an empty batch");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    raise(ErrorCode::ShapeMismatch, "labels do not match logits rows");
  for (int label : labels) {
    if (label < 0 || label >= classes)
      raise(ErrorCode::LabelOutOfRange,
            "label " + std::to_string(label) + " outside [0, " +
                std::to_string(classes) + ")");
  }

  if (grad != nullptr) grad->setZero(n, classes);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_max = logits.row(i).maxCoeff();
    const Eigen::ArrayXd shifted = logits.row(i).array() - row_max;
    const Eigen::ArrayXd exps = shifted.exp();
    const double denom = exps.sum();
    loss += std::log(denom) - shifted(labels[i]);
    if (grad != nullptr) {
      grad->row(i) = (exps / denom).matrix().transpose() / static_cast<double>(n);
      (*grad)(i, labels[i]) -= 1.0 / static_cast<double>(n);
    }
  }
  return loss / static_cast<double>(n);
}

double cc_term(const Eigen::MatrixXd& anchor_view,
               const Eigen::MatrixXd& positive_view,
               const std::vector<int>& labels, double tau, bool as_written,
               Eigen::MatrixXd* grad_anchor, Eigen::MatrixXd* grad_positive) {
  const Eigen::Index m = anchor_view.rows();
  if (m < 2) raise(ErrorCode::EmptyInput, "cc_term needs at least two slots");
  if (positive_view.rows() != m ||
      static_cast<Eigen::Index>(labels.size()) != m)
    raise(ErrorCode::ShapeMismatch, "views and labels must share slot count");
  if (positive_view.cols() != anchor_view.cols())
    raise(ErrorCode::DimMismatch, "views must share embedding dim");
  if (!(tau > 0.0)) raise(ErrorCode::Usage, "tau must be positive");

  const Eigen::MatrixXd& den_view = as_written ? anchor_view : positive_view;
  const Eigen::MatrixXd sim_num = anchor_view * positive_view.transpose() / tau;
  const Eigen::MatrixXd sim_den = anchor_view * den_view.transpose() / tau;

  if (grad_anchor != nullptr) grad_anchor->setZero(m, anchor_view.cols());
  if (grad_positive != nullptr) grad_positive->setZero(m, positive_view.cols());
  const bool want_grads = grad_anchor != nullptr || grad_positive != nullptr;

  // First pass: per-anchor contributions and the number of contributing
  // anchors (needed to scale gradients).
  std::vector<int> positive_count(m, 0);
  Eigen::Index contributing = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index p = 0; p < m; ++p) {
      if (p != i && labels[p] == labels[i]) ++positive_count[i];
    }
    if (positive_count[i] > 0) ++contributing;
  }
  if (contributing == 0)
    raise(ErrorCode::DegenerateBatch,
          "no anchor has a positive; every label appears exactly once");
  const double scale = 1.0 / static_cast<double>(contributing);

  double loss = 0.0;
  Eigen::ArrayXd softmax(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (positive_count[i] == 0) continue;

    // log-sum-exp over A(i) with max-subtraction.
    double row_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < m; ++a) {
      if (a != i) row_max = std::max(row_max, sim_den(i, a));
    }
    double denom = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      if (a != i) denom += std::exp(sim_den(i, a) - row_max);
    }
    const double lse = row_max + std::log(denom);

    const double inv_pos = 1.0 / positive_count[i];
    for (Eigen::Index p = 0; p < m; ++p) {
      if (p == i || labels[p] != labels[i]) continue;
      loss -= inv_pos * (sim_num(i, p) - lse);
      if (want_grads) {
        const double coeff = -scale * inv_pos / tau;
        if (grad_anchor != nullptr)
          grad_anchor->row(i) += coeff * positive_view.row(p);
        if (grad_positive != nullptr)
          grad_positive->row(p) += coeff * anchor_view.row(i);
      }
    }

    if (want_grads) {
      for (Eigen::Index a = 0; a < m; ++a) {
        softmax(a) = a == i ? 0.0 : std::exp(sim_den(i, a) - row_max) / denom;
      }
      Eigen::MatrixXd* grad_den = as_written ? grad_anchor : grad_positive;
      const double coeff = scale / tau;
      for (Eigen::Index a = 0; a < m; ++a) {
        if (a == i || softmax(a) == 0.0) continue;
        if (grad_anchor != nullptr)
          grad_anchor->row(i) += coeff * softmax(a) * den_view.row(a);
        if (grad_den != nullptr)
          grad_den->row(a) += coeff * softmax(a) * anchor_view.row(i);
      }
    }
  }
  return loss * scale;
}

namespace {

// Stacks each identity's (anchor, positive) view-pair as two slots of the
// contrastive batch.
Eigen::MatrixXd duplicate_rows(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(2 * x.rows(), x.cols());
  out.topRows(x.rows()) = x;
  out.bottomRows(x.rows()) = x;
  return out;
}

}  // namespace

double cc_loss(const CCBatch& batch, CCGrads* grads) {
  const Eigen::Index n = batch.e_l.rows();
  if (n < 2) raise(ErrorCode::EmptyInput, "cc_loss needs at least two slots");
  if (batch.e_r.rows() != n || batch.e_fl.rows() != n || batch.e_fr.rows() != n)
    raise(ErrorCode::ShapeMismatch, "the four views must share slot count");
  if (static_cast<Eigen::Index>(batch.labels.size()) != n)
    raise(ErrorCode::ShapeMismatch, "labels must match slot count");
  const Eigen::Index dim = batch.e_l.cols();
  if (batch.e_r.cols() != dim || batch.e_fl.cols() != dim ||
      batch.e_fr.cols() != dim)
    raise(ErrorCode::DimMismatch, "the four views must share embedding dim");

  std::vector<int> labels2(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    labels2[i] = batch.labels[i];
    labels2[n + i] = batch.labels[i];
  }

  struct Pairing {
    const Eigen::MatrixXd* anchor;
    const Eigen::MatrixXd* positive;
    Eigen::MatrixXd* grad_anchor;
    Eigen::MatrixXd* grad_positive;
  };
  const bool want_grads = grads != nullptr;
  if (want_grads) {
    grads->e_l.setZero(n, dim);
    grads->e_r.setZero(n, dim);
    grads->e_fl.setZero(n, dim);
    grads->e_fr.setZero(n, dim);
  }
  const Pairing pairings[4] = {
      {&batch.e_l, &batch.e_fr, want_grads ? &grads->e_l : nullptr,
       want_grads ? &grads->e_fr : nullptr},
      {&batch.e_fl, &batch.e_r, want_grads ? &grads->e_fl : nullptr,
       want_grads ? &grads->e_r : nullptr},
      {&batch.e_r, &batch.e_l, want_grads ? &grads->e_r : nullptr,
       want_grads ? &grads->e_l : nullptr},
      {&batch.e_fr, &batch.e_fl, want_grads ? &grads->e_fr : nullptr,
       want_grads ? &grads->e_fl : nullptr},
  };

  double total = 0.0;
  Eigen::MatrixXd ga, gp;
  for (const Pairing& pairing : pairings) {
    const Eigen::MatrixXd anchor = duplicate_rows(*pairing.anchor);
    const Eigen::MatrixXd positive = duplicate_rows(*pairing.positive);
    total += cc_term(anchor, positive, labels2, batch.tau, batch.as_written,
                     want_grads ? &ga : nullptr, want_grads ? &gp : nullptr);
    if (want_grads) {
      // Mean over the four terms; fold the duplicated slots back together.
      *pairing.grad_anchor += 0.25 * (ga.topRows(n) + ga.bottomRows(n));
      *pairing.grad_positive += 0.25 * (gp.topRows(n) + gp.bottomRows(n));
    }
  }
  return total / 4.0;
}

double total_loss(double l_ce, double l_cc, const LossWeights& weights) {
  const double total = weights.w_ce * l_ce + weights.w_cc * l_cc;
  if (!std::isfinite(total))
    raise(ErrorCode::NonFiniteLoss, "loss is not finite: ce=" +
                                        std::to_string(l_ce) +
                                        " cc=" + std::to_string(l_cc));
  return total;
}

}  // namespace ccpv
