// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_LOSSES_HPP
#define CCPV_LOSSES_HPP

#include <Eigen/Core>
#include <vector>

namespace ccpv {

// Mean softmax cross-entropy over rows of `logits` (n x C) against integer
// labels in [0, C). Numerically stabilized with max-subtraction. When `grad`
// is non-null it receives dLoss/dLogits (n x C).
double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     Eigen::MatrixXd* grad = nullptr);

// One chirality-consistency contrastive term over two aligned embedding
// views (m x D rows, one label per slot). For each anchor slot i:
//
//   A(i) = { a != i },  P(i) = { p in A(i) : labels[p] == labels[i] }
//   term_i = -(1/|P(i)|) * sum_{p in P(i)}
//              log( exp(anchor_i . positive_p / tau)
//                   / sum_{a in A(i)} exp(anchor_i . den_a / tau) )
//
// where den is the anchor view when as_written=true (each anchor competes
// against its own view in the denominator) and the positive view otherwise
// (standard cross-view denominator). Anchors with empty P(i) are skipped and
// the result is the mean over contributing anchors; if every anchor is
// skipped the batch is degenerate and an error is raised. Slots whose label
// appears only once therefore do not anchor: callers pairing each identity
// once per view must stack the pair (see cc_loss). Gradients with respect to
// both views are accumulated into the optional outputs (must be preallocated
// to the view shape, zero-filled by this function).
double cc_term(const Eigen::MatrixXd& anchor_view,
               const Eigen::MatrixXd& positive_view,
               const std::vector<int>& labels, double tau, bool as_written,
               Eigen::MatrixXd* grad_anchor = nullptr,
               Eigen::MatrixXd* grad_positive = nullptr);

// Four aligned embedding views of a batch of identity slots. Index i of each
// view belongs to the same identity (labels[i]).
struct CCBatch {
  Eigen::MatrixXd e_l;   // left images
  Eigen::MatrixXd e_r;   // right images
  Eigen::MatrixXd e_fl;  // flipped left images
  Eigen::MatrixXd e_fr;  // flipped right images
  std::vector<int> labels;
  double tau = 0.07;
  bool as_written = true;
};

struct CCGrads {
  Eigen::MatrixXd e_l, e_r, e_fl, e_fr;
};

// Mean of the four chirality-consistency terms with (anchor, positive) view
// pairings (l, fr), (fl, r), (r, l), (fr, fl). Each identity contributes its
// view-pair as two slots of the contrastive batch: every term evaluates
// cc_term on the duplicated stacks (concat(A, A), concat(P, P)) with labels
// repeated, which realizes the 2n-element index set of the formulation and
// keeps once-per-identity batches trainable.
double cc_loss(const CCBatch& batch, CCGrads* grads = nullptr);

struct LossWeights {
  double w_ce = 1.0;
  double w_cc = 1.0;
};

// w_ce * l_ce + w_cc * l_cc; raises NonFiniteLoss when the result is not
// finite.
double total_loss(double l_ce, double l_cc, const LossWeights& weights);

}  // namespace ccpv

#endif  // CCPV_LOSSES_HPP
