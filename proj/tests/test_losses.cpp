// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ccpv/common.hpp"
#include "ccpv/losses.hpp"
#include "oracles.hpp"

using namespace ccpv;

namespace {

CCBatch random_cc_batch(int n, int d, double tau, bool as_written,
                        std::uint64_t seed) {
  CCBatch batch;
  batch.e_l = oracle::random_unit_rows(n, d, seed);
  batch.e_r = oracle::random_unit_rows(n, d, seed + 1);
  batch.e_fl = oracle::random_unit_rows(n, d, seed + 2);
  batch.e_fr = oracle::random_unit_rows(n, d, seed + 3);
  batch.labels.resize(n);
  std::iota(batch.labels.begin(), batch.labels.end(), 0);
  batch.tau = tau;
  batch.as_written = as_written;
  return batch;
}

}  // namespace

TEST_CASE("cross entropy of uniform logits is log C") {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Constant(3, 4, 0.7);
  CHECK(cross_entropy(logits, {0, 1, 2}) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy of a confident correct prediction is near zero") {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 3);
  logits(0, 1) = 1e6;
  logits(1, 2) = 1e6;
  const double loss = cross_entropy(logits, {1, 2});
  CHECK(std::isfinite(loss));
  CHECK(loss >= 0.0);
  CHECK(loss < 1e-6);
}

TEST_CASE("cross entropy matches the scalar oracle") {
  Rng rng = make_rng(50);
  std::normal_distribution<double> normal(0.0, 2.0);
  Eigen::MatrixXd logits(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) logits(i, j) = normal(rng);
  const std::vector<int> labels = {4, 0, 2};
  CHECK(cross_entropy(logits, labels) ==
        doctest::Approx(oracle::cross_entropy(logits, labels)).epsilon(1e-6));
}

TEST_CASE("cross entropy gradient matches finite differences") {
  Eigen::MatrixXd logits = 2.0 * oracle::random_unit_rows(4, 6, 51);
  const std::vector<int> labels = {0, 5, 2, 2};
  Eigen::MatrixXd grad;
  cross_entropy(logits, labels, &grad);
  const Eigen::MatrixXd numeric = oracle::fd_grad(
      logits, [&] { return cross_entropy(logits, labels); });
  CHECK(oracle::max_rel_err(grad, numeric) < 1e-4);
}

TEST_CASE("cross entropy rejects bad labels") {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 3);
  try {
    cross_entropy(logits, {0, 3});
    FAIL("unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelOutOfRange);
  }
  CHECK_THROWS_AS(cross_entropy(logits, {-1, 0}), Error);
  CHECK_THROWS_AS(cross_entropy(logits, {0}), Error);  // label count mismatch
  CHECK_THROWS_AS(cross_entropy(Eigen::MatrixXd(), {}), Error);
}

TEST_CASE("consistency term on two orthogonal identities matches the oracle") {
  // Two identities, two slots each; anchor and positive views coincide.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(4, 4);
  rows(0, 0) = 1.0;
  rows(1, 0) = 1.0;
  rows(2, 1) = 1.0;
  rows(3, 1) = 1.0;
  const std::vector<int> labels = {0, 0, 1, 1};
  for (bool as_written : {true, false}) {
    const double got = cc_term(rows, rows, labels, 1.0, as_written);
    const double want = oracle::cc_term(rows, rows, labels, 1.0, as_written);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
    CHECK(got > 0.0);
  }
}

TEST_CASE("consistency term matches the oracle on random batches") {
  int case_id = 0;
  for (int n : {4, 6, 8}) {
    for (double tau : {0.05, 0.5, 1.0}) {
      for (bool as_written : {true, false}) {
        const Eigen::MatrixXd anchor =
            oracle::random_unit_rows(n, 8, 60 + case_id);
        const Eigen::MatrixXd positive =
            oracle::random_unit_rows(n, 8, 90 + case_id);
        const std::vector<int> labels =
            oracle::random_labels(n, n / 2, 120 + case_id);
        const double got = cc_term(anchor, positive, labels, tau, as_written);
        const double want =
            oracle::cc_term(anchor, positive, labels, tau, as_written);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
        ++case_id;
      }
    }
  }
}

TEST_CASE("consistency term rejects batches with no positive pairs") {
  const Eigen::MatrixXd rows = oracle::random_unit_rows(3, 4, 70);
  try {
    cc_term(rows, rows, {0, 1, 2}, 0.5, true);
    FAIL("unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBatch);
  }
}

TEST_CASE("consistency term skips anchors without positives") {
  // Labels {0,0,1}: slot 2 anchors nothing but still serves as a negative.
  const Eigen::MatrixXd anchor = oracle::random_unit_rows(3, 5, 71);
  const Eigen::MatrixXd positive = oracle::random_unit_rows(3, 5, 72);
  const std::vector<int> labels = {0, 0, 1};
  bool degenerate = true;
  const double want = oracle::cc_term(anchor, positive, labels, 0.3, false,
                                      &degenerate);
  CHECK_FALSE(degenerate);
  CHECK(cc_term(anchor, positive, labels, 0.3, false) ==
        doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("consistency term gradients match finite differences") {
  const int n = 4, d = 4;
  const double tau = 0.1;
  const std::vector<int> labels = {0, 1, 0, 1};
  for (bool as_written : {true, false}) {
    Eigen::MatrixXd anchor = oracle::random_unit_rows(n, d, 80);
    Eigen::MatrixXd positive = oracle::random_unit_rows(n, d, 81);
    Eigen::MatrixXd ga, gp;
    cc_term(anchor, positive, labels, tau, as_written, &ga, &gp);

    const Eigen::MatrixXd fd_anchor = oracle::fd_grad(anchor, [&] {
      return cc_term(anchor, positive, labels, tau, as_written);
    });
    const Eigen::MatrixXd fd_positive = oracle::fd_grad(positive, [&] {
      return cc_term(anchor, positive, labels, tau, as_written);
    });
    CHECK(oracle::max_rel_err(ga, fd_anchor) < 1e-4);
    CHECK(oracle::max_rel_err(gp, fd_positive) < 1e-4);
  }
}

TEST_CASE("cc_loss with identical views reduces to one term") {
  // All four views equal and both identities orthogonal: the four pairings
  // are indistinguishable, so the mean equals any single duplicated-stack
  // term.
  CCBatch batch;
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 3);
  rows(0, 0) = 1.0;
  rows(1, 1) = 1.0;
  batch.e_l = batch.e_r = batch.e_fl = batch.e_fr = rows;
  batch.labels = {0, 1};
  batch.tau = 1.0;
  batch.as_written = true;

  const double loss = cc_loss(batch);
  const Eigen::MatrixXd stacked = oracle::stack_twice(rows);
  const double single =
      cc_term(stacked, stacked, oracle::labels_twice(batch.labels), 1.0, true);
  CHECK(loss == doctest::Approx(single).epsilon(1e-9));
}

TEST_CASE("cc_loss matches the four-term oracle on random batches") {
  int case_id = 0;
  for (int n : {2, 3, 5}) {
    for (double tau : {0.05, 0.5, 1.0}) {
      for (bool as_written : {true, false}) {
        CCBatch batch = random_cc_batch(n, 6, tau, as_written, 200 + 10 * case_id);
        const double got = cc_loss(batch);
        const double want =
            oracle::cc_loss(batch.e_l, batch.e_r, batch.e_fl, batch.e_fr,
                            batch.labels, tau, as_written);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
        ++case_id;
      }
    }
  }
}

TEST_CASE("cc_loss is invariant under consistent slot permutation") {
  CCBatch batch = random_cc_batch(5, 6, 0.2, true, 300);
  const double base = cc_loss(batch);

  const std::vector<int> perm = {3, 0, 4, 1, 2};
  CCBatch shuffled = batch;
  for (int i = 0; i < 5; ++i) {
    shuffled.e_l.row(i) = batch.e_l.row(perm[i]);
    shuffled.e_r.row(i) = batch.e_r.row(perm[i]);
    shuffled.e_fl.row(i) = batch.e_fl.row(perm[i]);
    shuffled.e_fr.row(i) = batch.e_fr.row(perm[i]);
    shuffled.labels[i] = batch.labels[perm[i]];
  }
  CHECK(cc_loss(shuffled) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cc_loss gradients match finite differences") {
  CCBatch batch = random_cc_batch(3, 4, 0.1, true, 400);
  CCGrads grads;
  cc_loss(batch, &grads);

  auto value = [&] { return cc_loss(batch); };
  CHECK(oracle::max_rel_err(grads.e_l, oracle::fd_grad(batch.e_l, value)) < 1e-4);
  CHECK(oracle::max_rel_err(grads.e_r, oracle::fd_grad(batch.e_r, value)) < 1e-4);
  CHECK(oracle::max_rel_err(grads.e_fl, oracle::fd_grad(batch.e_fl, value)) < 1e-4);
  CHECK(oracle::max_rel_err(grads.e_fr, oracle::fd_grad(batch.e_fr, value)) < 1e-4);
}

TEST_CASE("pulling a positive pair closer lowers the consistency loss") {
  CCBatch batch = random_cc_batch(4, 8, 0.5, false, 500);
  const double before = cc_loss(batch);
  // Nudge the flipped-right view of slot 0 toward the left view of slot 0.
  batch.e_fr.row(0) = (0.2 * batch.e_fr.row(0) + 0.8 * batch.e_l.row(0)).normalized();
  const double after = cc_loss(batch);
  CHECK(after < before);
}

TEST_CASE("cc_loss validates shapes") {
  CCBatch batch = random_cc_batch(3, 4, 0.1, true, 600);
  batch.e_fr = oracle::random_unit_rows(2, 4, 601);
  CHECK_THROWS_AS(cc_loss(batch), Error);
  batch = random_cc_batch(3, 4, 0.1, true, 602);
  batch.labels.pop_back();
  CHECK_THROWS_AS(cc_loss(batch), Error);
}

TEST_CASE("total loss combines the weighted parts") {
  CHECK(total_loss(1.0, 2.0, {.w_ce = 1.0, .w_cc = 1.0}) == 3.0);
  CHECK(total_loss(1.0, 2.0, {.w_ce = 0.5, .w_cc = 2.0}) == doctest::Approx(4.5));
  CHECK(total_loss(1.0, 100.0, {.w_ce = 1.0, .w_cc = 0.0}) == 1.0);
  try {
    total_loss(std::numeric_limits<double>::quiet_NaN(), 0.0, {});
    FAIL("unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteLoss);
  }
  CHECK_THROWS_AS(total_loss(std::numeric_limits<double>::infinity(), 0.0, {}),
                  Error);
}
