// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_MODEL_HPP
#define CCPV_MODEL_HPP

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ccpv/image.hpp"

namespace ccpv {

struct BackboneConfig {
  std::string arch = "compact-cnn";
  int embedding_dim = 128;
  int image_side = 128;
  // Arch-specific knobs, e.g. {"channels": "16,32,64,64"} for compact-cnn.
  std::map<std::string, std::string> params;
};

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const { return value.size(); }
};

// A trainable embedding network. forward() maps preprocessed 1-channel
// square images to unit-norm row embeddings (N x D); with keep_state the
// activations are retained so backward() can accumulate parameter gradients
// from dLoss/dEmbeddings.
class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual const BackboneConfig& config() const = 0;
  virtual Eigen::MatrixXd forward(const std::vector<ImageArray>& images,
                                  bool keep_state) = 0;
  virtual void backward(const Eigen::MatrixXd& grad_embeddings) = 0;
  virtual std::vector<ParamTensor*> parameters() = 0;

  Eigen::MatrixXd embed(const std::vector<ImageArray>& images) {
    return forward(images, /*keep_state=*/false);
  }
  void zero_grad();
  std::size_t parameter_count();
};

// Seeded construction; identical (config, seed) yields identical parameters.
std::unique_ptr<Backbone> create_backbone(const BackboneConfig& config,
                                          std::uint64_t seed);
std::vector<std::string> registered_archs();

// Bias-free linear classifier over identities.
struct ClassifierHead {
  ParamTensor weight;  // shape {dim, classes}

  int dim() const { return weight.shape.empty() ? 0 : weight.shape[0]; }
  int classes() const { return weight.shape.size() < 2 ? 0 : weight.shape[1]; }

  static ClassifierHead make(int dim, int classes, std::uint64_t seed);
};

// logits = embeddings * W, one row per template.
Eigen::MatrixXd classify(const ClassifierHead& head,
                         const Eigen::MatrixXd& embeddings);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::vector<ParamTensor*> params, double lr,
                         double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);
  void step();
  void zero_grad();

 private:
  std::vector<ParamTensor*> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
};

// Self-describing training artifact: architecture, parameters, the identity
// vocabulary the head was trained over, and the originating train config.
struct Checkpoint {
  BackboneConfig backbone;
  std::vector<ParamTensor> model_params;
  ParamTensor head_weight;  // empty when no head was saved
  std::vector<std::string> class_vocab;
  std::string train_config_json;  // empty when untrained

  bool has_head() const { return !head_weight.value.empty(); }
};

void save_checkpoint(const std::string& path, Backbone& model,
                     const ClassifierHead* head,
                     const std::vector<std::string>& class_vocab,
                     const std::string& train_config_json);
Checkpoint load_checkpoint(const std::string& path);

// Instantiates the architecture recorded in the checkpoint and restores its
// parameters.
std::unique_ptr<Backbone> restore_backbone(const Checkpoint& checkpoint);

}  // namespace ccpv

#endif  // CCPV_MODEL_HPP
