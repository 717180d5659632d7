// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ccpv/common.hpp"

namespace ccpv {
namespace {

using json = nlohmann::json;
using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

// Dense NCHW activation batch.
struct FeatureBatch {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;

  FeatureBatch() = default;
  FeatureBatch(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

  double* image(int i) {
    return data.data() + static_cast<std::size_t>(i) * c * h * w;
  }
  const double* image(int i) const {
    return data.data() + static_cast<std::size_t>(i) * c * h * w;
  }
};

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t total = 1;
  for (int d : shape) total *= static_cast<std::size_t>(d);
  return total;
}

ParamTensor make_param(const std::string& name, std::vector<int> shape) {
  ParamTensor p;
  p.name = name;
  p.shape = std::move(shape);
  p.value.assign(shape_size(p.shape), 0.0);
  p.grad.assign(p.value.size(), 0.0);
  return p;
}

void he_init(ParamTensor& p, int fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (double& v : p.value) v = dist(rng);
}

// 3x3 convolution, padding 1, square input.
class Conv2d {
 public:
  Conv2d(const std::string& name, int cin, int cout, int stride, Rng& rng)
      : cin_(cin), cout_(cout), stride_(stride),
        weight_(make_param(name + ".weight", {cout, cin, 3, 3})),
        bias_(make_param(name + ".bias", {cout})) {
    he_init(weight_, cin * 9, rng);
    // A small positive bias keeps every ReLU alive at init; with few
    // channels and aggressive striding, zero biases can kill the whole
    // feature map and freeze training at the start.
    for (double& v : bias_.value) v = 0.1;
  }

  int out_side(int in_side) const { return (in_side - 1) / stride_ + 1; }

  FeatureBatch forward(const FeatureBatch& x, bool keep_state) {
    const int oh = out_side(x.h), ow = out_side(x.w);
    FeatureBatch y(x.n, cout_, oh, ow);
    ConstMatMap weight(weight_.value.data(), cout_, cin_ * 9);
    Eigen::Map<const Eigen::VectorXd> bias(bias_.value.data(), cout_);
    cols_.resize(static_cast<std::size_t>(cin_) * 9 * oh * ow);
    for (int i = 0; i < x.n; ++i) {
      im2col(x.image(i), x.h, x.w, oh, ow);
      ConstMatMap cols(cols_.data(), cin_ * 9, oh * ow);
      MatMap out(y.image(i), cout_, oh * ow);
      out.noalias() = weight * cols;
      out.colwise() += bias;
    }
    if (keep_state) input_ = x;
    return y;
  }

  FeatureBatch backward(const FeatureBatch& dy) {
    const FeatureBatch& x = input_;
    const int oh = dy.h, ow = dy.w;
    FeatureBatch dx(x.n, x.c, x.h, x.w);
    MatMap dweight(weight_.grad.data(), cout_, cin_ * 9);
    Eigen::Map<Eigen::VectorXd> dbias(bias_.grad.data(), cout_);
    cols_.resize(static_cast<std::size_t>(cin_) * 9 * oh * ow);
    dcols_.resize(cols_.size());
    for (int i = 0; i < x.n; ++i) {
      im2col(x.image(i), x.h, x.w, oh, ow);
      ConstMatMap cols(cols_.data(), cin_ * 9, oh * ow);
      ConstMatMap g(dy.image(i), cout_, oh * ow);
      ConstMatMap weight(weight_.value.data(), cout_, cin_ * 9);
      dweight.noalias() += g * cols.transpose();
      dbias.noalias() += g.rowwise().sum();
      MatMap dcols(dcols_.data(), cin_ * 9, oh * ow);
      dcols.noalias() = weight.transpose() * g;
      col2im(dx.image(i), x.h, x.w, oh, ow);
    }
    return dx;
  }

  ParamTensor& weight() { return weight_; }
  ParamTensor& bias() { return bias_; }
  void release_state() { input_ = FeatureBatch(); }

 private:
  void im2col(const double* x, int h, int w, int oh, int ow) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    double* out = cols_.data();
    for (int c = 0; c < cin_; ++c) {
      const double* src = x + c * plane;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ + ky - 1;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ + kx - 1;
              *out++ = (iy < 0 || iy >= h || ix < 0 || ix >= w)
                           ? 0.0
                           : src[static_cast<std::size_t>(iy) * w + ix];
            }
          }
        }
      }
    }
  }

  void col2im(double* dx, int h, int w, int oh, int ow) const {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const double* src = dcols_.data();
    for (int c = 0; c < cin_; ++c) {
      double* dst = dx + c * plane;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ + ky - 1;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ + kx - 1;
              const double v = *src++;
              if (iy >= 0 && iy < h && ix >= 0 && ix < w)
                dst[static_cast<std::size_t>(iy) * w + ix] += v;
            }
          }
        }
      }
    }
  }

  int cin_, cout_, stride_;
  ParamTensor weight_, bias_;
  FeatureBatch input_;
  std::vector<double> cols_, dcols_;
};

class Relu {
 public:
  FeatureBatch forward(FeatureBatch x, bool keep_state) {
    for (double& v : x.data) v = v > 0.0 ? v : 0.0;
    if (keep_state) output_ = x;
    return x;
  }
  FeatureBatch backward(FeatureBatch dy) const {
    for (std::size_t i = 0; i < dy.data.size(); ++i) {
      if (output_.data[i] <= 0.0) dy.data[i] = 0.0;
    }
    return dy;
  }
  void release_state() { output_ = FeatureBatch(); }

 private:
  FeatureBatch output_;
};

class GlobalAvgPool {
 public:
  Eigen::MatrixXd forward(const FeatureBatch& x, bool keep_state) {
    Eigen::MatrixXd y(x.n, x.c);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int i = 0; i < x.n; ++i) {
      const double* src = x.image(i);
      for (int c = 0; c < x.c; ++c) {
        const double* p = src + c * plane;
        y(i, c) = std::accumulate(p, p + plane, 0.0) / static_cast<double>(plane);
      }
    }
    if (keep_state) { h_ = x.h; w_ = x.w; }
    return y;
  }
  FeatureBatch backward(const Eigen::MatrixXd& dy) const {
    FeatureBatch dx(static_cast<int>(dy.rows()), static_cast<int>(dy.cols()), h_, w_);
    const std::size_t plane = static_cast<std::size_t>(h_) * w_;
    const double inv = 1.0 / static_cast<double>(plane);
    for (int i = 0; i < dx.n; ++i) {
      double* dst = dx.image(i);
      for (int c = 0; c < dx.c; ++c) {
        std::fill(dst + c * plane, dst + (c + 1) * plane, dy(i, c) * inv);
      }
    }
    return dx;
  }

 private:
  int h_ = 0, w_ = 0;
};

class Linear {
 public:
  Linear(const std::string& name, int in, int out, Rng& rng)
      : in_(in), out_(out),
        weight_(make_param(name + ".weight", {out, in})),
        bias_(make_param(name + ".bias", {out})) {
    std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / in));
    for (double& v : weight_.value) v = dist(rng);
    // A random (not zero) bias keeps the projection away from the exact
    // zero vector even when an input's features all die upstream; the
    // normalization that follows has no defined direction at zero.
    std::normal_distribution<double> bias_dist(0.0, 0.01);
    for (double& v : bias_.value) v = bias_dist(rng);
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, bool keep_state) {
    ConstMatMap weight(weight_.value.data(), out_, in_);
    Eigen::Map<const Eigen::VectorXd> bias(bias_.value.data(), out_);
    Eigen::MatrixXd y = x * weight.transpose();
    y.rowwise() += bias.transpose();
    if (keep_state) input_ = x;
    return y;
  }

  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy) {
    MatMap dweight(weight_.grad.data(), out_, in_);
    Eigen::Map<Eigen::VectorXd> dbias(bias_.grad.data(), out_);
    dweight.noalias() += dy.transpose() * input_;
    dbias.noalias() += dy.colwise().sum().transpose();
    ConstMatMap weight(weight_.value.data(), out_, in_);
    return dy * weight;
  }

  ParamTensor& weight() { return weight_; }
  ParamTensor& bias() { return bias_; }
  void release_state() { input_.resize(0, 0); }

 private:
  int in_, out_;
  ParamTensor weight_, bias_;
  Eigen::MatrixXd input_;
};

class L2Normalize {
 public:
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, bool keep_state) {
    Eigen::VectorXd norms = x.rowwise().norm().cwiseMax(1e-12);
    Eigen::MatrixXd y = norms.cwiseInverse().asDiagonal() * x;
    if (keep_state) { output_ = y; norms_ = norms; }
    return y;
  }
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy) const {
    // dx_i = (dy_i - y_i (y_i . dy_i)) / ||x_i||
    Eigen::VectorXd proj = (dy.array() * output_.array()).rowwise().sum().matrix();
    Eigen::MatrixXd dx = dy - proj.asDiagonal() * output_;
    return norms_.cwiseInverse().asDiagonal() * dx;
  }

 private:
  Eigen::MatrixXd output_;
  Eigen::VectorXd norms_;
};

std::vector<int> parse_channels(const BackboneConfig& config) {
  std::vector<int> channels = {16, 32, 64, 64};
  auto it = config.params.find("channels");
  if (it != config.params.end()) {
    channels.clear();
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        channels.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        raise(ErrorCode::Usage, "bad channels spec '" + it->second + "'");
      }
    }
    if (channels.size() != 4)
      raise(ErrorCode::Usage, "compact-cnn expects exactly 4 channel counts");
    for (int c : channels)
      if (c <= 0) raise(ErrorCode::Usage, "channel counts must be positive");
  }
  return channels;
}

// Four 3x3 conv blocks (strides 1,2,2,2) -> global average pool -> linear
// projection -> L2 normalization.
class CompactCnn : public Backbone {
 public:
  CompactCnn(const BackboneConfig& config, std::uint64_t seed) : config_(config) {
    if (config.embedding_dim < 2)
      raise(ErrorCode::Usage, "embedding_dim must be at least 2");
    if (config.image_side < 8)
      raise(ErrorCode::Usage, "compact-cnn needs image_side >= 8");
    const std::vector<int> channels = parse_channels(config);
    const int strides[4] = {1, 2, 2, 2};
    convs_.reserve(4);
    int cin = 1;
    for (int b = 0; b < 4; ++b) {
      Rng rng = make_rng(seed, 0xC0DE, static_cast<std::uint64_t>(b));
      convs_.emplace_back("conv" + std::to_string(b + 1), cin, channels[b],
                          strides[b], rng);
      cin = channels[b];
    }
    Rng rng = make_rng(seed, 0xC0DE, 99);
    fc_ = std::make_unique<Linear>("fc", cin, config.embedding_dim, rng);
  }

  const BackboneConfig& config() const override { return config_; }

  Eigen::MatrixXd forward(const std::vector<ImageArray>& images,
                          bool keep_state) override {
    if (images.empty()) raise(ErrorCode::EmptyInput, "no images to embed");
    const int side = config_.image_side;
    FeatureBatch x(static_cast<int>(images.size()), 1, side, side);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const ImageArray& img = images[i];
      if (img.channels != 1 || img.height != side || img.width != side) {
        raise(ErrorCode::ShapeMismatch,
              "expected preprocessed 1x" + std::to_string(side) + "x" +
                  std::to_string(side) + " image, got " +
                  std::to_string(img.channels) + "x" + std::to_string(img.height) +
                  "x" + std::to_string(img.width));
      }
      std::memcpy(x.image(static_cast<int>(i)), img.data.data(),
                  img.data.size() * sizeof(double));
    }
    for (int b = 0; b < 4; ++b) {
      x = convs_[b].forward(x, keep_state);
      x = relus_[b].forward(std::move(x), keep_state);
    }
    Eigen::MatrixXd pooled = pool_.forward(x, keep_state);
    Eigen::MatrixXd projected = fc_->forward(pooled, keep_state);
    Eigen::MatrixXd embeddings = norm_.forward(projected, keep_state);
    if (!keep_state) release_state();
    return embeddings;
  }

  void backward(const Eigen::MatrixXd& grad_embeddings) override {
    Eigen::MatrixXd g = norm_.backward(grad_embeddings);
    g = fc_->backward(g);
    FeatureBatch fg = pool_.backward(g);
    for (int b = 3; b >= 0; --b) {
      fg = relus_[b].backward(std::move(fg));
      fg = convs_[b].backward(fg);
    }
  }

  std::vector<ParamTensor*> parameters() override {
    std::vector<ParamTensor*> params;
    for (Conv2d& conv : convs_) {
      params.push_back(&conv.weight());
      params.push_back(&conv.bias());
    }
    params.push_back(&fc_->weight());
    params.push_back(&fc_->bias());
    return params;
  }

 private:
  void release_state() {
    for (Conv2d& conv : convs_) conv.release_state();
    for (Relu& relu : relus_) relu.release_state();
    fc_->release_state();
  }

  BackboneConfig config_;
  std::vector<Conv2d> convs_;
  Relu relus_[4];
  GlobalAvgPool pool_;
  std::unique_ptr<Linear> fc_;
  L2Normalize norm_;
};

using Factory =
    std::function<std::unique_ptr<Backbone>(const BackboneConfig&, std::uint64_t)>;

const std::vector<std::pair<std::string, Factory>>& registry() {
  static const std::vector<std::pair<std::string, Factory>> entries = {
      {"compact-cnn",
       [](const BackboneConfig& cfg, std::uint64_t seed) {
         return std::make_unique<CompactCnn>(cfg, seed);
       }},
  };
  return entries;
}

}  // namespace

void Backbone::zero_grad() {
  for (ParamTensor* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

std::size_t Backbone::parameter_count() {
  std::size_t total = 0;
  for (ParamTensor* p : parameters()) total += p->size();
  return total;
}

std::unique_ptr<Backbone> create_backbone(const BackboneConfig& config,
                                          std::uint64_t seed) {
  for (const auto& [name, factory] : registry()) {
    if (name == config.arch) return factory(config, seed);
  }
  raise(ErrorCode::UnknownArch, "no backbone registered as '" + config.arch + "'");
}

std::vector<std::string> registered_archs() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

ClassifierHead ClassifierHead::make(int dim, int classes, std::uint64_t seed) {
  if (dim <= 0 || classes <= 0)
    raise(ErrorCode::Usage, "classifier head needs positive dim and classes");
  ClassifierHead head;
  head.weight = make_param("head.weight", {dim, classes});
  Rng rng = make_rng(seed, 0x4EAD);
  std::normal_distribution<double> dist(0.0, 0.01);
  for (double& v : head.weight.value) v = dist(rng);
  return head;
}

Eigen::MatrixXd classify(const ClassifierHead& head,
                         const Eigen::MatrixXd& embeddings) {
  if (embeddings.cols() != head.dim()) {
    raise(ErrorCode::DimMismatch,
          "embeddings have dim " + std::to_string(embeddings.cols()) +
              ", head expects " + std::to_string(head.dim()));
  }
  ConstMatMap weight(head.weight.value.data(), head.dim(), head.classes());
  return embeddings * weight;
}

AdamOptimizer::AdamOptimizer(std::vector<ParamTensor*> params, double lr,
                             double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (ParamTensor* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void AdamOptimizer::step() {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, step_count_);
  const double bc2 = 1.0 - std::pow(beta2_, step_count_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    ParamTensor& p = *params_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
      v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
      const double mhat = m_[k][i] / bc1;
      const double vhat = v_[k][i] / bc2;
      p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void AdamOptimizer::zero_grad() {
  for (ParamTensor* p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'C', 'P', 'V', 'C', 'K', 'P', '1'};

json config_to_json(const BackboneConfig& config) {
  return json{{"arch", config.arch},
              {"embedding_dim", config.embedding_dim},
              {"image_side", config.image_side},
              {"params", config.params}};
}

BackboneConfig config_from_json(const json& j) {
  BackboneConfig config;
  config.arch = j.at("arch").get<std::string>();
  config.embedding_dim = j.at("embedding_dim").get<int>();
  config.image_side = j.at("image_side").get<int>();
  if (j.contains("params"))
    config.params = j.at("params").get<std::map<std::string, std::string>>();
  return config;
}

}  // namespace

void save_checkpoint(const std::string& path, Backbone& model,
                     const ClassifierHead* head,
                     const std::vector<std::string>& class_vocab,
                     const std::string& train_config_json) {
  json header;
  header["version"] = 1;
  header["backbone"] = config_to_json(model.config());
  header["class_vocab"] = class_vocab;
  if (!train_config_json.empty())
    header["train_config"] = json::parse(train_config_json);

  json tensor_list = json::array();
  std::vector<const ParamTensor*> tensors;
  for (ParamTensor* p : model.parameters()) {
    tensor_list.push_back(json{{"name", p->name}, {"shape", p->shape}});
    tensors.push_back(p);
  }
  if (head != nullptr) {
    tensor_list.push_back(
        json{{"name", head->weight.name}, {"shape", head->weight.shape}});
    tensors.push_back(&head->weight);
  }
  header["tensors"] = tensor_list;

  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write checkpoint: " + path);
  const std::string header_bytes = header.dump();
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const std::uint64_t len = header_bytes.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header_bytes.data(), static_cast<std::streamsize>(len));
  for (const ParamTensor* p : tensors) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) raise(ErrorCode::Io, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    raise(ErrorCode::BadFormat, "not a checkpoint file: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len == 0 || len > (1ULL << 32))
    raise(ErrorCode::BadFormat, "corrupt checkpoint header: " + path);
  std::string header_bytes(len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(len));
  if (!in) raise(ErrorCode::BadFormat, "truncated checkpoint header: " + path);

  json header;
  try {
    header = json::parse(header_bytes);
  } catch (const json::exception& e) {
    raise(ErrorCode::BadFormat, std::string("bad checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.backbone = config_from_json(header.at("backbone"));
    ckpt.class_vocab = header.at("class_vocab").get<std::vector<std::string>>();
    if (header.contains("train_config"))
      ckpt.train_config_json = header.at("train_config").dump();
    for (const json& t : header.at("tensors")) {
      ParamTensor p = make_param(t.at("name").get<std::string>(),
                                 t.at("shape").get<std::vector<int>>());
      in.read(reinterpret_cast<char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
      if (!in) raise(ErrorCode::BadFormat, "truncated checkpoint tensors: " + path);
      if (p.name == "head.weight") {
        ckpt.head_weight = std::move(p);
      } else {
        ckpt.model_params.push_back(std::move(p));
      }
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::BadFormat, std::string("bad checkpoint header: ") + e.what());
  }
  return ckpt;
}

std::unique_ptr<Backbone> restore_backbone(const Checkpoint& checkpoint) {
  std::unique_ptr<Backbone> model = create_backbone(checkpoint.backbone, 0);
  std::vector<ParamTensor*> params = model->parameters();
  if (params.size() != checkpoint.model_params.size())
    raise(ErrorCode::BadFormat, "checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamTensor& stored = checkpoint.model_params[i];
    if (params[i]->name != stored.name || params[i]->size() != stored.size())
      raise(ErrorCode::BadFormat, "checkpoint tensor mismatch at " + stored.name);
    params[i]->value = stored.value;
  }
  return model;
}

}  // namespace ccpv
