#pragma once

#include <nnghmc/common.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nnghmc {

/// Weights of one hidden-layer block: out = w2 * softplus(w1 * z + b1) + b2.
struct BlockParams {
  Matrix w1;  // hidden x inputs
  Vector b1;  // hidden
  Matrix w2;  // outputs x hidden
  Vector b2;  // outputs

  static BlockParams zeros_like(const BlockParams& p);
};

struct NetBlock {
  std::vector<Index> input_indices;
  std::vector<Index> output_indices;
  BlockParams params;
};

/// Per-coordinate standardization applied to q before the first layer.
struct InputScaler {
  Vector mean;
  Vector sd;

  static InputScaler identity(Index dim);
  /// Column means and standard deviations; zero spread maps to sd = 1.
  static InputScaler fit(const Matrix& rows);
  Vector apply(const Vector& q) const;
};

struct NetSpec {
  Index hidden = 100;  // units per block
  Index blocks = 1;    // contiguous output partitions, each seeing all inputs
  std::uint64_t seed = 1;
};

double softplus(double x);

/// One-hidden-layer softplus network mapping q to an approximation of grad U(q).
///
/// Output coordinates are partitioned across blocks: every coordinate is
/// produced by exactly one block. Blocks share no weights.
class MlpGradientNet {
 public:
  MlpGradientNet(Index dim, std::vector<NetBlock> blocks, InputScaler scaler);

  /// Glorot-uniform weights, zero biases, identity scaler.
  static MlpGradientNet initialize(Index dim, const NetSpec& spec);

  Index dim() const { return dim_; }
  Index total_hidden() const;
  std::size_t parameter_count() const;

  Vector forward(const Vector& q) const;
  /// Row i of the result is forward(inputs.row(i)).
  Matrix forward_rows(const Matrix& inputs) const;

  const std::vector<NetBlock>& blocks() const { return blocks_; }
  std::vector<NetBlock>& blocks() { return blocks_; }
  const InputScaler& scaler() const { return scaler_; }
  void set_scaler(InputScaler scaler);

  /// Versioned JSON text; doubles print with round-trip precision.
  std::string to_text() const;
  static MlpGradientNet from_text(const std::string& text);
  void save(const std::string& path) const;
  static MlpGradientNet load(const std::string& path);

  // Column-wise batch evaluation on already-scaled inputs (dim x batch).
  Matrix forward_scaled(const Matrix& z) const;

 private:
  void validate() const;
  bool full_input(std::size_t block) const { return full_input_[block]; }

  Index dim_;
  std::vector<NetBlock> blocks_;
  InputScaler scaler_;
  std::vector<bool> full_input_;

  friend struct Backprop;
};

/// Positions paired with exact gradients, one row per pair.
struct TrainingSet {
  Matrix inputs;
  Matrix labels;

  Index size() const { return inputs.rows(); }
};

/// Accumulates (q, grad U(q)) pairs during sampling.
class GradientCollector {
 public:
  void add(const Vector& q, const Vector& grad);
  std::size_t size() const { return inputs_.size(); }
  TrainingSet training_set() const;
  void clear();

 private:
  std::vector<Vector> inputs_;
  std::vector<Vector> labels_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long step = 0;
  std::vector<BlockParams> first_moment;
  std::vector<BlockParams> second_moment;

  static AdamState for_net(const MlpGradientNet& net, AdamConfig config = {});
  /// One update with bias-corrected moments; increments `step` by one.
  void apply(MlpGradientNet& net, const std::vector<BlockParams>& grads);
};

struct NetGradients {
  double loss = 0.0;
  std::vector<BlockParams> grads;
};

/// Mean over rows and all output coordinates of the squared error.
double mse_loss(const MlpGradientNet& net, const Matrix& inputs, const Matrix& labels);

/// Exact gradients of mse_loss with respect to every weight and bias.
NetGradients backprop_gradient(const MlpGradientNet& net, const Matrix& inputs,
                               const Matrix& labels);

struct TrainConfig {
  int epochs = 50;
  Index batch_size = 32;
  std::uint64_t seed = 1;
  AdamConfig adam;
  bool fit_scaler = true;
};

struct TrainResult {
  // Full-training-set loss before training, then the sample-weighted mean
  // minibatch loss of each epoch.
  std::vector<double> loss_trace;
  // Full-training-set loss after the last epoch.
  double final_loss = 0.0;
  long adam_steps = 0;
};

TrainResult train(MlpGradientNet& net, const TrainingSet& data, const TrainConfig& config,
                  AdamState& adam);
TrainResult train(MlpGradientNet& net, const TrainingSet& data, const TrainConfig& config);

}  // namespace nnghmc
