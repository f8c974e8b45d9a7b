#include <nnghmc/mlp.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nnghmc {

using json = nlohmann::json;

namespace {

constexpr const char* kFormatName = "nnghmc.mlp_gradient_net";
constexpr int kFormatVersion = 1;

template <class Derived>
auto softplus_array(const Eigen::ArrayBase<Derived>& x) {
  return x.max(0.0) + (1.0 + (-x.abs()).exp()).log();
}

Matrix gather_rows(const Matrix& z, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), z.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = z.row(idx[k]);
  return out;
}

bool is_identity_map(const std::vector<Index>& idx, Index dim) {
  if (static_cast<Index>(idx.size()) != dim) return false;
  for (Index i = 0; i < dim; ++i) {
    if (idx[static_cast<std::size_t>(i)] != i) return false;
  }
  return true;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"shape", {m.rows(), m.cols()}}, {"data", std::move(rows)}};
}

json vector_to_json(const Vector& v) {
  return json{{"shape", {v.size()}}, {"data", std::vector<double>(v.data(), v.data() + v.size())}};
}

Matrix matrix_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<Index>>();
  if (shape.size() != 2) throw std::runtime_error("mlp: expected a 2-d array");
  const json& data = j.at("data");
  if (static_cast<Index>(data.size()) != shape[0]) throw std::runtime_error("mlp: row count mismatch");
  Matrix m(shape[0], shape[1]);
  for (Index i = 0; i < shape[0]; ++i) {
    const auto row = data[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Index>(row.size()) != shape[1]) throw std::runtime_error("mlp: column count mismatch");
    for (Index k = 0; k < shape[1]; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  return m;
}

Vector vector_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 1 || static_cast<Index>(data.size()) != shape[0]) {
    throw std::runtime_error("mlp: malformed 1-d array");
  }
  return Eigen::Map<const Vector>(data.data(), shape[0]);
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

BlockParams BlockParams::zeros_like(const BlockParams& p) {
  return {Matrix::Zero(p.w1.rows(), p.w1.cols()), Vector::Zero(p.b1.size()),
          Matrix::Zero(p.w2.rows(), p.w2.cols()), Vector::Zero(p.b2.size())};
}

InputScaler InputScaler::identity(Index dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

InputScaler InputScaler::fit(const Matrix& rows) {
  if (rows.rows() == 0) throw std::invalid_argument("InputScaler::fit: no rows");
  InputScaler s;
  s.mean = rows.colwise().mean().transpose();
  s.sd.resize(rows.cols());
  for (Index j = 0; j < rows.cols(); ++j) {
    const double var = (rows.col(j).array() - s.mean[j]).square().mean();
    s.sd[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Vector InputScaler::apply(const Vector& q) const {
  return (q - mean).cwiseQuotient(sd);
}

// ------------------------------------------------------------------ net

MlpGradientNet::MlpGradientNet(Index dim, std::vector<NetBlock> blocks, InputScaler scaler)
    : dim_(dim), blocks_(std::move(blocks)), scaler_(std::move(scaler)) {
  validate();
  full_input_.reserve(blocks_.size());
  for (const auto& b : blocks_) full_input_.push_back(is_identity_map(b.input_indices, dim_));
}

void MlpGradientNet::validate() const {
  if (dim_ <= 0) throw std::invalid_argument("mlp: dim must be positive");
  if (blocks_.empty()) throw std::invalid_argument("mlp: at least one block is required");
  if (scaler_.mean.size() != dim_ || scaler_.sd.size() != dim_) {
    throw std::invalid_argument("mlp: scaler dimension mismatch");
  }
  if ((scaler_.sd.array() <= 0.0).any()) throw std::invalid_argument("mlp: scaler sd must be positive");
  std::vector<int> produced(static_cast<std::size_t>(dim_), 0);
  for (const auto& b : blocks_) {
    const auto& p = b.params;
    const Index n_in = static_cast<Index>(b.input_indices.size());
    const Index n_out = static_cast<Index>(b.output_indices.size());
    if (n_in == 0 || n_out == 0) throw std::invalid_argument("mlp: empty block index map");
    const Index h = p.w1.rows();
    if (p.w1.cols() != n_in || p.b1.size() != h || p.w2.rows() != n_out || p.w2.cols() != h ||
        p.b2.size() != n_out) {
      throw std::invalid_argument("mlp: block weight shapes are inconsistent");
    }
    for (Index i : b.input_indices) {
      if (i < 0 || i >= dim_) throw std::invalid_argument("mlp: input index out of range");
    }
    for (Index i : b.output_indices) {
      if (i < 0 || i >= dim_) throw std::invalid_argument("mlp: output index out of range");
      ++produced[static_cast<std::size_t>(i)];
    }
  }
  for (int count : produced) {
    if (count != 1) {
      throw std::invalid_argument("mlp: output indices must partition the coordinates");
    }
  }
}

MlpGradientNet MlpGradientNet::initialize(Index dim, const NetSpec& spec) {
  if (dim <= 0) throw std::invalid_argument("mlp: dim must be positive");
  if (spec.hidden < 0) throw std::invalid_argument("mlp: hidden size must be non-negative");
  if (spec.blocks < 1 || spec.blocks > dim) {
    throw std::invalid_argument("mlp: block count must be in [1, dim]");
  }
  Rng rng = make_rng(spec.seed, Stream::init);
  std::vector<Index> all(static_cast<std::size_t>(dim));
  std::iota(all.begin(), all.end(), Index{0});

  std::vector<NetBlock> blocks;
  const Index base = dim / spec.blocks;
  const Index extra = dim % spec.blocks;
  Index start = 0;
  for (Index b = 0; b < spec.blocks; ++b) {
    const Index n_out = base + (b < extra ? 1 : 0);
    NetBlock block;
    block.input_indices = all;
    block.output_indices.resize(static_cast<std::size_t>(n_out));
    std::iota(block.output_indices.begin(), block.output_indices.end(), start);
    start += n_out;

    const Index h = spec.hidden;
    auto glorot = [&rng](Index rows, Index cols) {
      Matrix w(rows, cols);
      if (rows == 0 || cols == 0) return w;
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> unif(-limit, limit);
      for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) w(i, j) = unif(rng);
      }
      return w;
    };
    block.params.w1 = glorot(h, dim);
    block.params.b1 = Vector::Zero(h);
    block.params.w2 = glorot(n_out, h);
    block.params.b2 = Vector::Zero(n_out);
    blocks.push_back(std::move(block));
  }
  return MlpGradientNet(dim, std::move(blocks), InputScaler::identity(dim));
}

Index MlpGradientNet::total_hidden() const {
  Index h = 0;
  for (const auto& b : blocks_) h += b.params.w1.rows();
  return h;
}

std::size_t MlpGradientNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) {
    const auto& p = b.params;
    n += static_cast<std::size_t>(p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size());
  }
  return n;
}

void MlpGradientNet::set_scaler(InputScaler scaler) {
  if (scaler.mean.size() != dim_ || scaler.sd.size() != dim_ || (scaler.sd.array() <= 0.0).any()) {
    throw std::invalid_argument("mlp: invalid scaler");
  }
  scaler_ = std::move(scaler);
}

Vector MlpGradientNet::forward(const Vector& q) const {
  if (q.size() != dim_) throw std::invalid_argument("mlp: input dimension mismatch");
  const Vector z = scaler_.apply(q);
  Vector out(dim_);
  Vector x;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& b = blocks_[k];
    const auto& p = b.params;
    Vector hidden;
    if (full_input_[k]) {
      hidden = p.w1 * z + p.b1;
    } else {
      x.resize(static_cast<Index>(b.input_indices.size()));
      for (std::size_t i = 0; i < b.input_indices.size(); ++i) x[static_cast<Index>(i)] = z[b.input_indices[i]];
      hidden = p.w1 * x + p.b1;
    }
    hidden = softplus_array(hidden.array()).matrix();
    const Vector o = p.w2 * hidden + p.b2;
    for (std::size_t i = 0; i < b.output_indices.size(); ++i) out[b.output_indices[i]] = o[static_cast<Index>(i)];
  }
  return out;
}

Matrix MlpGradientNet::forward_scaled(const Matrix& z) const {
  Matrix out(dim_, z.cols());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& b = blocks_[k];
    const auto& p = b.params;
    Matrix a = full_input_[k] ? Matrix(p.w1 * z) : Matrix(p.w1 * gather_rows(z, b.input_indices));
    a.colwise() += p.b1;
    a = softplus_array(a.array()).matrix();
    Matrix o = p.w2 * a;
    o.colwise() += p.b2;
    for (std::size_t i = 0; i < b.output_indices.size(); ++i) out.row(b.output_indices[i]) = o.row(static_cast<Index>(i));
  }
  return out;
}

Matrix MlpGradientNet::forward_rows(const Matrix& inputs) const {
  if (inputs.cols() != dim_) throw std::invalid_argument("mlp: input dimension mismatch");
  Matrix z = (inputs.rowwise() - scaler_.mean.transpose()).array().rowwise() /
             scaler_.sd.transpose().array();
  return forward_scaled(z.transpose()).transpose();
}

// ------------------------------------------------------------ serialization

std::string MlpGradientNet::to_text() const {
  json blocks = json::array();
  for (const auto& b : blocks_) {
    blocks.push_back({{"input_indices", b.input_indices},
                      {"output_indices", b.output_indices},
                      {"w1", matrix_to_json(b.params.w1)},
                      {"b1", vector_to_json(b.params.b1)},
                      {"w2", matrix_to_json(b.params.w2)},
                      {"b2", vector_to_json(b.params.b2)}});
  }
  json j{{"format", kFormatName},
         {"version", kFormatVersion},
         {"dim", dim_},
         {"activation", "softplus"},
         {"scaler", {{"mean", vector_to_json(scaler_.mean)}, {"sd", vector_to_json(scaler_.sd)}}},
         {"blocks", std::move(blocks)}};
  return j.dump(1);
}

MlpGradientNet MlpGradientNet::from_text(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format").get<std::string>() != kFormatName) throw std::runtime_error("mlp: unknown format");
  const int version = j.at("version").get<int>();
  if (version != kFormatVersion) {
    throw std::runtime_error("mlp: unsupported format version " + std::to_string(version));
  }
  if (j.at("activation").get<std::string>() != "softplus") {
    throw std::runtime_error("mlp: unsupported activation");
  }
  const Index dim = j.at("dim").get<Index>();
  InputScaler scaler{vector_from_json(j.at("scaler").at("mean")), vector_from_json(j.at("scaler").at("sd"))};
  std::vector<NetBlock> blocks;
  for (const auto& jb : j.at("blocks")) {
    NetBlock b;
    b.input_indices = jb.at("input_indices").get<std::vector<Index>>();
    b.output_indices = jb.at("output_indices").get<std::vector<Index>>();
    b.params.w1 = matrix_from_json(jb.at("w1"));
    b.params.b1 = vector_from_json(jb.at("b1"));
    b.params.w2 = matrix_from_json(jb.at("w2"));
    b.params.b2 = vector_from_json(jb.at("b2"));
    blocks.push_back(std::move(b));
  }
  return MlpGradientNet(dim, std::move(blocks), std::move(scaler));
}

void MlpGradientNet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("mlp: cannot write " + path);
  out << to_text() << '\n';
}

MlpGradientNet MlpGradientNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mlp: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

// ------------------------------------------------------------ collection

void GradientCollector::add(const Vector& q, const Vector& grad) {
  inputs_.push_back(q);
  labels_.push_back(grad);
}

TrainingSet GradientCollector::training_set() const {
  TrainingSet set;
  if (inputs_.empty()) return set;
  const Index d = inputs_.front().size();
  set.inputs.resize(static_cast<Index>(inputs_.size()), d);
  set.labels.resize(static_cast<Index>(labels_.size()), d);
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    set.inputs.row(static_cast<Index>(i)) = inputs_[i].transpose();
    set.labels.row(static_cast<Index>(i)) = labels_[i].transpose();
  }
  return set;
}

void GradientCollector::clear() {
  inputs_.clear();
  labels_.clear();
}

// ------------------------------------------------------------ training

struct Backprop {
  // z: scaled inputs (dim x batch); y: labels (dim x batch).
  static NetGradients run(const MlpGradientNet& net, const Matrix& z, const Matrix& y) {
    NetGradients out;
    const double denom = static_cast<double>(z.cols()) * static_cast<double>(net.dim());
    out.grads.reserve(net.blocks_.size());
    for (std::size_t k = 0; k < net.blocks_.size(); ++k) {
      const auto& b = net.blocks_[k];
      const auto& p = b.params;
      const Matrix gathered = net.full_input(k) ? Matrix() : gather_rows(z, b.input_indices);
      const Matrix& x = net.full_input(k) ? z : gathered;

      Matrix pre = p.w1 * x;
      pre.colwise() += p.b1;
      const Eigen::ArrayXXd decay = (-pre.array().abs()).exp();
      const Matrix act = (pre.array().max(0.0) + (1.0 + decay).log()).matrix();
      Matrix err = p.w2 * act;
      err.colwise() += p.b2;
      err -= gather_rows(y, b.output_indices);
      out.loss += err.squaredNorm() / denom;

      const Matrix d_out = (2.0 / denom) * err;
      BlockParams g;
      g.w2 = d_out * act.transpose();
      g.b2 = d_out.rowwise().sum();
      const Matrix d_pre = ((p.w2.transpose() * d_out).array() *
                           ((pre.array() >= 0.0).select(1.0, decay) / (1.0 + decay))).matrix();
      g.w1 = d_pre * x.transpose();
      g.b1 = d_pre.rowwise().sum();
      out.grads.push_back(std::move(g));
    }
    return out;
  }
};

namespace {

Matrix scaled_columns(const MlpGradientNet& net, const Matrix& inputs) {
  const auto& s = net.scaler();
  Matrix z = (inputs.rowwise() - s.mean.transpose()).array().rowwise() / s.sd.transpose().array();
  return z.transpose();
}

void check_pairs(const MlpGradientNet& net, const Matrix& inputs, const Matrix& labels) {
  if (inputs.rows() != labels.rows()) throw std::invalid_argument("mlp: inputs and labels row counts differ");
  if (inputs.cols() != net.dim() || labels.cols() != net.dim()) {
    throw std::invalid_argument("mlp: training data dimension mismatch");
  }
}

}  // namespace

double mse_loss(const MlpGradientNet& net, const Matrix& inputs, const Matrix& labels) {
  check_pairs(net, inputs, labels);
  if (inputs.rows() == 0) throw std::invalid_argument("mlp: empty batch");
  const Matrix pred = net.forward_rows(inputs);
  return (pred - labels).squaredNorm() / static_cast<double>(labels.size());
}

NetGradients backprop_gradient(const MlpGradientNet& net, const Matrix& inputs,
                               const Matrix& labels) {
  check_pairs(net, inputs, labels);
  if (inputs.rows() == 0) throw std::invalid_argument("mlp: empty batch");
  return Backprop::run(net, scaled_columns(net, inputs), labels.transpose());
}

AdamState AdamState::for_net(const MlpGradientNet& net, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const auto& b : net.blocks()) {
    s.first_moment.push_back(BlockParams::zeros_like(b.params));
    s.second_moment.push_back(BlockParams::zeros_like(b.params));
  }
  return s;
}

void AdamState::apply(MlpGradientNet& net, const std::vector<BlockParams>& grads) {
  auto& blocks = net.blocks();
  if (grads.size() != blocks.size() || first_moment.size() != blocks.size()) {
    throw std::invalid_argument("adam: state does not match the network");
  }
  ++step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  auto update = [&](auto& w, const auto& g, auto& m, auto& v) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    w.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config.epsilon);
  };
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    auto& p = blocks[k].params;
    auto& m = first_moment[k];
    auto& v = second_moment[k];
    update(p.w1, grads[k].w1, m.w1, v.w1);
    update(p.b1, grads[k].b1, m.b1, v.b1);
    update(p.w2, grads[k].w2, m.w2, v.w2);
    update(p.b2, grads[k].b2, m.b2, v.b2);
  }
}

TrainResult train(MlpGradientNet& net, const TrainingSet& data, const TrainConfig& config,
                  AdamState& adam) {
  if (data.size() == 0) throw std::invalid_argument("train: empty training set");
  check_pairs(net, data.inputs, data.labels);
  if (config.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (config.epochs < 0) throw std::invalid_argument("train: negative epoch count");

  if (config.fit_scaler) net.set_scaler(InputScaler::fit(data.inputs));
  const Matrix z = scaled_columns(net, data.inputs);
  const Matrix y = data.labels.transpose();
  const Index n = z.cols();
  const Index batch = std::min(config.batch_size, n);

  auto full_loss = [&] {
    return (net.forward_scaled(z) - y).squaredNorm() / static_cast<double>(y.size());
  };

  TrainResult result;
  result.loss_trace.push_back(full_loss());
  Rng rng = make_rng(config.seed, Stream::training);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Matrix zb;
  Matrix yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += batch) {
      const Index m = std::min(batch, n - start);
      zb.resize(z.rows(), m);
      yb.resize(y.rows(), m);
      for (Index c = 0; c < m; ++c) {
        const Index src = order[static_cast<std::size_t>(start + c)];
        zb.col(c) = z.col(src);
        yb.col(c) = y.col(src);
      }
      const NetGradients g = Backprop::run(net, zb, yb);
      epoch_loss += g.loss * static_cast<double>(m);
      adam.apply(net, g.grads);
      ++result.adam_steps;
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  result.final_loss = config.epochs > 0 ? full_loss() : result.loss_trace.front();
  return result;
}

TrainResult train(MlpGradientNet& net, const TrainingSet& data, const TrainConfig& config) {
  AdamState adam = AdamState::for_net(net, config.adam);
  return train(net, data, config, adam);
}

}  // namespace nnghmc
