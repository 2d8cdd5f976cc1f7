#include "possig/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"
#include "possig/random.hpp"

namespace possig {

using nlohmann::json;

PredictorParams PredictorParams::zeros(const PredictorConfig& config) {
  require(config.hidden_layers >= 1, "PredictorConfig: need at least one hidden layer");
  require(config.hidden >= 1 && config.emb_dim >= 1, "PredictorConfig: zero width");
  PredictorParams p;
  p.config = config;
  p.embedding = Eigen::MatrixXd::Zero(kNumActions, static_cast<Eigen::Index>(config.emb_dim));
  std::size_t in = config.input_dim();
  for (std::size_t l = 0; l <= config.hidden_layers; ++l) {
    const std::size_t out = l == config.hidden_layers ? kOutputDim : config.hidden;
    p.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out)));
    p.biases.push_back(Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(out)));
    in = out;
  }
  return p;
}

PredictorParams PredictorParams::init(const PredictorConfig& config, std::uint64_t seed) {
  auto p = zeros(config);
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < p.embedding.size(); ++i) p.embedding.data()[i] = uniform(rng, -0.5, 0.5);
  for (auto& w : p.weights) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -bound, bound);
  }
  return p;
}

std::vector<std::pair<std::string, std::span<double>>> PredictorParams::tensors() {
  std::vector<std::pair<std::string, std::span<double>>> out;
  out.emplace_back("embedding", std::span<double>(embedding.data(), static_cast<std::size_t>(embedding.size())));
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.emplace_back("W" + std::to_string(l + 1),
                     std::span<double>(weights[l].data(), static_cast<std::size_t>(weights[l].size())));
    out.emplace_back("b" + std::to_string(l + 1),
                     std::span<double>(biases[l].data(), static_cast<std::size_t>(biases[l].size())));
  }
  return out;
}

std::size_t PredictorParams::parameter_count() const {
  auto n = static_cast<std::size_t>(embedding.size());
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

bool PredictorParams::all_finite() const {
  if (!embedding.allFinite()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

std::pair<double, double> Prediction::clamped_xy() const {
  return {std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0)};
}

std::vector<double> recency_weights(std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += 1.0 / static_cast<double>(k + 1);
  for (std::size_t k = 0; k < n; ++k) w[k] = (1.0 / static_cast<double>(k + 1)) / total;
  return w;
}

Eigen::VectorXd weighted_action_embedding(std::span<const ActionType> recent, const Eigen::MatrixXd& embedding) {
  require(!recent.empty(), "weighted_action_embedding: no recent actions");
  const auto w = recency_weights(recent.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(embedding.cols());
  for (std::size_t k = 0; k < recent.size(); ++k)
    out += w[k] * embedding.row(static_cast<Eigen::Index>(action_index(recent[k]))).transpose();
  return out;
}

namespace {

Eigen::MatrixXd input_matrix(const PredictorParams& params, std::span<const Sample> samples) {
  const auto& cfg = params.config;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(cfg.input_dim()));
  const auto ls = static_cast<Eigen::Index>(cfg.logsig_dim);
  const auto ed = static_cast<Eigen::Index>(cfg.emb_dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.logsig.size() != cfg.logsig_dim)
      throw ContractError("forward: log-signature has " + std::to_string(s.logsig.size()) + " coefficients, model expects " +
                          std::to_string(cfg.logsig_dim));
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r).head(ls) = Eigen::Map<const Eigen::RowVectorXd>(s.logsig.data(), ls);
    x.row(r).segment(ls, ed) = weighted_action_embedding(s.recent_actions, params.embedding).transpose();
    x(r, ls + ed) = static_cast<double>(s.scrad);
  }
  return x;
}

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations of hidden layers
  std::vector<Eigen::MatrixXd> post;  // post[0] = input, post[l+1] = leaky(pre[l])
  Eigen::MatrixXd out;                // N x 9
};

ForwardCache run(const PredictorParams& params, std::span<const Sample> samples) {
  ForwardCache c;
  c.post.push_back(input_matrix(params, samples));
  const double alpha = params.config.leaky_alpha;
  const std::size_t hidden = params.config.hidden_layers;
  for (std::size_t l = 0; l < hidden; ++l) {
    Eigen::MatrixXd z = (c.post.back() * params.weights[l]).rowwise() + params.biases[l];
    Eigen::MatrixXd a = z.unaryExpr([alpha](double v) { return v > 0.0 ? v : alpha * v; });
    c.pre.push_back(std::move(z));
    c.post.push_back(std::move(a));
  }
  c.out = (c.post.back() * params.weights[hidden]).rowwise() + params.biases[hidden];
  return c;
}

// log-softmax of the first kNumActions columns of one output row
std::array<double, kNumActions> log_softmax(const Eigen::MatrixXd& out, Eigen::Index row) {
  std::array<double, kNumActions> lp{};
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kNumActions; ++k) mx = std::max(mx, out(row, static_cast<Eigen::Index>(k)));
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumActions; ++k) sum += std::exp(out(row, static_cast<Eigen::Index>(k)) - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t k = 0; k < kNumActions; ++k) lp[k] = out(row, static_cast<Eigen::Index>(k)) - lse;
  return lp;
}

Prediction to_prediction(const Eigen::MatrixXd& out, Eigen::Index row) {
  Prediction p;
  const auto lp = log_softmax(out, row);
  for (std::size_t k = 0; k < kNumActions; ++k) p.action_probs[k] = std::exp(lp[k]);
  p.x = out(row, kNumActions);
  p.y = out(row, kNumActions + 1);
  return p;
}

}  // namespace

Eigen::RowVectorXd input_features(const PredictorParams& params, const Sample& sample) {
  return input_matrix(params, std::span<const Sample>(&sample, 1)).row(0);
}

std::vector<Prediction> forward_batch(const PredictorParams& params, std::span<const Sample> samples) {
  std::vector<Prediction> preds;
  if (samples.empty()) return preds;
  // one row at a time so a prediction does not depend on its batch mates
  preds.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto cache = run(params, samples.subspan(i, 1));
    if (!cache.out.allFinite()) throw NumericError("forward: non-finite model output");
    preds.push_back(to_prediction(cache.out, 0));
  }
  return preds;
}

Prediction forward(const PredictorParams& params, const Sample& sample) {
  return forward_batch(params, std::span<const Sample>(&sample, 1)).front();
}

double cel_weight(ActionType a) { return is_style_action(a) ? 1.0 : 0.0; }

LossBreakdown loss_from_predictions(std::span<const Prediction> preds, std::span<const Sample> batch, double lambda) {
  require(!batch.empty(), "loss: empty batch");
  require(preds.size() == batch.size(), "loss: predictions and samples differ in length");
  LossBreakdown lb;
  lb.n = batch.size();
  double sq = 0.0;
  double ce = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double dx = preds[i].x - batch[i].target_x;
    const double dy = preds[i].y - batch[i].target_y;
    sq += dx * dx + dy * dy;
    const double w = cel_weight(batch[i].target_action);
    if (w > 0.0) {
      ++lb.n_weighted;
      ce += -w * std::log(preds[i].prob(batch[i].target_action));
    }
  }
  lb.rmse = std::sqrt(sq / (2.0 * static_cast<double>(lb.n)));
  lb.cel = lb.n_weighted > 0 ? ce / static_cast<double>(lb.n_weighted) : 0.0;
  lb.total = lb.rmse + lambda * lb.cel;
  return lb;
}

LossBreakdown loss(const PredictorParams& params, std::span<const Sample> batch, double lambda) {
  require(!batch.empty(), "loss: empty batch");
  auto cache = run(params, batch);
  LossBreakdown lb;
  lb.n = batch.size();
  double sq = 0.0;
  double ce = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double dx = cache.out(r, kNumActions) - batch[i].target_x;
    const double dy = cache.out(r, kNumActions + 1) - batch[i].target_y;
    sq += dx * dx + dy * dy;
    const double w = cel_weight(batch[i].target_action);
    if (w > 0.0) {
      ++lb.n_weighted;
      ce += -w * log_softmax(cache.out, r)[action_index(batch[i].target_action)];
    }
  }
  lb.rmse = std::sqrt(sq / (2.0 * static_cast<double>(lb.n)));
  lb.cel = lb.n_weighted > 0 ? ce / static_cast<double>(lb.n_weighted) : 0.0;
  lb.total = lb.rmse + lambda * lb.cel;
  return lb;
}

std::pair<LossBreakdown, PredictorParams> loss_and_gradient(const PredictorParams& params,
                                                            std::span<const Sample> batch, double lambda) {
  require(!batch.empty(), "loss_and_gradient: empty batch");
  auto cache = run(params, batch);
  const auto n = static_cast<Eigen::Index>(batch.size());

  LossBreakdown lb;
  lb.n = batch.size();
  double sq = 0.0;
  double ce = 0.0;
  std::vector<std::array<double, kNumActions>> logp(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = batch[static_cast<std::size_t>(i)];
    const double dx = cache.out(i, kNumActions) - s.target_x;
    const double dy = cache.out(i, kNumActions + 1) - s.target_y;
    sq += dx * dx + dy * dy;
    logp[static_cast<std::size_t>(i)] = log_softmax(cache.out, i);
    if (cel_weight(s.target_action) > 0.0) {
      ++lb.n_weighted;
      ce -= cel_weight(s.target_action) * logp[static_cast<std::size_t>(i)][action_index(s.target_action)];
    }
  }
  lb.rmse = std::sqrt(sq / (2.0 * static_cast<double>(n)));
  lb.cel = lb.n_weighted > 0 ? ce / static_cast<double>(lb.n_weighted) : 0.0;
  lb.total = lb.rmse + lambda * lb.cel;

  // d total / d out
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(kOutputDim));
  const double rmse_scale = lb.rmse > 0.0 ? 1.0 / (2.0 * static_cast<double>(n) * lb.rmse) : 0.0;
  const double cel_scale = lb.n_weighted > 0 ? lambda / static_cast<double>(lb.n_weighted) : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = batch[static_cast<std::size_t>(i)];
    d_out(i, kNumActions) = rmse_scale * (cache.out(i, kNumActions) - s.target_x);
    d_out(i, kNumActions + 1) = rmse_scale * (cache.out(i, kNumActions + 1) - s.target_y);
    const double w = cel_weight(s.target_action) * cel_scale;
    if (w == 0.0) continue;
    for (std::size_t k = 0; k < kNumActions; ++k) {
      const double onehot = k == action_index(s.target_action) ? 1.0 : 0.0;
      d_out(i, static_cast<Eigen::Index>(k)) = w * (std::exp(logp[static_cast<std::size_t>(i)][k]) - onehot);
    }
  }

  auto grad = PredictorParams::zeros(params.config);
  const std::size_t hidden = params.config.hidden_layers;
  const double alpha = params.config.leaky_alpha;
  Eigen::MatrixXd delta = std::move(d_out);
  for (std::size_t l = hidden + 1; l-- > 0;) {
    grad.weights[l] = cache.post[l].transpose() * delta;
    grad.biases[l] = delta.colwise().sum();
    Eigen::MatrixXd d_in = delta * params.weights[l].transpose();
    if (l > 0) {
      const auto& z = cache.pre[l - 1];
      delta = d_in.array() * z.unaryExpr([alpha](double v) { return v > 0.0 ? 1.0 : alpha; }).array();
    } else {
      delta = std::move(d_in);
    }
  }

  // delta now holds d total / d input; route the embedding slice to table rows
  const auto ls = static_cast<Eigen::Index>(params.config.logsig_dim);
  const auto ed = static_cast<Eigen::Index>(params.config.emb_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& recent = batch[static_cast<std::size_t>(i)].recent_actions;
    const auto w = recency_weights(recent.size());
    for (std::size_t k = 0; k < recent.size(); ++k)
      grad.embedding.row(static_cast<Eigen::Index>(action_index(recent[k]))) += w[k] * delta.row(i).segment(ls, ed);
  }
  return {lb, std::move(grad)};
}

namespace {

class Adam {
 public:
  Adam(const PredictorParams& shape, const TrainConfig& cfg)
      : cfg_(cfg), m_(PredictorParams::zeros(shape.config)), v_(PredictorParams::zeros(shape.config)) {}

  void step(PredictorParams& params, PredictorParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto p = params.tensors();
    auto g = grad.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t t = 0; t < p.size(); ++t) {
      auto& pt = p[t].second;
      auto& gt = g[t].second;
      auto& mt = m[t].second;
      auto& vt = v[t].second;
      for (std::size_t i = 0; i < pt.size(); ++i) {
        mt[i] = cfg_.beta1 * mt[i] + (1.0 - cfg_.beta1) * gt[i];
        vt[i] = cfg_.beta2 * vt[i] + (1.0 - cfg_.beta2) * gt[i] * gt[i];
        pt[i] -= cfg_.learning_rate * (mt[i] / c1) / (std::sqrt(vt[i] / c2) + cfg_.adam_eps);
      }
    }
  }

 private:
  TrainConfig cfg_;
  PredictorParams m_;
  PredictorParams v_;
  std::size_t t_ = 0;
};

}  // namespace

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> validation_set,
                  const PredictorConfig& model_config, const TrainConfig& config) {
  require(!train_set.empty(), "train: empty training set");
  require(config.batch_size >= 1, "train: batch size must be >= 1");

  TrainResult result;
  PredictorParams params = PredictorParams::init(model_config, config.seed);
  result.params = params;
  Adam adam(params, config);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> batch;
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i)
        batch.push_back(train_set[order[i]]);
      auto [lb, grad] = loss_and_gradient(params, batch, config.lambda);
      if (!std::isfinite(lb.total)) {
        result.aborted = true;
        result.message = "non-finite loss in epoch " + std::to_string(epoch) + " at batch starting " +
                         std::to_string(start) + " (rmse=" + std::to_string(lb.rmse) + ", cel=" + std::to_string(lb.cel) +
                         ")";
        return result;
      }
      adam.step(params, grad);
    }
    if (!params.all_finite()) {
      result.aborted = true;
      result.message = "non-finite parameters after epoch " + std::to_string(epoch);
      return result;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train = loss(params, train_set, config.lambda);
    if (!validation_set.empty()) {
      entry.validation = loss(params, validation_set, config.lambda);
      entry.has_validation = true;
    }
    result.log.push_back(entry);
    const double score = entry.has_validation ? entry.validation.total : entry.train.total;
    if (!std::isfinite(score)) {
      result.aborted = true;
      result.message = "non-finite loss after epoch " + std::to_string(epoch);
      return result;
    }
    if (score < best) {
      best = score;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw DataError("checkpoint: bad matrix shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DataError("checkpoint: bad matrix shape");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  json layers = json::array();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    std::vector<double> b(p.biases[l].data(), p.biases[l].data() + p.biases[l].size());
    layers.push_back({{"W", matrix_to_json(p.weights[l])}, {"b", b}});
  }
  return {{"format", "possig-checkpoint"},
          {"version", kCheckpointVersion},
          {"model",
           {{"logsig_dim", p.config.logsig_dim},
            {"emb_dim", p.config.emb_dim},
            {"hidden", p.config.hidden},
            {"hidden_layers", p.config.hidden_layers},
            {"leaky_alpha", p.config.leaky_alpha}}},
          {"n_r", ckpt.n_r},
          {"sig_order", ckpt.sig_order},
          {"lambda", ckpt.lambda},
          {"seed", ckpt.seed},
          {"params", {{"embedding", matrix_to_json(p.embedding)}, {"layers", layers}}}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format") != "possig-checkpoint") throw DataError("not a checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) throw DataError("checkpoint: unsupported version");
    PredictorConfig cfg;
    const auto& m = j.at("model");
    cfg.logsig_dim = m.at("logsig_dim").get<std::size_t>();
    cfg.emb_dim = m.at("emb_dim").get<std::size_t>();
    cfg.hidden = m.at("hidden").get<std::size_t>();
    cfg.hidden_layers = m.at("hidden_layers").get<std::size_t>();
    cfg.leaky_alpha = m.at("leaky_alpha").get<double>();

    Checkpoint ckpt;
    ckpt.params = PredictorParams::zeros(cfg);
    auto& p = ckpt.params;
    const auto& pj = j.at("params");
    p.embedding = matrix_from_json(pj.at("embedding"), p.embedding.rows(), p.embedding.cols());
    const auto& layers = pj.at("layers");
    if (layers.size() != p.weights.size()) throw DataError("checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      p.weights[l] = matrix_from_json(layers[l].at("W"), p.weights[l].rows(), p.weights[l].cols());
      auto b = layers[l].at("b").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(b.size()) != p.biases[l].size()) throw DataError("checkpoint: bias shape");
      for (std::size_t i = 0; i < b.size(); ++i) p.biases[l](static_cast<Eigen::Index>(i)) = b[i];
    }
    if (!p.all_finite()) throw DataError("checkpoint: non-finite parameters");
    ckpt.n_r = j.at("n_r").get<int>();
    ckpt.sig_order = j.at("sig_order").get<std::size_t>();
    ckpt.lambda = j.at("lambda").get<double>();
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace possig
