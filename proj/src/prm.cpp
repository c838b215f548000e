#include "edu/prm.hpp"

#include "binary_io.hpp"
#include "edu/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

namespace edu {

// ---------------------------------------------------------------------------
// Features

FeatureExtractor::FeatureExtractor(Vocabulary vocab, FeatureConfig config)
    : vocab_(std::move(vocab)), config_(config) {
  if (config_.hash_buckets == 0) throw Error(Errc::invalid_argument, "hash_buckets must be positive");
}

std::size_t FeatureExtractor::dimension() const {
  return 1 + config_.last_k * vocab_.size() + config_.hash_buckets + kStateFeatures;
}

namespace {

std::optional<int> numeric(const Vocabulary& vocab, TokenId id) {
  const auto& s = vocab.surface(id);
  if (s.empty() || s.size() > 3) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Running verifier state: step values checked against the true recurrence.
void state_features(const Vocabulary& vocab, const Task& task, TokenSpan prefix, double* out) {
  std::fill(out, out + FeatureExtractor::kStateFeatures, 0.0);
  auto rec = parse_prompt(vocab, task.prompt);
  if (!rec) return;
  auto op = vocab.find(rec->op_surface());
  auto eq = vocab.find(kAnswerDelimiter);
  int truth = rec->start;
  std::size_t written = 0, wrong = 0;
  bool last_ok = false, answered = false, answer_ok = false, ended = false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] == vocab.eos()) ended = true;
    if (i + 1 >= prefix.size()) continue;
    if (op && prefix[i] == *op) {
      if (auto v = numeric(vocab, prefix[i + 1])) {
        truth = rec->apply(truth);
        ++written;
        last_ok = *v == truth;
        if (!last_ok) ++wrong;
      }
    } else if (eq && prefix[i] == *eq) {
      if (auto v = numeric(vocab, prefix[i + 1])) {
        answered = true;
        answer_ok = std::to_string(*v) == normalize_answer(task.reference_answer);
      }
    }
  }
  const double steps = std::max(1, rec->steps);
  out[0] = 1.0;
  out[1] = double(written) / steps;
  out[2] = wrong > 0 ? 1.0 : 0.0;
  out[3] = double(wrong) / steps;
  out[4] = written > 0 && last_ok ? 1.0 : 0.0;
  out[5] = answered ? 1.0 : 0.0;
  out[6] = answer_ok ? 1.0 : 0.0;
  out[7] = ended ? 1.0 : 0.0;
}

}  // namespace

Eigen::VectorXd FeatureExtractor::extract(const Task& task, TokenSpan prefix) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(Eigen::Index(dimension()));
  const std::size_t v = vocab_.size();
  x[0] = double(prefix.size()) / double(kDefaultLengthCap);
  std::size_t at = 1;
  for (std::size_t j = 0; j < config_.last_k; ++j, at += v) {
    if (j < prefix.size()) {
      TokenId t = prefix[prefix.size() - 1 - j];
      if (!vocab_.contains(t)) throw Error(Errc::unknown_token, "prefix id " + std::to_string(t));
      x[Eigen::Index(at + std::size_t(t))] = 1.0;
    }
  }
  if (prefix.size() >= 2) {
    const double norm = 1.0 / double(prefix.size() - 1);
    for (std::size_t i = 1; i < prefix.size(); ++i) {
      std::uint64_t h = mix_seed((std::uint64_t(std::uint32_t(prefix[i - 1])) << 32) | std::uint32_t(prefix[i]));
      x[Eigen::Index(at + h % config_.hash_buckets)] += norm;
    }
  }
  at += config_.hash_buckets;
  state_features(vocab_, task, prefix, x.data() + at);
  return x;
}

// ---------------------------------------------------------------------------
// Classifier

std::size_t PrmShape::parameter_count() const {
  if (hidden == 0) return 2 * input + 2;
  return hidden * input + hidden + 2 * hidden + 2;
}

namespace {

struct Views {
  Eigen::Map<const Eigen::MatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::MatrixXd> w2;
  Eigen::Map<const Eigen::VectorXd> b2;
};

Views views(const PrmShape& s, const Eigen::VectorXd& p) {
  if (std::size_t(p.size()) != s.parameter_count()) throw Error(Errc::invalid_argument, "parameter size mismatch");
  const double* d = p.data();
  const auto in = Eigen::Index(s.input), h = Eigen::Index(s.hidden);
  if (s.hidden == 0) {
    return {{d, 2, in}, {d + 2 * in, 2}, {nullptr, 0, 0}, {nullptr, 0}};
  }
  return {{d, h, in}, {d + h * in, h}, {d + h * in + h, 2, h}, {d + h * in + h + 2 * h, 2}};
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& z) {
  Eigen::VectorXd peak = z.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = z.colwise() - peak;
  Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  return shifted.colwise() - lse;
}

}  // namespace

Eigen::MatrixXd predict(const PrmShape& shape, const Eigen::VectorXd& params, const Eigen::MatrixXd& x) {
  Views v = views(shape, params);
  Eigen::MatrixXd z;
  if (shape.hidden == 0) {
    z = (x * v.w1.transpose()).rowwise() + v.b1.transpose();
  } else {
    Eigen::MatrixXd a = ((x * v.w1.transpose()).rowwise() + v.b1.transpose()).cwiseMax(0.0);
    z = (a * v.w2.transpose()).rowwise() + v.b2.transpose();
  }
  return log_softmax_rows(z).array().exp();
}

LossGrad loss_and_gradient(const PrmShape& shape, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& labels) {
  if (x.rows() != labels.size() || x.rows() == 0) throw Error(Errc::invalid_argument, "empty or ragged batch");
  Views v = views(shape, params);
  const double n = double(x.rows());
  Eigen::MatrixXd y(x.rows(), 2);
  y.col(0) = 1.0 - labels.array();
  y.col(1) = labels;

  LossGrad out;
  out.gradient = Eigen::VectorXd::Zero(params.size());
  double* g = out.gradient.data();
  const auto in = Eigen::Index(shape.input), h = Eigen::Index(shape.hidden);
  if (shape.hidden == 0) {
    Eigen::MatrixXd z = (x * v.w1.transpose()).rowwise() + v.b1.transpose();
    Eigen::MatrixXd logp = log_softmax_rows(z);
    out.loss = -(y.array() * logp.array()).sum() / n;
    Eigen::MatrixXd dz = (logp.array().exp() - y.array()).matrix() / n;
    Eigen::Map<Eigen::MatrixXd>(g, 2, in) = dz.transpose() * x;
    Eigen::Map<Eigen::VectorXd>(g + 2 * in, 2) = dz.colwise().sum().transpose();
    return out;
  }
  Eigen::MatrixXd pre = (x * v.w1.transpose()).rowwise() + v.b1.transpose();
  Eigen::MatrixXd act = pre.cwiseMax(0.0);
  Eigen::MatrixXd z = (act * v.w2.transpose()).rowwise() + v.b2.transpose();
  Eigen::MatrixXd logp = log_softmax_rows(z);
  out.loss = -(y.array() * logp.array()).sum() / n;
  Eigen::MatrixXd dz = (logp.array().exp() - y.array()).matrix() / n;
  Eigen::MatrixXd dact = dz * v.w2;
  Eigen::MatrixXd dpre = (pre.array() > 0.0).select(dact, 0.0);
  Eigen::Map<Eigen::MatrixXd>(g, h, in) = dpre.transpose() * x;
  Eigen::Map<Eigen::VectorXd>(g + h * in, h) = dpre.colwise().sum().transpose();
  Eigen::Map<Eigen::MatrixXd>(g + h * in + h, 2, h) = dz.transpose() * act;
  Eigen::Map<Eigen::VectorXd>(g + h * in + h + 2 * h, 2) = dz.colwise().sum().transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (epochs == 0) throw Error(Errc::invalid_argument, "epochs must be positive");
  if (!(learning_rate > 0)) throw Error(Errc::invalid_argument, "learning_rate must be positive");
  if (!(warmup_ratio >= 0 && warmup_ratio < 1)) throw Error(Errc::invalid_argument, "warmup_ratio in [0,1)");
  if (!(floor_ratio >= 0 && floor_ratio <= 1)) throw Error(Errc::invalid_argument, "floor_ratio in [0,1]");
  if (batch_size == 0) throw Error(Errc::invalid_argument, "batch_size must be positive");
  if (!(validation_fraction >= 0 && validation_fraction < 1))
    throw Error(Errc::invalid_argument, "validation_fraction in [0,1)");
}

double learning_rate_at(const TrainConfig& c, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return c.learning_rate;
  const std::size_t warmup = std::size_t(std::ceil(c.warmup_ratio * double(total_steps)));
  if (step < warmup) return c.learning_rate * double(step + 1) / double(warmup);
  const double span = double(std::max<std::size_t>(1, total_steps - warmup));
  const double progress = std::min(1.0, double(step - warmup) / span);
  const double floor = c.floor_ratio * c.learning_rate;
  return floor + 0.5 * (c.learning_rate - floor) * (1.0 + std::cos(M_PI * progress));
}

std::size_t select_checkpoint(const std::vector<double>& losses) {
  if (losses.empty()) throw Error(Errc::invalid_argument, "no checkpoints");
  return std::size_t(std::min_element(losses.begin(), losses.end()) - losses.begin());
}

PrmModel::PrmModel(Vocabulary vocab, FeatureConfig features, std::size_t hidden)
    : extractor_(std::move(vocab), features) {
  shape_.input = extractor_.dimension();
  shape_.hidden = hidden;
  params_ = Eigen::VectorXd::Zero(Eigen::Index(shape_.parameter_count()));
  mean_ = Eigen::VectorXd::Zero(Eigen::Index(shape_.input));
  scale_ = Eigen::VectorXd::Ones(Eigen::Index(shape_.input));
}

Eigen::RowVectorXd PrmModel::standardize(const Eigen::VectorXd& raw) const {
  return ((raw - mean_).array() / scale_.array()).matrix().transpose();
}

Eigen::MatrixXd PrmModel::design_matrix(const std::vector<std::pair<const Task*, TokenSeq>>& rows) const {
  Eigen::MatrixXd x(Eigen::Index(rows.size()), Eigen::Index(shape_.input));
  for (std::size_t i = 0; i < rows.size(); ++i)
    x.row(Eigen::Index(i)) = extractor_.extract(*rows[i].first, rows[i].second).transpose();
  return x;
}

PrmScore PrmModel::score(const Task& task, TokenSpan prefix) const {
  Eigen::MatrixXd x = standardize(extractor_.extract(task, prefix));
  return {predict(shape_, params_, x)(0, 1)};
}

PrmScore score_prefix(const PrmModel& model, const Task& task, TokenSpan prefix) { return model.score(task, prefix); }

namespace {

struct Adam {
  Eigen::VectorXd m, v;
  std::size_t t = 0;
  explicit Adam(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(b1, double(t)), c2 = 1 - std::pow(b2, double(t));
    params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(Eigen::Index(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(Eigen::Index(i)) = x.row(Eigen::Index(idx[i]));
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(Eigen::Index(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[Eigen::Index(i)] = y[Eigen::Index(idx[i])];
  return out;
}

}  // namespace

PrmModel train_prm(const std::vector<LabeledExample>& dataset, const std::map<std::string, Task>& tasks,
                   const Vocabulary& vocab, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (dataset.empty()) throw Error(Errc::empty_dataset, "no labeled examples");
  PrmModel model(vocab, config.features, config.hidden);
  std::mt19937_64 rng(derive_seed(seed, "prm-train"));

  std::set<std::string> ids;
  for (const auto& ex : dataset) ids.insert(ex.fragment.task_id);
  std::vector<std::string> order(ids.begin(), ids.end());
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = std::size_t(std::floor(config.validation_fraction * double(order.size())));
  if (config.validation_fraction > 0 && n_val == 0 && order.size() >= 2) n_val = 1;
  const std::set<std::string> held_out(order.begin(), order.begin() + std::ptrdiff_t(n_val));

  std::vector<std::pair<const Task*, TokenSeq>> rows;
  rows.reserve(dataset.size());
  Eigen::VectorXd labels(Eigen::Index(dataset.size()));
  std::vector<std::size_t> train_idx, val_idx;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    auto it = tasks.find(ex.fragment.task_id);
    if (it == tasks.end()) throw Error(Errc::invalid_argument, "unknown task " + ex.fragment.task_id);
    rows.emplace_back(&it->second, ex.fragment.path_prefix);
    labels[Eigen::Index(i)] = ex.label;
    (held_out.count(ex.fragment.task_id) ? val_idx : train_idx).push_back(i);
  }
  Eigen::MatrixXd raw = model.design_matrix(rows);

  Eigen::MatrixXd train_raw = rows_of(raw, train_idx);
  Eigen::VectorXd mean = train_raw.colwise().mean().transpose();
  Eigen::VectorXd scale =
      ((train_raw.rowwise() - mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (!(scale[j] > 1e-12)) scale[j] = 1.0;
  model.feature_mean() = mean;
  model.feature_scale() = scale;
  Eigen::MatrixXd x = (raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();

  const PrmShape shape = model.shape();
  Eigen::VectorXd params = Eigen::VectorXd::Zero(Eigen::Index(shape.parameter_count()));
  if (shape.hidden > 0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s1 = 1.0 / std::sqrt(double(shape.input)), s2 = 1.0 / std::sqrt(double(shape.hidden));
    const auto w1 = Eigen::Index(shape.hidden * shape.input);
    const auto w2_at = w1 + Eigen::Index(shape.hidden);
    for (Eigen::Index i = 0; i < w1; ++i) params[i] = s1 * normal(rng);
    for (Eigen::Index i = 0; i < Eigen::Index(2 * shape.hidden); ++i) params[w2_at + i] = s2 * normal(rng);
  }

  Eigen::MatrixXd x_train = rows_of(x, train_idx);
  Eigen::VectorXd y_train = entries_of(labels, train_idx);
  Eigen::MatrixXd x_val = val_idx.empty() ? x_train : rows_of(x, val_idx);
  Eigen::VectorXd y_val = val_idx.empty() ? y_train : entries_of(labels, val_idx);

  const std::size_t batches = (train_idx.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = batches * config.epochs;
  Adam adam(params.size());
  std::vector<std::size_t> perm(train_idx.size());
  std::vector<Eigen::VectorXd> checkpoints;
  auto& meta = model.meta();
  meta = {};
  meta.epochs = config.epochs;
  meta.learning_rate = config.learning_rate;
  meta.warmup_ratio = config.warmup_ratio;
  meta.floor_ratio = config.floor_ratio;
  meta.seed = seed;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t b = 0; b < batches; ++b, ++step) {
      const std::size_t lo = b * config.batch_size, hi = std::min(perm.size(), lo + config.batch_size);
      std::vector<std::size_t> batch(perm.begin() + std::ptrdiff_t(lo), perm.begin() + std::ptrdiff_t(hi));
      LossGrad lg = loss_and_gradient(shape, params, rows_of(x_train, batch), entries_of(y_train, batch));
      if (!std::isfinite(lg.loss) || !lg.gradient.allFinite())
        throw Error(Errc::non_finite_loss, "epoch " + std::to_string(epoch) + " step " + std::to_string(step) +
                                               " loss " + std::to_string(lg.loss));
      adam.step(params, lg.gradient, learning_rate_at(config, step, total_steps));
    }
    const double train_loss = loss_and_gradient(shape, params, x_train, y_train).loss;
    const double val_loss = loss_and_gradient(shape, params, x_val, y_val).loss;
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw Error(Errc::non_finite_loss, "epoch " + std::to_string(epoch) + " evaluation");
    meta.train_losses.push_back(train_loss);
    meta.validation_losses.push_back(val_loss);
    checkpoints.push_back(params);
  }
  meta.selected_epoch = select_checkpoint(meta.validation_losses);
  model.parameters() = checkpoints[meta.selected_epoch];
  return model;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {
constexpr char kPrmMagic[] = "EDUPRM1";
}

void PrmModel::save(std::ostream& out) const {
  using namespace io;
  out.write(kPrmMagic, sizeof kPrmMagic - 1);
  const auto& vocab = extractor_.vocabulary();
  put<std::uint32_t>(out, std::uint32_t(vocab.size()));
  for (const auto& s : vocab.tokens()) put_string(out, s);
  put<std::int32_t>(out, vocab.eos());
  put<std::uint64_t>(out, extractor_.config().hash_buckets);
  put<std::uint64_t>(out, extractor_.config().last_k);
  put<std::uint64_t>(out, shape_.input);
  put<std::uint64_t>(out, shape_.hidden);
  put_vector(out, mean_);
  put_vector(out, scale_);
  put_vector(out, params_);
  put<std::uint64_t>(out, meta_.epochs);
  put<double>(out, meta_.learning_rate);
  put<double>(out, meta_.warmup_ratio);
  put<double>(out, meta_.floor_ratio);
  put<std::uint64_t>(out, meta_.seed);
  put<std::uint64_t>(out, meta_.selected_epoch);
  put_vector(out, Eigen::Map<const Eigen::VectorXd>(meta_.train_losses.data(), Eigen::Index(meta_.train_losses.size())));
  put_vector(out, Eigen::Map<const Eigen::VectorXd>(meta_.validation_losses.data(),
                                                    Eigen::Index(meta_.validation_losses.size())));
  if (!out) throw Error(Errc::sink_write_failure, "writing prm model");
}

PrmModel PrmModel::load(std::istream& in) {
  using namespace io;
  char magic[sizeof kPrmMagic - 1];
  in.read(magic, sizeof magic);
  if (!in || std::string(magic, sizeof magic) != kPrmMagic) throw Error(Errc::bad_format, "not an EDUPRM1 file");
  auto n = get<std::uint32_t>(in);
  std::vector<std::string> tokens;
  for (std::uint32_t i = 0; i < n; ++i) tokens.push_back(get_string(in));
  auto eos = get<std::int32_t>(in);
  FeatureConfig fc;
  fc.hash_buckets = get<std::uint64_t>(in);
  fc.last_k = get<std::uint64_t>(in);
  auto input = get<std::uint64_t>(in);
  auto hidden = get<std::uint64_t>(in);
  PrmModel model(Vocabulary(std::move(tokens), eos), fc, hidden);
  if (model.shape_.input != input) throw Error(Errc::bad_format, "feature dimension mismatch");
  model.mean_ = get_vector(in);
  model.scale_ = get_vector(in);
  model.params_ = get_vector(in);
  if (std::size_t(model.mean_.size()) != input || std::size_t(model.scale_.size()) != input ||
      std::size_t(model.params_.size()) != model.shape_.parameter_count())
    throw Error(Errc::bad_format, "weight shape mismatch");
  model.meta_.epochs = get<std::uint64_t>(in);
  model.meta_.learning_rate = get<double>(in);
  model.meta_.warmup_ratio = get<double>(in);
  model.meta_.floor_ratio = get<double>(in);
  model.meta_.seed = get<std::uint64_t>(in);
  model.meta_.selected_epoch = get<std::uint64_t>(in);
  Eigen::VectorXd tl = get_vector(in), vl = get_vector(in);
  model.meta_.train_losses.assign(tl.data(), tl.data() + tl.size());
  model.meta_.validation_losses.assign(vl.data(), vl.data() + vl.size());
  return model;
}

// ---------------------------------------------------------------------------
// Scorers

Scorer make_prm_scorer(std::shared_ptr<const PrmModel> model) {
  return [model = std::move(model)](const Task& task, TokenSpan prefix) { return model->score(task, prefix); };
}

Scorer make_oracle_scorer(ModelHandle model, OracleOptions options) {
  StrategyConfig cfg;
  cfg.kind = StrategyKind::edu;
  cfg.policy.threshold_nats = options.threshold;
  cfg.policy.max_branches = options.rollout_branches;
  cfg.length_cap = options.length_cap;
  cfg.validate();
  return [model = std::move(model), cfg](const Task& task, TokenSpan prefix) -> PrmScore {
    const auto& vocab = model->vocabulary();
    const bool finished =
        std::find(prefix.begin(), prefix.end(), vocab.eos()) != prefix.end() || prefix.size() >= cfg.length_cap;
    if (finished) return {verify(task, prefix, vocab, cfg.length_cap).correct ? 1.0 : 0.0};
    DecodeTree tree = build_edu_tree(*model, task, cfg, 0, prefix);
    std::size_t correct = 0, total = 0;
    for (NodeId leaf : tree.leaves()) {
      ++total;
      if (tree.nodes[leaf].verdict && tree.nodes[leaf].verdict->correct) ++correct;
    }
    return {total ? double(correct) / double(total) : 0.0};
  };
}

Scorer make_scripted_scorer(std::map<std::pair<std::string, TokenSeq>, double> table, double fallback) {
  return [table = std::move(table), fallback](const Task& task, TokenSpan prefix) -> PrmScore {
    auto it = table.find({task.id, TokenSeq(prefix.begin(), prefix.end())});
    return {it == table.end() ? fallback : it->second};
  };
}

std::string handle_score_request(const Scorer& scorer, const std::map<std::string, Task>& tasks,
                                 std::string_view line) {
  try {
    if (!line.starts_with("SCORE ")) return "ERR bad-request";
    std::string_view rest = line.substr(6);
    auto space = rest.find(' ');
    if (space == std::string_view::npos) return "ERR bad-request";
    std::string id(rest.substr(0, space));
    auto it = tasks.find(id);
    if (it == tasks.end()) return "ERR unknown-task";
    TokenSeq prefix = split_ids(base64_decode(rest.substr(space + 1)));
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, scorer(it->second, prefix).p_correct);
    if (ec != std::errc()) return "ERR format";
    return "OK " + std::string(buf, ptr);
  } catch (const Error& e) {
    return std::string("ERR ") + to_string(e.code());
  } catch (const std::exception&) {
    return "ERR internal";
  }
}

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw Error(Errc::invalid_argument, "auc size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double r = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (positive[i]) {
      ++pos;
      rank_sum += rank[i];
    }
  const double neg = double(scores.size()) - pos;
  if (pos == 0 || neg == 0) return 0.5;
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

}  // namespace edu
