// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace teleclass {

std::string_view to_string(ScoreForm f) {
  return f == ScoreForm::kSigmoidExp ? "sigmoid_exp" : "sigmoid_linear";
}

ScoreForm score_form_from_string(std::string_view s) {
  if (s == "sigmoid_linear") return ScoreForm::kSigmoidLinear;
  if (s == "sigmoid_exp") return ScoreForm::kSigmoidExp;
  throw ValidationError(fmt::format("unknown score form \"{}\"", s));
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json arr = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

Eigen::MatrixXd matrix_from_json(const Json& arr, Eigen::Index rows, Eigen::Index cols,
                                 std::string_view what) {
  if (arr.size() != static_cast<std::size_t>(rows * cols)) {
    throw ValidationError(fmt::format("model field {} has {} values, expected {}", what,
                                      arr.size(), rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = arr[k++].get<double>();
  }
  return m;
}

}  // namespace

double probability_from_logit(double z, ScoreForm form) {
  return form == ScoreForm::kSigmoidExp ? sigmoid(std::exp(z)) : sigmoid(z);
}

Eigen::VectorXd to_eigen(std::span<const float> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

MatchingModel MatchingModel::initialize(const Taxonomy& t, const VectorStore& store, int dim_h,
                                        ScoreForm form) {
  const int dim_in = static_cast<int>(store.dim());
  if (dim_in < 1) throw ValidationError("vector store is empty");
  if (dim_h < 1) throw ValidationError("dim_h must be positive");
  MatchingModel m;
  m.dim_in = dim_in;
  m.dim_h = dim_h;
  m.score_form = form;
  m.classes = t.classes();
  m.W = Eigen::MatrixXd::Identity(dim_h, dim_h);
  m.adapter = Eigen::MatrixXd::Identity(dim_h, dim_in);
  m.class_table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.classes.size()), dim_h);
  for (std::size_t r = 0; r < m.classes.size(); ++r) {
    const Vector* v = store.find(VectorSpace::kName, t.name(m.classes[r]));
    if (!v) continue;
    const int n = std::min<int>(dim_h, static_cast<int>(v->size()));
    for (int k = 0; k < n; ++k) m.class_table(static_cast<Eigen::Index>(r), k) = (*v)[k];
  }
  return m;
}

std::size_t MatchingModel::row_of(ClassId c) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), c);
  if (it == classes.end() || *it != c) {
    throw LookupError(fmt::format("class {} is not in the model", index_of(c)));
  }
  return static_cast<std::size_t>(it - classes.begin());
}

Eigen::VectorXd MatchingModel::logits(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in) {
    throw ValidationError(
        fmt::format("document vector has dimension {}, model expects {}", x.size(), dim_in));
  }
  return class_table * (W * (adapter * x));
}

Eigen::VectorXd MatchingModel::probabilities(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z = logits(x);
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = probability_from_logit(z[j], score_form);
  return z;
}

bool MatchingModel::finite() const {
  return W.allFinite() && class_table.allFinite() && adapter.allFinite();
}

std::vector<std::pair<ClassId, double>> predict_proba(const MatchingModel& m,
                                                      std::span<const float> doc_vector) {
  Eigen::VectorXd p = m.probabilities(to_eigen(doc_vector));
  std::vector<std::pair<ClassId, double>> out;
  out.reserve(m.classes.size());
  for (std::size_t r = 0; r < m.classes.size(); ++r) {
    out.emplace_back(m.classes[r], p[static_cast<Eigen::Index>(r)]);
  }
  return out;
}

TargetSets build_targets_core(const ClassList& core, const Taxonomy& t) {
  if (core.empty()) throw ValidationError("core class set is empty");
  const std::size_t n = t.node_count();
  std::vector<char> pos(n, 0), unl(n, 0);
  for (ClassId c : core) {
    if (!t.contains(c) || t.is_root(c)) {
      throw ValidationError(fmt::format("core class {} is not a taxonomy class", index_of(c)));
    }
    pos[index_of(c)] = 1;
    for (ClassId a : t.ancestors(c)) pos[index_of(a)] = 1;
  }
  for (ClassId c : core) {
    for (ClassId d : t.descendants(c)) unl[index_of(d)] = 1;
  }
  TargetSets s;
  for (ClassId c : t.classes()) {
    const std::size_t i = index_of(c);
    if (pos[i]) {
      s.positives.push_back(c);
    } else if (unl[i]) {
      s.unlabeled.push_back(c);
    } else {
      s.negatives.push_back(c);
    }
  }
  return s;
}

TargetSets build_targets_gen(const LabelPath& path, const Taxonomy& t) {
  if (path.nodes.empty()) throw ValidationError("label path is empty");
  std::vector<char> pos(t.node_count(), 0);
  for (ClassId c : path.nodes) {
    if (!t.contains(c) || t.is_root(c)) {
      throw ValidationError(fmt::format("path class {} is not a taxonomy class", index_of(c)));
    }
    pos[index_of(c)] = 1;
  }
  TargetSets s;
  for (ClassId c : t.classes()) (pos[index_of(c)] ? s.positives : s.negatives).push_back(c);
  return s;
}

void check_partition(const TargetSets& s, const Taxonomy& t) {
  std::vector<int> seen(t.node_count(), 0);
  for (const ClassList* part : {&s.positives, &s.negatives, &s.unlabeled}) {
    for (ClassId c : *part) {
      if (!t.contains(c) || t.is_root(c)) {
        throw NumericError(fmt::format("target set holds non-class {}", index_of(c)));
      }
      ++seen[index_of(c)];
    }
  }
  for (ClassId c : t.classes()) {
    if (seen[index_of(c)] != 1) {
      throw NumericError(fmt::format("class \"{}\" appears {} times in the target sets",
                                     t.name(c), seen[index_of(c)]));
    }
  }
}

TrainingExample make_example(const MatchingModel& m, std::string doc_id,
                             std::span<const float> x, const TargetSets& targets,
                             bool generated) {
  if (static_cast<int>(x.size()) != m.dim_in) {
    throw ValidationError(fmt::format("vector of {} has dimension {}, model expects {}", doc_id,
                                      x.size(), m.dim_in));
  }
  TrainingExample e;
  e.doc_id = std::move(doc_id);
  e.x = to_eigen(x);
  const auto n = static_cast<Eigen::Index>(m.classes.size());
  e.target = Eigen::VectorXd::Zero(n);
  e.mask = Eigen::VectorXd::Ones(n);
  for (ClassId c : targets.positives) e.target[static_cast<Eigen::Index>(m.row_of(c))] = 1.0;
  for (ClassId c : targets.unlabeled) e.mask[static_cast<Eigen::Index>(m.row_of(c))] = 0.0;
  e.generated = generated;
  return e;
}

LossResult loss(const MatchingModel& m, std::span<const TrainingExample* const> core,
                std::span<const TrainingExample* const> gen, double gen_weight) {
  LossResult r;
  r.grad.W = Eigen::MatrixXd::Zero(m.W.rows(), m.W.cols());
  r.grad.class_table = Eigen::MatrixXd::Zero(m.class_table.rows(), m.class_table.cols());
  r.grad.adapter = Eigen::MatrixXd::Zero(m.adapter.rows(), m.adapter.cols());
  const bool exp_form = m.score_form == ScoreForm::kSigmoidExp;

  auto accumulate = [&](const TrainingExample& e, double weight) {
    const Eigen::VectorXd d = m.adapter * e.x;
    const Eigen::VectorXd u = m.W * d;
    const Eigen::VectorXd z = m.class_table * u;
    Eigen::VectorXd g(z.size());
    double value = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      if (e.mask[j] == 0.0) {
        g[j] = 0.0;
        continue;
      }
      const double y = e.target[j];
      // BCE of sigma(s) against y equals softplus(s) - y*s.
      const double s = exp_form ? std::exp(z[j]) : z[j];
      value += softplus(s) - y * s;
      const double ds = sigmoid(s) - y;
      g[j] = exp_form ? ds * s : ds;
    }
    if (!std::isfinite(value) || !g.allFinite()) {
      throw NumericError(fmt::format("non-finite loss on document {}", e.doc_id));
    }
    r.value += weight * value;
    g *= weight;
    r.grad.class_table.noalias() += g * u.transpose();
    const Eigen::VectorXd gu = m.class_table.transpose() * g;
    r.grad.W.noalias() += gu * d.transpose();
    const Eigen::VectorXd gd = m.W.transpose() * gu;
    r.grad.adapter.noalias() += gd * e.x.transpose();
  };
  for (const TrainingExample* e : core) accumulate(*e, 1.0);
  for (const TrainingExample* e : gen) accumulate(*e, gen_weight);
  return r;
}

Json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},       {"batch_size", c.batch_size}, {"epochs", c.epochs},
          {"weight_decay", c.weight_decay}, {"beta1", c.beta1}, {"beta2", c.beta2},
          {"eps", c.eps},     {"seed", c.seed}};
}

namespace {

struct AdamState {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
};

void adamw_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, AdamState& st,
                const TrainConfig& c, long step) {
  st.m = c.beta1 * st.m + (1.0 - c.beta1) * grad;
  st.v = c.beta2 * st.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  param *= 1.0 - c.lr * c.weight_decay;
  param.array() -= c.lr * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + c.eps);
}

}  // namespace

TrainResult train(MatchingModel init, const std::vector<TrainingExample>& core,
                  const std::vector<TrainingExample>& gen, const TrainConfig& config) {
  if (config.batch_size < 1) throw ValidationError("batch_size must be positive");
  if (config.epochs < 0) throw ValidationError("epochs must be non-negative");
  if (!(config.lr > 0.0)) throw ValidationError("lr must be positive");
  if (core.empty() && gen.empty()) throw ValidationError("no training examples");

  TrainResult out{std::move(init), {}};
  MatchingModel& m = out.model;
  const double gen_weight =
      gen.empty() ? 0.0 : static_cast<double>(core.size()) / static_cast<double>(gen.size());

  std::vector<const TrainingExample*> all;
  all.reserve(core.size() + gen.size());
  for (const auto& e : core) all.push_back(&e);
  for (const auto& e : gen) all.push_back(&e);

  auto zeros_like = [](const Eigen::MatrixXd& p) {
    return AdamState{Eigen::MatrixXd::Zero(p.rows(), p.cols()),
                     Eigen::MatrixXd::Zero(p.rows(), p.cols())};
  };
  AdamState sW = zeros_like(m.W), sC = zeros_like(m.class_table), sA = zeros_like(m.adapter);

  std::mt19937_64 rng(config.seed);
  long step = 0;
  std::vector<const TrainingExample*> batch_core, batch_gen;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = all.size(); i > 1; --i) {
      std::swap(all[i - 1], all[rng() % i]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < all.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(all.size(), start + static_cast<std::size_t>(config.batch_size));
      batch_core.clear();
      batch_gen.clear();
      for (std::size_t i = start; i < end; ++i) {
        (all[i]->generated ? batch_gen : batch_core).push_back(all[i]);
      }
      LossResult lr = loss(m, batch_core, batch_gen, gen_weight);
      epoch_loss += lr.value;
      ++step;
      adamw_step(m.W, lr.grad.W, sW, config, step);
      adamw_step(m.class_table, lr.grad.class_table, sC, config, step);
      adamw_step(m.adapter, lr.grad.adapter, sA, config, step);
      if (!m.finite()) {
        throw NumericError(
            fmt::format("parameters became non-finite at epoch {} step {}", epoch + 1, step));
      }
    }
    out.loss_history.push_back(epoch_loss);
  }
  return out;
}

Prediction predict(const MatchingModel& m, std::span<const float> doc_vector, double threshold) {
  const Eigen::VectorXd z = m.logits(to_eigen(doc_vector));
  std::vector<std::size_t> order(m.classes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double za = z[static_cast<Eigen::Index>(a)];
    const double zb = z[static_cast<Eigen::Index>(b)];
    if (za != zb) return za > zb;
    return m.classes[a] < m.classes[b];
  });
  Prediction p;
  for (std::size_t r : order) {
    const double prob = probability_from_logit(z[static_cast<Eigen::Index>(r)], m.score_form);
    p.ranked.emplace_back(m.classes[r], prob);
    if (prob > threshold) p.predicted.push_back(m.classes[r]);
  }
  std::sort(p.predicted.begin(), p.predicted.end());
  return p;
}

Json model_to_json(const MatchingModel& m, const TrainConfig& config,
                   const std::vector<double>& loss_history) {
  Json ids = Json::array();
  for (ClassId c : m.classes) ids.push_back(index_of(c));
  return {{"dim_in", m.dim_in},
          {"dim_h", m.dim_h},
          {"score_form", to_string(m.score_form)},
          {"class_ids", ids},
          {"W", matrix_json(m.W)},
          {"class_table", matrix_json(m.class_table)},
          {"adapter", matrix_json(m.adapter)},
          {"training", to_json(config)},
          {"loss_history", loss_history}};
}

MatchingModel model_from_json(const Json& obj) {
  MatchingModel m;
  m.dim_in = obj.at("dim_in").get<int>();
  m.dim_h = obj.at("dim_h").get<int>();
  if (m.dim_in < 1 || m.dim_h < 1) throw ValidationError("model dimensions must be positive");
  m.score_form = score_form_from_string(obj.at("score_form").get<std::string>());
  for (const auto& v : obj.at("class_ids")) m.classes.push_back(class_id(v.get<std::size_t>()));
  if (!std::is_sorted(m.classes.begin(), m.classes.end())) {
    throw ValidationError("model class ids must be ascending");
  }
  const auto n = static_cast<Eigen::Index>(m.classes.size());
  m.W = matrix_from_json(obj.at("W"), m.dim_h, m.dim_h, "W");
  m.class_table = matrix_from_json(obj.at("class_table"), n, m.dim_h, "class_table");
  m.adapter = matrix_from_json(obj.at("adapter"), m.dim_h, m.dim_in, "adapter");
  if (!m.finite()) throw ValidationError("model has non-finite parameters");
  return m;
}

Json to_json(const std::string& doc_id, const Prediction& p) {
  Json ranked = Json::array();
  for (const auto& [c, prob] : p.ranked) ranked.push_back(Json::array({index_of(c), prob}));
  Json predicted = Json::array();
  for (ClassId c : p.predicted) predicted.push_back(index_of(c));
  return {{"doc_id", doc_id}, {"ranked", ranked}, {"predicted", predicted}};
}

}  // namespace teleclass
