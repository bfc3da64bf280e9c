#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "familia/corpus.hpp"
#include "familia/error.hpp"
#include "familia/rng.hpp"

namespace familia {

struct FeatureEntry {
  int32_t index = 0;
  double value = 0.0;
};

using FeatureList = std::vector<FeatureEntry>;

// One training/prediction example of the feature-based factorization:
// sparse global, user and item feature sections plus the target.
struct Interaction {
  double target = 0.0;
  FeatureList global_feats;
  FeatureList user_feats;
  FeatureList item_feats;
};

struct FeatureDims {
  int32_t num_global = 0;
  int32_t num_user = 0;
  int32_t num_item = 0;
};

// y = mu + sum_j bg_j g_j + sum_j bu_j u_j + sum_j bi_j i_j
//       + (sum_j p_j u_j)^T (sum_j q_j i_j)
struct SvdFeatureModel {
  FeatureDims dims;
  int32_t factor_dim = 0;
  double mu = 0.0;
  std::vector<double> b_global;
  std::vector<double> b_user;
  std::vector<double> b_item;
  std::vector<double> p;  // num_user x factor_dim
  std::vector<double> q;  // num_item x factor_dim

  std::span<double> p_row(int32_t j) {
    return {p.data() + static_cast<size_t>(j) * factor_dim, static_cast<size_t>(factor_dim)};
  }
  std::span<const double> p_row(int32_t j) const {
    return {p.data() + static_cast<size_t>(j) * factor_dim, static_cast<size_t>(factor_dim)};
  }
  std::span<double> q_row(int32_t j) {
    return {q.data() + static_cast<size_t>(j) * factor_dim, static_cast<size_t>(factor_dim)};
  }
  std::span<const double> q_row(int32_t j) const {
    return {q.data() + static_cast<size_t>(j) * factor_dim, static_cast<size_t>(factor_dim)};
  }
};

namespace detail {

inline void check_features(const FeatureList& feats, int32_t dim, const char* section) {
  for (const auto& f : feats) {
    if (f.index < 0 || f.index >= dim) {
      throw Error(std::string("feature index out of range in ") + section + " section");
    }
    if (!std::isfinite(f.value)) {
      throw Error(std::string("non-finite feature value in ") + section + " section");
    }
  }
}

inline void accumulate_factors(const FeatureList& feats, const std::vector<double>& rows,
                               int32_t factor_dim, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& f : feats) {
    const double* row = rows.data() + static_cast<size_t>(f.index) * factor_dim;
    for (int32_t x = 0; x < factor_dim; ++x) out[x] += f.value * row[x];
  }
}

}  // namespace detail

inline double svdf_predict(const SvdFeatureModel& model, const Interaction& x) {
  detail::check_features(x.global_feats, model.dims.num_global, "global");
  detail::check_features(x.user_feats, model.dims.num_user, "user");
  detail::check_features(x.item_feats, model.dims.num_item, "item");

  double y = model.mu;
  for (const auto& f : x.global_feats) y += model.b_global[f.index] * f.value;
  for (const auto& f : x.user_feats) y += model.b_user[f.index] * f.value;
  for (const auto& f : x.item_feats) y += model.b_item[f.index] * f.value;

  std::vector<double> pu(model.factor_dim), qi(model.factor_dim);
  detail::accumulate_factors(x.user_feats, model.p, model.factor_dim, pu);
  detail::accumulate_factors(x.item_feats, model.q, model.factor_dim, qi);
  for (int32_t f = 0; f < model.factor_dim; ++f) y += pu[f] * qi[f];
  return y;
}

struct SvdfConfig {
  int32_t factor_dim = 8;
  int32_t epochs = 100;
  double step_size = 0.01;
  double l2 = 0.004;
};

struct SvdfTrainResult {
  SvdFeatureModel model;
  std::vector<double> epoch_rmse;  // training RMSE measured during each pass
};

// Plain SGD on squared error with L2 on all learned parameters; example order
// is reshuffled once per epoch from the seed. mu is pinned to the mean target.
inline SvdfTrainResult svdf_train(const std::vector<Interaction>& data, FeatureDims dims,
                                  const SvdfConfig& cfg, uint64_t seed) {
  if (data.empty()) throw Error("svdf_train: empty data");
  if (!(cfg.step_size > 0.0)) throw Error("svdf_train: step_size must be > 0");
  if (cfg.factor_dim < 1 || cfg.epochs < 1) {
    throw Error("svdf_train: factor_dim and epochs must be >= 1");
  }
  if (cfg.l2 < 0.0) throw Error("svdf_train: l2 must be >= 0");
  for (const auto& x : data) {
    detail::check_features(x.global_feats, dims.num_global, "global");
    detail::check_features(x.user_feats, dims.num_user, "user");
    detail::check_features(x.item_feats, dims.num_item, "item");
  }

  SvdfTrainResult result;
  SvdFeatureModel& model = result.model;
  model.dims = dims;
  model.factor_dim = cfg.factor_dim;
  model.mu = 0.0;
  for (const auto& x : data) model.mu += x.target;
  model.mu /= static_cast<double>(data.size());
  model.b_global.assign(dims.num_global, 0.0);
  model.b_user.assign(dims.num_user, 0.0);
  model.b_item.assign(dims.num_item, 0.0);

  Rng rng(seed);
  model.p.resize(static_cast<size_t>(dims.num_user) * cfg.factor_dim);
  model.q.resize(static_cast<size_t>(dims.num_item) * cfg.factor_dim);
  for (double& x : model.p) x = rng.next_gaussian() * 0.1;
  for (double& x : model.q) x = rng.next_gaussian() * 0.1;

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> pu(cfg.factor_dim), qi(cfg.factor_dim);

  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double sq_err = 0.0;
    for (size_t idx : order) {
      const Interaction& x = data[idx];

      double pred = model.mu;
      for (const auto& f : x.global_feats) pred += model.b_global[f.index] * f.value;
      for (const auto& f : x.user_feats) pred += model.b_user[f.index] * f.value;
      for (const auto& f : x.item_feats) pred += model.b_item[f.index] * f.value;
      detail::accumulate_factors(x.user_feats, model.p, cfg.factor_dim, pu);
      detail::accumulate_factors(x.item_feats, model.q, cfg.factor_dim, qi);
      for (int32_t f = 0; f < cfg.factor_dim; ++f) pred += pu[f] * qi[f];

      const double err = x.target - pred;
      sq_err += err * err;

      const double lr = cfg.step_size;
      for (const auto& f : x.global_feats) {
        model.b_global[f.index] += lr * (err * f.value - cfg.l2 * model.b_global[f.index]);
      }
      for (const auto& f : x.user_feats) {
        model.b_user[f.index] += lr * (err * f.value - cfg.l2 * model.b_user[f.index]);
      }
      for (const auto& f : x.item_feats) {
        model.b_item[f.index] += lr * (err * f.value - cfg.l2 * model.b_item[f.index]);
      }
      // Factor updates use the pre-update sums on both sides.
      for (const auto& f : x.user_feats) {
        auto row = model.p_row(f.index);
        for (int32_t d = 0; d < cfg.factor_dim; ++d) {
          row[d] += lr * (err * f.value * qi[d] - cfg.l2 * row[d]);
        }
      }
      for (const auto& f : x.item_feats) {
        auto row = model.q_row(f.index);
        for (int32_t d = 0; d < cfg.factor_dim; ++d) {
          row[d] += lr * (err * f.value * pu[d] - cfg.l2 * row[d]);
        }
      }
    }
    result.epoch_rmse.push_back(std::sqrt(sq_err / static_cast<double>(data.size())));
  }
  return result;
}

struct RankedCandidate {
  int32_t item_id = 0;  // tie-break key
  Interaction interaction;
  double relevance = 0.0;
};

struct RankingMetrics {
  double precision_at_n = 0.0;
  double ndcg_at_n = 0.0;
};

// Precision@n and NDCG@n, averaged over users. Items are ranked by predicted
// score, ties by ascending item id; DCG = sum_{r=1..n} rel_r / log2(r + 1).
// Users without any relevant candidate contribute NDCG 0.
inline RankingMetrics evaluate_ranking(const SvdFeatureModel& model,
                                       const std::map<std::string, std::vector<RankedCandidate>>& per_user,
                                       int32_t n) {
  if (per_user.empty()) throw Error("evaluate_ranking: no users");
  if (n < 1) throw Error("evaluate_ranking: n must be >= 1");

  RankingMetrics metrics;
  for (const auto& [user, candidates] : per_user) {
    if (static_cast<int32_t>(candidates.size()) < n) {
      throw Error("evaluate_ranking: user " + user + " has fewer than n candidates");
    }
    std::vector<std::pair<double, const RankedCandidate*>> ranked;
    ranked.reserve(candidates.size());
    for (const auto& c : candidates) ranked.emplace_back(svdf_predict(model, c.interaction), &c);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second->item_id < b.second->item_id;
    });

    int32_t relevant = 0;
    double dcg = 0.0;
    for (int32_t r = 0; r < n; ++r) {
      const double rel = ranked[r].second->relevance;
      if (rel > 0.0) ++relevant;
      dcg += rel / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<double> rels;
    rels.reserve(candidates.size());
    for (const auto& c : candidates) rels.push_back(c.relevance);
    std::sort(rels.begin(), rels.end(), std::greater<>());
    double idcg = 0.0;
    for (int32_t r = 0; r < n && r < static_cast<int32_t>(rels.size()); ++r) {
      idcg += rels[r] / std::log2(static_cast<double>(r) + 2.0);
    }

    metrics.precision_at_n += static_cast<double>(relevant) / n;
    metrics.ndcg_at_n += idcg > 0.0 ? dcg / idcg : 0.0;
  }
  metrics.precision_at_n /= static_cast<double>(per_user.size());
  metrics.ndcg_at_n /= static_cast<double>(per_user.size());
  return metrics;
}

// Interaction file: one example per line,
//   y | g idx:val ... | u idx:val ... | i idx:val ...
// Pipes separate the four sections; the g/u/i tags are required, the idx:val
// lists may be empty.
namespace detail {

inline FeatureList parse_feature_section(const std::string& text, char expected_tag,
                                         size_t line_no) {
  auto fields = split_whitespace(text);
  if (fields.empty() || fields[0].size() != 1 || fields[0][0] != expected_tag) {
    throw Error("interaction line " + std::to_string(line_no) + ": expected section tag '" +
                std::string(1, expected_tag) + "'");
  }
  FeatureList feats;
  for (size_t i = 1; i < fields.size(); ++i) {
    const size_t colon = fields[i].find(':');
    if (colon == std::string::npos) {
      throw Error("interaction line " + std::to_string(line_no) + ": malformed feature '" +
                  fields[i] + "'");
    }
    try {
      feats.push_back(FeatureEntry{static_cast<int32_t>(std::stol(fields[i].substr(0, colon))),
                                   std::stod(fields[i].substr(colon + 1))});
    } catch (const std::exception&) {
      throw Error("interaction line " + std::to_string(line_no) + ": malformed feature '" +
                  fields[i] + "'");
    }
  }
  return feats;
}

}  // namespace detail

inline Interaction parse_interaction(const std::string& line, size_t line_no = 0) {
  std::vector<std::string> sections;
  size_t start = 0;
  while (true) {
    const size_t bar = line.find('|', start);
    if (bar == std::string::npos) {
      sections.push_back(line.substr(start));
      break;
    }
    sections.push_back(line.substr(start, bar - start));
    start = bar + 1;
  }
  if (sections.size() != 4) {
    throw Error("interaction line " + std::to_string(line_no) +
                ": expected 'y | g ... | u ... | i ...'");
  }
  Interaction x;
  try {
    x.target = std::stod(sections[0]);
  } catch (const std::exception&) {
    throw Error("interaction line " + std::to_string(line_no) + ": malformed target");
  }
  x.global_feats = detail::parse_feature_section(sections[1], 'g', line_no);
  x.user_feats = detail::parse_feature_section(sections[2], 'u', line_no);
  x.item_feats = detail::parse_feature_section(sections[3], 'i', line_no);
  return x;
}

// Loads an interaction file; when dims is non-null it receives the tightest
// dimensions covering every index seen.
inline std::vector<Interaction> load_interactions(const std::string& path,
                                                  FeatureDims* dims = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open interaction file: " + path);
  std::vector<Interaction> data;
  std::string line;
  size_t line_no = 0;
  FeatureDims seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    data.push_back(parse_interaction(line, line_no));
    for (const auto& f : data.back().global_feats) seen.num_global = std::max(seen.num_global, f.index + 1);
    for (const auto& f : data.back().user_feats) seen.num_user = std::max(seen.num_user, f.index + 1);
    for (const auto& f : data.back().item_feats) seen.num_item = std::max(seen.num_item, f.index + 1);
  }
  if (data.empty()) throw Error("interaction file is empty: " + path);
  if (dims != nullptr) *dims = seen;
  return data;
}

inline void save_svdf_model(const SvdFeatureModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  char buf[64];
  auto fmt = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  out << "svdf " << model.factor_dim << ' ' << model.dims.num_global << ' '
      << model.dims.num_user << ' ' << model.dims.num_item << ' ' << fmt(model.mu) << '\n';
  auto write_array = [&](const std::vector<double>& a) {
    for (size_t i = 0; i < a.size(); ++i) out << (i ? " " : "") << fmt(a[i]);
    out << '\n';
  };
  write_array(model.b_global);
  write_array(model.b_user);
  write_array(model.b_item);
  write_array(model.p);
  write_array(model.q);
  if (!out) throw Error("I/O failure writing model file: " + path);
}

inline SvdFeatureModel load_svdf_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  SvdFeatureModel model;
  std::string magic;
  if (!(in >> magic >> model.factor_dim >> model.dims.num_global >> model.dims.num_user >>
        model.dims.num_item >> model.mu) ||
      magic != "svdf") {
    throw Error("malformed model file header: " + path);
  }
  if (model.factor_dim < 1 || model.dims.num_global < 0 || model.dims.num_user < 0 ||
      model.dims.num_item < 0) {
    throw Error("malformed model file header: " + path);
  }
  auto read_array = [&](std::vector<double>& a, size_t count) {
    a.resize(count);
    for (size_t i = 0; i < count; ++i) {
      if (!(in >> a[i])) throw Error("model file truncated: " + path);
    }
  };
  read_array(model.b_global, model.dims.num_global);
  read_array(model.b_user, model.dims.num_user);
  read_array(model.b_item, model.dims.num_item);
  read_array(model.p, static_cast<size_t>(model.dims.num_user) * model.factor_dim);
  read_array(model.q, static_cast<size_t>(model.dims.num_item) * model.factor_dim);
  return model;
}

}  // namespace familia
