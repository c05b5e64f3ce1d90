#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "models.hpp"

namespace cnsm::models {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct SplitParams {
    int max_depth = -1;  // -1: unlimited
    int min_leaf = 1;
    int mtry = 0;  // 0: all features
};

struct TreeBuilder {
    const std::vector<std::vector<double>>& x;
    const std::vector<double>& y;
    SplitParams params;
    std::mt19937_64& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& rows, int depth) {
        double sum = 0.0;
        for (std::size_t r : rows) sum += y[r];
        double mean = sum / static_cast<double>(rows.size());

        bool stop = rows.size() < 2 * static_cast<std::size_t>(params.min_leaf) ||
                    (params.max_depth >= 0 && depth >= params.max_depth);
        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 1e-12;
        if (!stop) find_best_split(rows, sum, best_feature, best_threshold, best_gain);

        if (best_feature < 0) {
            nodes.push_back({-1, 0.0, -1, -1, mean});
            return static_cast<int>(nodes.size()) - 1;
        }

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
            if (x[r][best_feature] <= best_threshold)
                left.push_back(r);
            else
                right.push_back(r);
        }
        int self = static_cast<int>(nodes.size());
        nodes.push_back({best_feature, best_threshold, -1, -1, mean});
        nodes[self].left = build(left, depth + 1);
        int right_idx = build(right, depth + 1);
        nodes[self].right = right_idx;
        return self;
    }

    void find_best_split(const std::vector<std::size_t>& rows, double total_sum,
                         int& best_feature, double& best_threshold, double& best_gain) {
        std::size_t p = x.empty() ? 0 : x[0].size();
        std::vector<int> candidates(p);
        std::iota(candidates.begin(), candidates.end(), 0);
        if (params.mtry > 0 && static_cast<std::size_t>(params.mtry) < p) {
            // Partial Fisher-Yates, then ascending order keeps the
            // smallest-feature tie rule independent of draw order.
            for (int i = 0; i < params.mtry; ++i) {
                std::uniform_int_distribution<int> pick(i, static_cast<int>(p) - 1);
                std::swap(candidates[i], candidates[pick(rng)]);
            }
            candidates.resize(params.mtry);
            std::sort(candidates.begin(), candidates.end());
        }

        std::size_t n = rows.size();
        double n_d = static_cast<double>(n);
        double parent_score = total_sum * total_sum / n_d;

        std::vector<std::pair<double, double>> vy(n);  // (feature value, target)
        for (int f : candidates) {
            for (std::size_t i = 0; i < n; ++i) vy[i] = {x[rows[i]][f], y[rows[i]]};
            std::sort(vy.begin(), vy.end());
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += vy[i].second;
                if (vy[i].first == vy[i + 1].first) continue;
                std::size_t nl = i + 1, nr = n - nl;
                if (nl < static_cast<std::size_t>(params.min_leaf) ||
                    nr < static_cast<std::size_t>(params.min_leaf))
                    continue;
                double right_sum = total_sum - left_sum;
                double gain = left_sum * left_sum / static_cast<double>(nl) +
                              right_sum * right_sum / static_cast<double>(nr) - parent_score;
                double threshold = 0.5 * (vy[i].first + vy[i + 1].first);
                if (gain > best_gain ||
                    (gain == best_gain && best_feature >= 0 &&
                     (f < best_feature || (f == best_feature && threshold < best_threshold)))) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = threshold;
                }
            }
        }
    }
};

DecisionTree fit_tree(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                      std::vector<std::size_t> rows, const SplitParams& params,
                      std::mt19937_64& rng) {
    TreeBuilder b{x, y, params, rng, {}};
    b.build(rows, 0);
    DecisionTree t;
    t.nodes = std::move(b.nodes);
    return t;
}

}  // namespace

double DecisionTree::predict_row(const std::vector<double>& row) const {
    int i = 0;
    while (nodes[i].feature >= 0)
        i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
}

double ForestModel::predict_row(const std::vector<double>& row) const {
    check_width(row);
    double sum = 0.0;
    for (const DecisionTree& t : trees) sum += t.predict_row(row);
    return sum / static_cast<double>(trees.size());
}

double GbtModel::predict_row(const std::vector<double>& row) const {
    check_width(row);
    double y = base_prediction;
    for (const DecisionTree& t : trees) y += learning_rate * t.predict_row(row);
    return y;
}

ForestModel train_random_forest(const FeatureMatrix& m, const TrainConfig& cfg) {
    if (m.rows() < 2) throw PreconditionError("need at least 2 rows");
    std::size_t n = m.rows(), p = m.cols();
    int mtry = cfg.forest_mtry > 0 ? cfg.forest_mtry
                                   : static_cast<int>((p + 2) / 3);

    ForestModel model;
    model.n_features = p;
    model.mtry = mtry;
    model.seed = cfg.seed;
    SplitParams params{-1, cfg.forest_min_leaf, mtry};

    for (int t = 0; t < cfg.forest_trees; ++t) {
        std::mt19937_64 rng(splitmix64(cfg.seed + static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows;
        rows.reserve(n);
        if (cfg.forest_bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) rows.push_back(pick(rng));
        } else {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), 0);
        }
        model.trees.push_back(fit_tree(m.x, m.y, std::move(rows), params, rng));
    }
    return model;
}

GbtModel train_gbt(const FeatureMatrix& m, const TrainConfig& cfg) {
    if (m.rows() < 2) throw PreconditionError("need at least 2 rows");
    std::size_t n = m.rows();

    GbtModel model;
    model.n_features = m.cols();
    model.learning_rate = cfg.gbt_eta;
    double sum = 0.0;
    for (double v : m.y) sum += v;
    model.base_prediction = sum / static_cast<double>(n);

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = m.y[i] - model.base_prediction;

    SplitParams params{cfg.gbt_depth, cfg.gbt_min_leaf, 0};
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(splitmix64(cfg.seed ^ 0x67b7ULL));

    for (int t = 0; t < cfg.gbt_trees; ++t) {
        DecisionTree tree = fit_tree(m.x, residual, all, params, rng);
        for (std::size_t i = 0; i < n; ++i)
            residual[i] -= cfg.gbt_eta * tree.predict_row(m.x[i]);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::size_t CombinedModel::feature_count() const {
    return components.empty() ? 0 : components.front()->feature_count();
}

double CombinedModel::predict_row(const std::vector<double>& row) const {
    double y = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (weights_percent[i] == 0) continue;
        y += weights_percent[i] / 100.0 * components[i]->predict_row(row);
    }
    return y;
}

std::array<int, 4> search_combined_weights(const std::array<std::vector<double>, 4>& predictions,
                                           const std::vector<double>& y, int step) {
    if (y.empty()) throw PreconditionError("empty validation set");
    if (step <= 0 || 100 % step != 0) throw PreconditionError("step must divide 100");
    for (const auto& p : predictions)
        if (p.size() != y.size()) throw PreconditionError("prediction length mismatch");

    std::size_t n = y.size();
    auto evaluate = [&](const std::array<int, 4>& w, double& rmse, double& acc) {
        double sse = 0.0;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = 0.0;
            for (int k = 0; k < 4; ++k)
                if (w[k]) pred += w[k] / 100.0 * predictions[k][i];
            double e = pred - y[i];
            sse += e * e;
            if (std::round(std::clamp(pred, 1.0, 15.0)) == y[i]) ++hits;
        }
        rmse = std::sqrt(sse / static_cast<double>(n));
        acc = static_cast<double>(hits) / static_cast<double>(n);
    };

    std::array<int, 4> best{};
    double best_rmse = 0.0, best_acc = 0.0;
    int best_nonzero = 5;
    bool have = false;
    for (int a = 0; a <= 100; a += step)
        for (int b = 0; b + a <= 100; b += step)
            for (int c = 0; c + a + b <= 100; c += step) {
                std::array<int, 4> w{a, b, c, 100 - a - b - c};
                double rmse, acc;
                evaluate(w, rmse, acc);
                int nonzero = (a > 0) + (b > 0) + (c > 0) + (w[3] > 0);
                bool better = false;
                if (!have)
                    better = true;
                else if (rmse != best_rmse)
                    better = rmse < best_rmse;
                else if (acc != best_acc)
                    better = acc > best_acc;
                else if (nonzero != best_nonzero)
                    better = nonzero < best_nonzero;
                else
                    better = w < best;
                if (better) {
                    best = w;
                    best_rmse = rmse;
                    best_acc = acc;
                    best_nonzero = nonzero;
                    have = true;
                }
            }
    return best;
}

}  // namespace cnsm::models
