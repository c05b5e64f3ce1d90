#ifndef CNSM_MODELS_HPP
#define CNSM_MODELS_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "error.hpp"
#include "features.hpp"

namespace cnsm::models {

using features::FeatureMatrix;

enum class ModelKind { lasso, elasticnet, forest, gbt, combined };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

class Model {
public:
    virtual ~Model() = default;
    virtual ModelKind kind() const = 0;
    virtual std::size_t feature_count() const = 0;
    virtual double predict_row(const std::vector<double>& row) const = 0;
    virtual std::string to_json() const = 0;

    std::vector<double> predict(const std::vector<std::vector<double>>& rows) const;
    // CQI convenience: round(clamp(y, 1, 15)), half away from zero.
    int predict_cqi(const std::vector<double>& row) const;

protected:
    void check_width(const std::vector<double>& row) const;
};

std::shared_ptr<Model> model_from_json(const std::string& json_text);

struct TrainConfig {
    std::uint64_t seed = 0;

    // linear solvers
    double lambda1 = 1e-3;
    double lambda2 = 1e-3;
    std::vector<double> lambda_grid;  // validation-RMSE selection when nonempty
    double tolerance = 1e-7;
    int max_iterations = 10000;

    // forest
    int forest_trees = 100;
    int forest_mtry = 0;  // 0 means ceil(p/3)
    int forest_min_leaf = 2;
    bool forest_bootstrap = true;

    // gradient boosting
    double gbt_eta = 0.1;
    int gbt_depth = 3;  // -1 means unlimited
    int gbt_trees = 100;
    int gbt_min_leaf = 1;
};

// ---- linear (LASSO / Elastic Net), cyclic coordinate descent ----

class LinearModel final : public Model {
public:
    std::vector<double> coefficients;  // standardized space
    double intercept = 0.0;            // training-target mean
    std::vector<double> col_mean, col_std;
    double l1 = 0.0, l2 = 0.0;

    ModelKind kind() const override { return l2 > 0.0 ? ModelKind::elasticnet : ModelKind::lasso; }
    std::size_t feature_count() const override { return coefficients.size(); }
    double predict_row(const std::vector<double>& row) const override;
    std::string to_json() const override;
};

struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, LinearModel last)
        : Error(msg), last_iterate(std::move(last)) {}
    LinearModel last_iterate;
};

LinearModel train_lasso(const FeatureMatrix& m, const TrainConfig& cfg);
LinearModel train_elasticnet(const FeatureMatrix& m, const TrainConfig& cfg);

// Grid selection over candidate penalties by validation RMSE.
LinearModel train_lasso(const FeatureMatrix& train, const FeatureMatrix& validation,
                        const TrainConfig& cfg);
LinearModel train_elasticnet(const FeatureMatrix& train, const FeatureMatrix& validation,
                             const TrainConfig& cfg);

// Max-coefficient-change residual of the exit KKT conditions; tests
// assert it is below tolerance.
double kkt_residual(const LinearModel& model, const FeatureMatrix& m);

// ---- trees ----

struct TreeNode {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    double predict_row(const std::vector<double>& row) const;
};

class ForestModel final : public Model {
public:
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    int mtry = 0;
    std::uint64_t seed = 0;

    ModelKind kind() const override { return ModelKind::forest; }
    std::size_t feature_count() const override { return n_features; }
    double predict_row(const std::vector<double>& row) const override;
    std::string to_json() const override;
};

class GbtModel final : public Model {
public:
    double base_prediction = 0.0;
    double learning_rate = 0.1;
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;

    ModelKind kind() const override { return ModelKind::gbt; }
    std::size_t feature_count() const override { return n_features; }
    double predict_row(const std::vector<double>& row) const override;
    std::string to_json() const override;
};

ForestModel train_random_forest(const FeatureMatrix& m, const TrainConfig& cfg);
GbtModel train_gbt(const FeatureMatrix& m, const TrainConfig& cfg);

// ---- combined weighted average ----

class CombinedModel final : public Model {
public:
    std::vector<std::shared_ptr<Model>> components;  // lasso, enet, forest, gbt
    std::array<int, 4> weights_percent{};            // sums to exactly 100

    ModelKind kind() const override { return ModelKind::combined; }
    std::size_t feature_count() const override;
    double predict_row(const std::vector<double>& row) const override;
    std::string to_json() const override;
};

// Exhaustive enumeration of integer-percent 4-tuples summing to 100.
// Ties: higher accuracy, then fewer nonzero weights, then lexicographically
// smallest tuple. step must divide 100.
std::array<int, 4> search_combined_weights(const std::array<std::vector<double>, 4>& predictions,
                                           const std::vector<double>& y, int step);

}  // namespace cnsm::models

#endif
