#include <algorithm>
#include <cmath>

#include "models.hpp"

namespace cnsm::models {

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::lasso: return "lasso";
        case ModelKind::elasticnet: return "elasticnet";
        case ModelKind::forest: return "forest";
        case ModelKind::gbt: return "gbt";
        case ModelKind::combined: return "combined";
    }
    return "lasso";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "lasso") return ModelKind::lasso;
    if (name == "elasticnet" || name == "enet") return ModelKind::elasticnet;
    if (name == "forest") return ModelKind::forest;
    if (name == "gbt") return ModelKind::gbt;
    if (name == "combined") return ModelKind::combined;
    throw ParseError("unknown model kind: " + name);
}

void Model::check_width(const std::vector<double>& row) const {
    if (row.size() != feature_count())
        throw PreconditionError("feature vector has " + std::to_string(row.size()) +
                                " entries, model expects " + std::to_string(feature_count()));
}

std::vector<double> Model::predict(const std::vector<std::vector<double>>& rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(predict_row(r));
    return out;
}

int Model::predict_cqi(const std::vector<double>& row) const {
    double y = std::clamp(predict_row(row), 1.0, 15.0);
    return static_cast<int>(std::round(y));
}

double LinearModel::predict_row(const std::vector<double>& row) const {
    check_width(row);
    double y = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        if (coefficients[j] == 0.0) continue;
        y += coefficients[j] * (row[j] - col_mean[j]) / col_std[j];
    }
    return y;
}

namespace {

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

struct Standardized {
    std::vector<std::vector<double>> z;  // column-major
    std::vector<double> mean, sd;
    std::vector<bool> active;  // zero-variance columns stay out
    std::vector<double> yc;
    double ybar = 0.0;
};

Standardized standardize(const FeatureMatrix& m) {
    std::size_t n = m.rows(), p = m.cols();
    Standardized s;
    s.mean.assign(p, 0.0);
    s.sd.assign(p, 1.0);
    s.active.assign(p, true);
    s.z.assign(p, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < p; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += m.x[i][j];
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (m.x[i][j] - mu) * (m.x[i][j] - mu);
        var /= static_cast<double>(n);
        s.mean[j] = mu;
        if (var <= 0.0) {
            s.active[j] = false;
            continue;
        }
        s.sd[j] = std::sqrt(var);
        for (std::size_t i = 0; i < n; ++i) s.z[j][i] = (m.x[i][j] - mu) / s.sd[j];
    }
    s.ybar = 0.0;
    for (double v : m.y) s.ybar += v;
    s.ybar /= static_cast<double>(n);
    s.yc.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.yc[i] = m.y[i] - s.ybar;
    return s;
}

LinearModel coordinate_descent(const FeatureMatrix& m, double l1, double l2,
                               const TrainConfig& cfg) {
    if (m.rows() < 2) throw PreconditionError("need at least 2 rows");
    std::size_t n = m.rows(), p = m.cols();
    Standardized s = standardize(m);

    std::vector<double> beta(p, 0.0);
    std::vector<double> r = s.yc;  // residual y_c - Z beta
    double inv_n = 1.0 / static_cast<double>(n);

    auto finish = [&](void) {
        LinearModel model;
        model.coefficients = beta;
        model.intercept = s.ybar;
        model.col_mean = s.mean;
        model.col_std = s.sd;
        model.l1 = l1;
        model.l2 = l2;
        return model;
    };

    for (int it = 0; it < cfg.max_iterations; ++it) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (!s.active[j]) continue;
            const std::vector<double>& zj = s.z[j];
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += zj[i] * r[i];
            rho = rho * inv_n + beta[j];  // (1/n) z_j' z_j == 1
            double b = soft_threshold(rho, l1) / (1.0 + l2);
            double delta = b - beta[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) r[i] -= delta * zj[i];
                beta[j] = b;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        if (max_delta < cfg.tolerance) return finish();
    }
    throw ConvergenceError("coordinate descent did not converge within " +
                               std::to_string(cfg.max_iterations) + " sweeps",
                           finish());
}

double validation_rmse(const LinearModel& model, const FeatureMatrix& val) {
    double sse = 0.0;
    for (std::size_t i = 0; i < val.rows(); ++i) {
        double e = model.predict_row(val.x[i]) - val.y[i];
        sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(val.rows()));
}

LinearModel grid_select(const FeatureMatrix& train, const FeatureMatrix& val,
                        const TrainConfig& cfg, bool elastic) {
    std::vector<double> grid = cfg.lambda_grid;
    if (grid.empty()) {
        // 20 points, logarithmic over [1e-4, 1].
        for (int i = 0; i < 20; ++i) grid.push_back(std::pow(10.0, -4.0 + 4.0 * i / 19.0));
    }
    LinearModel best;
    double best_rmse = 0.0;
    bool have = false;
    for (double l1 : grid) {
        LinearModel cand;
        try {
            cand = coordinate_descent(train, l1, elastic ? cfg.lambda2 : 0.0, cfg);
        } catch (const ConvergenceError& e) {
            // Strongly collinear expansions stall at the smallest
            // penalties; the near-converged iterate still competes on
            // validation RMSE like any other grid candidate.
            cand = e.last_iterate;
        }
        double r = validation_rmse(cand, val);
        if (!have || r < best_rmse) {
            best = std::move(cand);
            best_rmse = r;
            have = true;
        }
    }
    return best;
}

}  // namespace

LinearModel train_lasso(const FeatureMatrix& m, const TrainConfig& cfg) {
    return coordinate_descent(m, cfg.lambda1, 0.0, cfg);
}

LinearModel train_elasticnet(const FeatureMatrix& m, const TrainConfig& cfg) {
    return coordinate_descent(m, cfg.lambda1, cfg.lambda2, cfg);
}

LinearModel train_lasso(const FeatureMatrix& train, const FeatureMatrix& validation,
                        const TrainConfig& cfg) {
    return grid_select(train, validation, cfg, false);
}

LinearModel train_elasticnet(const FeatureMatrix& train, const FeatureMatrix& validation,
                             const TrainConfig& cfg) {
    return grid_select(train, validation, cfg, true);
}

double kkt_residual(const LinearModel& model, const FeatureMatrix& m) {
    std::size_t n = m.rows(), p = m.cols();
    Standardized s = standardize(m);
    std::vector<double> r = s.yc;
    for (std::size_t j = 0; j < p; ++j) {
        if (model.coefficients[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) r[i] -= model.coefficients[j] * s.z[j][i];
    }
    double inv_n = 1.0 / static_cast<double>(n);
    double worst = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        if (!s.active[j]) continue;
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += s.z[j][i] * r[i];
        g = g * inv_n - model.l2 * model.coefficients[j];
        double viol;
        if (model.coefficients[j] == 0.0)
            viol = std::max(0.0, std::abs(g) - model.l1);
        else
            viol = std::abs(g - model.l1 * (model.coefficients[j] > 0 ? 1.0 : -1.0));
        worst = std::max(worst, viol);
    }
    return worst;
}

}  // namespace cnsm::models
