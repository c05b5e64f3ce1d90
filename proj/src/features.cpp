#include "features.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "json.hpp"

namespace cnsm::features {

using nlohmann::json;

double CorrelationMatrix::at(const std::string& a, const std::string& b) const {
    int ia = -1, ib = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == a) ia = static_cast<int>(i);
        if (names[i] == b) ib = static_cast<int>(i);
    }
    if (ia < 0 || ib < 0) throw PreconditionError("unknown column in correlation matrix");
    return values[ia][ib];
}

const char* transform_name(Transform t) {
    switch (t) {
        case Transform::identity: return "identity";
        case Transform::square: return "square";
        case Transform::cube: return "cube";
        case Transform::sqrt_t: return "sqrt";
        case Transform::cbrt_t: return "cbrt";
    }
    return "identity";
}

double apply_transform(Transform t, double x) {
    switch (t) {
        case Transform::identity: return x;
        case Transform::square: return x * x;
        case Transform::cube: return x * x * x;
        case Transform::sqrt_t: return std::sqrt(x);
        case Transform::cbrt_t: return std::cbrt(x);
    }
    return x;
}

std::vector<std::pair<std::string, Transform>> FeatureSet::expanded() const {
    std::vector<std::pair<std::string, Transform>> out;
    out.reserve(base_features.size() * 5);
    for (const std::string& name : base_features)
        for (Transform t : kTransforms) out.emplace_back(name, t);
    return out;
}

CorrelationMatrix correlation_matrix(const DataTable& table) {
    std::vector<std::string> names = table.numeric_names();
    std::size_t n = table.row_count();
    if (n < 2) throw PreconditionError("correlation needs at least 2 rows");

    std::size_t p = names.size();
    std::vector<const std::vector<double>*> cols(p);
    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = &table.num(names[j]);
        for (double v : *cols[j]) {
            if (is_missing(v)) throw PreconditionError("missing values in column " + names[j]);
            mean[j] += v;
        }
        mean[j] /= static_cast<double>(n);
        for (double v : *cols[j]) sd[j] += (v - mean[j]) * (v - mean[j]);
        sd[j] = std::sqrt(sd[j]);
    }

    CorrelationMatrix cm;
    cm.names = names;
    cm.values.assign(p, std::vector<double>(p, 0.0));
    cm.degenerate.assign(p, false);
    for (std::size_t j = 0; j < p; ++j) cm.degenerate[j] = (sd[j] == 0.0);

    for (std::size_t a = 0; a < p; ++a) {
        cm.values[a][a] = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double r = 0.0;
            if (!cm.degenerate[a] && !cm.degenerate[b]) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    dot += ((*cols[a])[i] - mean[a]) * ((*cols[b])[i] - mean[b]);
                r = dot / (sd[a] * sd[b]);
                r = std::clamp(r, -1.0, 1.0);
            }
            cm.values[a][b] = r;
            cm.values[b][a] = r;
        }
    }
    return cm;
}

FeatureSet select_features(const CorrelationMatrix& corr, const std::string& target, int k,
                           const std::vector<std::string>& exclusions) {
    int ti = -1;
    for (std::size_t i = 0; i < corr.names.size(); ++i)
        if (corr.names[i] == target) ti = static_cast<int>(i);
    if (ti < 0) throw PreconditionError("target not in correlation matrix: " + target);

    auto is_excluded = [&](const std::string& name) {
        return std::find(exclusions.begin(), exclusions.end(), name) != exclusions.end();
    };

    struct Ranked {
        std::string name;
        double score;
    };
    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < corr.names.size(); ++i) {
        if (static_cast<int>(i) == ti) continue;
        const std::string& name = corr.names[i];
        if (name == "timestamp_ms") continue;
        if (is_excluded(name)) continue;
        ranked.push_back({name, std::abs(corr.values[i][ti])});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.name < b.name;
    });
    if (k < 0 || static_cast<std::size_t>(k) > ranked.size())
        throw PreconditionError("k exceeds available features");

    FeatureSet fs;
    for (int i = 0; i < k; ++i) fs.base_features.push_back(ranked[i].name);
    for (const std::string& e : exclusions)
        if (std::find(corr.names.begin(), corr.names.end(), e) != corr.names.end())
            fs.excluded.push_back(e);
    return fs;
}

namespace {

double checked_unit(double v, const std::string& name) {
    if (v < -1e-9 || v > 1.0 + 1e-9)
        throw DomainError("feature " + name + " outside [0,1]: " + std::to_string(v));
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

FeatureMatrix expand_polynomial(const DataTable& table, const FeatureSet& fs,
                                const std::string& target) {
    FeatureMatrix fm;
    auto expanded = fs.expanded();
    for (const auto& [name, t] : expanded)
        fm.names.push_back(std::string(transform_name(t)) + "(" + name + ")");

    std::size_t n = table.row_count();
    std::vector<const std::vector<double>*> base;
    base.reserve(fs.base_features.size());
    for (const std::string& name : fs.base_features) base.push_back(&table.num(name));

    fm.x.assign(n, std::vector<double>(expanded.size(), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (std::size_t bj = 0; bj < base.size(); ++bj) {
            double v = checked_unit((*base[bj])[i], fs.base_features[bj]);
            for (Transform t : kTransforms) fm.x[i][c++] = apply_transform(t, v);
        }
    }
    if (table.has(target)) fm.y = table.num(target);
    return fm;
}

std::vector<double> expand_row(const FeatureSet& fs,
                               const std::vector<std::pair<std::string, double>>& raw) {
    std::vector<double> out;
    out.reserve(fs.base_features.size() * 5);
    for (const std::string& name : fs.base_features) {
        const double* found = nullptr;
        for (const auto& [k, v] : raw)
            if (k == name) found = &v;
        if (found == nullptr) throw PreconditionError("feature not available: " + name);
        int pi = fs.normalization.index_of(name);
        double v = *found;
        if (pi >= 0) {
            double lo = fs.normalization.min[pi], hi = fs.normalization.max[pi];
            v = fs.normalization.degenerate[pi] ? 0.0 : std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        }
        v = checked_unit(v, name);
        for (Transform t : kTransforms) out.push_back(apply_transform(t, v));
    }
    return out;
}

std::vector<std::string> feature_availability_check(
    const std::vector<std::pair<std::string, Transform>>& columns,
    const std::vector<std::string>& available) {
    std::vector<std::string> violations;
    for (const auto& [name, t] : columns) {
        if (std::find(available.begin(), available.end(), name) == available.end())
            violations.push_back(std::string(transform_name(t)) + "(" + name + ")");
    }
    return violations;
}

std::vector<std::string> feature_availability_check(const FeatureSet& fs,
                                                    const std::vector<std::string>& available) {
    return feature_availability_check(fs.expanded(), available);
}

std::string feature_set_to_json(const FeatureSet& fs) {
    json j;
    j["base_features"] = fs.base_features;
    j["excluded"] = fs.excluded;
    j["normalization"] = json::parse(normalization_to_json(fs.normalization));
    return j.dump(2);
}

FeatureSet feature_set_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    FeatureSet fs;
    fs.base_features = j.at("base_features").get<std::vector<std::string>>();
    if (j.contains("excluded")) fs.excluded = j.at("excluded").get<std::vector<std::string>>();
    fs.normalization = preprocess::normalization_from_json(j.at("normalization").dump());
    return fs;
}

}  // namespace cnsm::features
