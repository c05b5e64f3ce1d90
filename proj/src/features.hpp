#ifndef CNSM_FEATURES_HPP
#define CNSM_FEATURES_HPP

#include <string>
#include <vector>

#include "preprocess.hpp"
#include "table.hpp"

namespace cnsm::features {

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // symmetric Pearson coefficients
    std::vector<bool> degenerate;             // zero-variance columns

    double at(const std::string& a, const std::string& b) const;
};

enum class Transform { identity, square, cube, sqrt_t, cbrt_t };

inline constexpr Transform kTransforms[5] = {Transform::identity, Transform::square,
                                             Transform::cube, Transform::sqrt_t,
                                             Transform::cbrt_t};

const char* transform_name(Transform t);
double apply_transform(Transform t, double x);

struct FeatureSet {
    std::vector<std::string> base_features;  // ranked, size k
    std::vector<std::string> excluded;
    preprocess::NormalizationParams normalization;

    // (base name, transform) in fixed order, 5 per base feature.
    std::vector<std::pair<std::string, Transform>> expanded() const;
};

std::string feature_set_to_json(const FeatureSet& fs);
FeatureSet feature_set_from_json(const std::string& json_text);

struct FeatureMatrix {
    std::vector<std::string> names;       // expanded column names
    std::vector<std::vector<double>> x;   // row-major, n x (5k)
    std::vector<double> y;                // target
    std::size_t rows() const { return x.size(); }
    std::size_t cols() const { return names.empty() ? 0 : names.size(); }
};

// Pearson correlation over all numeric columns; requires no missing
// values and at least 2 rows.
CorrelationMatrix correlation_matrix(const DataTable& table);

// Top-k by |correlation with target|, exclusions removed before ranking,
// ties broken by name ascending.
FeatureSet select_features(const CorrelationMatrix& corr, const std::string& target, int k,
                           const std::vector<std::string>& exclusions);

// Emits x, x^2, x^3, sqrt(x), cbrt(x) per base feature; inputs must be
// normalized to [0,1] (1e-9 tolerance).
FeatureMatrix expand_polynomial(const DataTable& table, const FeatureSet& fs,
                                const std::string& target = "wb_cqi");

// Builds one expanded row from a raw metric map, applying the stored
// normalization. Missing features are an error.
std::vector<double> expand_row(const FeatureSet& fs,
                               const std::vector<std::pair<std::string, double>>& raw);

// Violations for every expanded column whose base feature is not in the
// available set; empty means the deployment profile can feed the model.
std::vector<std::string> feature_availability_check(const FeatureSet& fs,
                                                    const std::vector<std::string>& available);

std::vector<std::string> feature_availability_check(
    const std::vector<std::pair<std::string, Transform>>& columns,
    const std::vector<std::string>& available);

}  // namespace cnsm::features

#endif
