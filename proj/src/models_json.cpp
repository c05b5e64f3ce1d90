#include "json.hpp"
#include "models.hpp"

namespace cnsm::models {

using nlohmann::json;

namespace {

json tree_to_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

DecisionTree tree_from_json(const json& j) {
    DecisionTree t;
    for (const json& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.value = n.at(4).get<double>();
        t.nodes.push_back(node);
    }
    return t;
}

}  // namespace

std::string LinearModel::to_json() const {
    json j;
    j["kind"] = model_kind_name(kind());
    j["coefficients"] = coefficients;
    j["intercept"] = intercept;
    j["col_mean"] = col_mean;
    j["col_std"] = col_std;
    j["l1"] = l1;
    j["l2"] = l2;
    return j.dump();
}

std::string ForestModel::to_json() const {
    json j;
    j["kind"] = "forest";
    j["n_features"] = n_features;
    j["mtry"] = mtry;
    j["seed"] = seed;
    j["trees"] = json::array();
    for (const DecisionTree& t : trees) j["trees"].push_back(tree_to_json(t));
    return j.dump();
}

std::string GbtModel::to_json() const {
    json j;
    j["kind"] = "gbt";
    j["n_features"] = n_features;
    j["base_prediction"] = base_prediction;
    j["learning_rate"] = learning_rate;
    j["trees"] = json::array();
    for (const DecisionTree& t : trees) j["trees"].push_back(tree_to_json(t));
    return j.dump();
}

std::string CombinedModel::to_json() const {
    json j;
    j["kind"] = "combined";
    j["weights_percent"] = weights_percent;
    j["components"] = json::array();
    for (const auto& c : components) j["components"].push_back(json::parse(c->to_json()));
    return j.dump();
}

std::shared_ptr<Model> model_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "lasso" || kind == "elasticnet") {
        auto m = std::make_shared<LinearModel>();
        m->coefficients = j.at("coefficients").get<std::vector<double>>();
        m->intercept = j.at("intercept").get<double>();
        m->col_mean = j.at("col_mean").get<std::vector<double>>();
        m->col_std = j.at("col_std").get<std::vector<double>>();
        m->l1 = j.at("l1").get<double>();
        m->l2 = j.at("l2").get<double>();
        return m;
    }
    if (kind == "forest") {
        auto m = std::make_shared<ForestModel>();
        m->n_features = j.at("n_features").get<std::size_t>();
        m->mtry = j.at("mtry").get<int>();
        m->seed = j.at("seed").get<std::uint64_t>();
        for (const json& t : j.at("trees")) m->trees.push_back(tree_from_json(t));
        return m;
    }
    if (kind == "gbt") {
        auto m = std::make_shared<GbtModel>();
        m->n_features = j.at("n_features").get<std::size_t>();
        m->base_prediction = j.at("base_prediction").get<double>();
        m->learning_rate = j.at("learning_rate").get<double>();
        for (const json& t : j.at("trees")) m->trees.push_back(tree_from_json(t));
        return m;
    }
    if (kind == "combined") {
        auto m = std::make_shared<CombinedModel>();
        auto w = j.at("weights_percent").get<std::vector<int>>();
        for (std::size_t i = 0; i < 4 && i < w.size(); ++i) m->weights_percent[i] = w[i];
        for (const json& c : j.at("components"))
            m->components.push_back(model_from_json(c.dump()));
        return m;
    }
    throw ParseError("unknown model kind in artifact: " + kind);
}

}  // namespace cnsm::models
