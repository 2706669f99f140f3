#include "cvdcm/split.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "cvdcm/rng.hpp"

namespace cvdcm::split {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

ImageGraph build_image_graph(const Dataset& data) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> ids;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = index.try_emplace(id, ids.size());
        if (inserted) ids.push_back(id);
        return it->second;
    };

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(data.tasks.size());
    for (const auto& task : data.tasks) {
        if (task.alts[0].image_id.empty() || task.alts[1].image_id.empty())
            throw std::invalid_argument("build_image_graph: task '" + task.task_id +
                                        "' is missing an image_id");
        edges.emplace_back(intern(task.alts[0].image_id), intern(task.alts[1].image_id));
    }

    UnionFind uf(ids.size());
    for (const auto& [a, b] : edges) uf.unite(a, b);

    std::unordered_map<std::size_t, std::size_t> root_to_component;
    ImageGraph graph;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t root = uf.find(i);
        auto [it, inserted] = root_to_component.try_emplace(root, graph.components.size());
        if (inserted) graph.components.emplace_back();
        graph.components[it->second].image_ids.push_back(ids[i]);
    }
    for (std::size_t t = 0; t < data.tasks.size(); ++t) {
        const std::size_t c = root_to_component.at(uf.find(edges[t].first));
        graph.components[c].task_indices.push_back(t);
        graph.components[c].n_obs += 1;
    }
    return graph;
}

SplitResult split(const Dataset& data, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("split fraction must lie in (0,1)");
    ImageGraph graph = build_image_graph(data);
    const std::size_t n_comp = graph.components.size();
    if (n_comp < 2) {
        const int size = n_comp == 1 ? graph.components[0].n_obs : 0;
        throw SplitError("inseparable dataset: a single connected component holds all " +
                         std::to_string(size) + " observations");
    }

    std::vector<std::size_t> order(n_comp);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    const double target = fraction * data.n_obs();
    std::vector<bool> in_train(n_comp, false);
    int train_obs = 0;
    std::size_t taken = 0;
    for (const std::size_t c : order) {
        in_train[c] = true;
        train_obs += graph.components[c].n_obs;
        ++taken;
        if (static_cast<double>(train_obs) >= target) break;
    }
    if (taken == n_comp) {
        int largest = 0;
        for (const auto& c : graph.components) largest = std::max(largest, c.n_obs);
        throw SplitError("inseparable dataset: reaching the requested fraction leaves no "
                         "observations for test (largest component holds " +
                         std::to_string(largest) + " of " + std::to_string(data.n_obs()) +
                         " observations)");
    }

    SplitResult result;
    result.graph = std::move(graph);
    result.fraction_requested = fraction;
    result.fraction_achieved = static_cast<double>(train_obs) / data.n_obs();
    result.component_assignment.resize(n_comp);
    for (std::size_t c = 0; c < n_comp; ++c) {
        result.component_assignment[c] = in_train[c] ? "train" : "test";
        auto& dest = in_train[c] ? result.train : result.test;
        for (const std::size_t t : result.graph.components[c].task_indices)
            dest.tasks.push_back(data.tasks[t]);
    }
    return result;
}

std::string split_report_json(const SplitResult& result, std::uint64_t seed) {
    std::map<int, int> histogram;  // component size (n_obs) -> count
    for (const auto& c : result.graph.components) histogram[c.n_obs] += 1;
    nlohmann::json j{{"seed", seed},
                     {"fraction_requested", result.fraction_requested},
                     {"fraction_achieved", result.fraction_achieved},
                     {"n_components", result.graph.components.size()},
                     {"train_obs", result.train.n_obs()},
                     {"test_obs", result.test.n_obs()}};
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [size, count] : histogram) hist[std::to_string(size)] = count;
    j["component_size_histogram"] = hist;
    return j.dump(2);
}

}  // namespace cvdcm::split
