#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cvdcm/types.hpp"

// Leakage-safe train/test split across images: images sharing a choice task,
// directly or transitively, always land in the same partition.
namespace cvdcm::split {

struct Component {
    std::vector<std::string> image_ids;
    std::vector<std::size_t> task_indices;
    int n_obs = 0;
};

struct ImageGraph {
    std::vector<Component> components;
};

struct SplitResult {
    Dataset train;
    Dataset test;
    double fraction_requested = 0.0;
    double fraction_achieved = 0.0;
    // component index -> "train" | "test"
    std::vector<std::string> component_assignment;
    ImageGraph graph;
};

// Union-find over the two images of every task; components carry their
// task lists and observation counts.
ImageGraph build_image_graph(const Dataset& data);

// Components drawn in seeded random order into train until the accumulated
// observation share first reaches `fraction`; the rest form test. Throws
// SplitError when no valid split leaves test non-empty.
SplitResult split(const Dataset& data, double fraction, std::uint64_t seed);

// {"seed","fraction_requested","fraction_achieved","component_size_histogram"}
std::string split_report_json(const SplitResult& result, std::uint64_t seed);

}  // namespace cvdcm::split
