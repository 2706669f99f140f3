#pragma once

#include <string>
#include <vector>

#include "cvdcm/dataset_io.hpp"
#include "cvdcm/rng.hpp"
#include "cvdcm/types.hpp"

// Pivoted stated-choice design: regime-dependent attribute levels, the
// full-factorial template enumeration with equal-level and dominance
// filtering, and random image pairing with municipality exclusion.
namespace cvdcm::design {

struct Regime {
    std::vector<int> hhc_levels;  // the seven pivoted cost levels
    std::vector<int> tti_levels;  // band-dependent travel-time levels
};

// (A,B) attribute deltas with a strict cost/time trade-off
struct TaskTemplate {
    int hhc_a = 0;
    int tti_a = 0;
    int hhc_b = 0;
    int tti_b = 0;
};

struct IneligibleRespondent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Attribute levels for the respondent's current travel-time band; throws
// IneligibleRespondent below the first band.
Regime levels_for(double current_tt);

// Full factorial over ordered (A,B) pairs, minus tasks with any equal
// attribute level, minus dominated tasks (one alternative cheaper AND
// faster under the negative-sign priors).
std::vector<TaskTemplate> enumerate_templates(const Regime& regime);

// Two distinct images drawn uniformly without replacement from manifest
// entries outside the respondent's municipality.
ChoiceTask assign_images(const TaskTemplate& tpl, const ImageManifest& manifest,
                         const std::string& respondent_municipality, Rng& rng);

std::vector<ChoiceTask> build_respondent_design(double current_tt, int n_tasks,
                                                const ImageManifest& manifest,
                                                const std::string& respondent_municipality,
                                                std::uint64_t seed);

}  // namespace cvdcm::design
