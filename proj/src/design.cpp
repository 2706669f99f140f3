#include "cvdcm/design.hpp"

#include <algorithm>

namespace cvdcm::design {

namespace {
const std::vector<int> kHhcLevels = {-225, -150, -75, 0, 75, 150, 225};
}

Regime levels_for(double current_tt) {
    if (current_tt < 0.0) throw std::invalid_argument("current travel time must be >= 0");
    Regime r;
    r.hhc_levels = kHhcLevels;
    if (current_tt > 30.0) {
        r.tti_levels = {-15, -10, -5, 0, 5, 10, 15};
    } else if (current_tt > 20.0) {
        r.tti_levels = {-10, -5, 0, 5, 10, 15};
    } else if (current_tt > 10.0) {
        r.tti_levels = {-5, 0, 5, 10, 15};
    } else {
        throw IneligibleRespondent("respondent ineligible: current travel time " +
                                   std::to_string(current_tt) + " is not above 10 minutes");
    }
    return r;
}

std::vector<TaskTemplate> enumerate_templates(const Regime& regime) {
    std::vector<TaskTemplate> out;
    for (int ha : regime.hhc_levels)
        for (int ta : regime.tti_levels)
            for (int hb : regime.hhc_levels)
                for (int tb : regime.tti_levels) {
                    if (ha == hb || ta == tb) continue;
                    // strict trade-off: one alternative cheaper, the other faster
                    const bool a_cheaper = ha < hb;
                    const bool a_faster = ta < tb;
                    if (a_cheaper == a_faster) continue;  // dominated
                    out.push_back({ha, ta, hb, tb});
                }
    return out;
}

ChoiceTask assign_images(const TaskTemplate& tpl, const ImageManifest& manifest,
                         const std::string& respondent_municipality, Rng& rng) {
    std::vector<const ImageMeta*> eligible;
    for (const auto& m : manifest.images)
        if (m.municipality != respondent_municipality) eligible.push_back(&m);
    if (eligible.size() < 2)
        throw std::runtime_error("fewer than 2 images outside municipality '" +
                                 respondent_municipality + "'");

    const std::size_t i = rng.uniform_int(eligible.size());
    std::size_t j = rng.uniform_int(eligible.size() - 1);
    if (j >= i) ++j;  // without replacement

    ChoiceTask task;
    task.alts[0].hhc = tpl.hhc_a;
    task.alts[0].tti = tpl.tti_a;
    task.alts[0].image_id = eligible[i]->image_id;
    task.alts[0].month = eligible[i]->month;
    task.alts[1].hhc = tpl.hhc_b;
    task.alts[1].tti = tpl.tti_b;
    task.alts[1].image_id = eligible[j]->image_id;
    task.alts[1].month = eligible[j]->month;
    return task;
}

std::vector<ChoiceTask> build_respondent_design(double current_tt, int n_tasks,
                                                const ImageManifest& manifest,
                                                const std::string& respondent_municipality,
                                                std::uint64_t seed) {
    const Regime regime = levels_for(current_tt);
    const auto templates = enumerate_templates(regime);
    Rng rng(seed);
    std::vector<ChoiceTask> tasks;
    tasks.reserve(n_tasks);
    for (int t = 0; t < n_tasks; ++t) {
        const auto& tpl = templates[rng.uniform_int(templates.size())];
        ChoiceTask task = assign_images(tpl, manifest, respondent_municipality, rng);
        task.task_id = std::to_string(t);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

}  // namespace cvdcm::design
