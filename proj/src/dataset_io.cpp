#include "cvdcm/dataset_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace cvdcm {

using nlohmann::json;

namespace {

std::string id_field(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw std::runtime_error(std::string("field '") + key + "' must be a string or integer");
}

Alternative parse_alt(const json& j) {
    Alternative alt;
    alt.hhc = j.at("hhc").get<int>();
    alt.tti = j.at("tti").get<int>();
    if (j.contains("image_id") && !j.at("image_id").is_null())
        alt.image_id = j.at("image_id").get<std::string>();
    if (j.contains("month") && !j.at("month").is_null()) alt.month = j.at("month").get<int>();
    check_month(alt.month);
    return alt;
}

json alt_to_json(const Alternative& alt) {
    json j{{"hhc", alt.hhc}, {"tti", alt.tti}, {"month", alt.month}};
    if (!alt.image_id.empty()) j["image_id"] = alt.image_id;
    return j;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

const ImageMeta* ImageManifest::find(const std::string& image_id) const {
    for (const auto& m : images)
        if (m.image_id == image_id) return &m;
    return nullptr;
}

std::string ImageManifest::resolve_path(const ImageMeta& meta) const {
    std::filesystem::path p(meta.path);
    if (p.is_absolute() || base_dir.empty()) return meta.path;
    return (std::filesystem::path(base_dir) / p).string();
}

Dataset read_dataset_jsonl(const std::string& path) {
    auto in = open_input(path);
    Dataset data;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ChoiceTask task;
        task.respondent_id = id_field(j, "respondent_id");
        task.task_id = id_field(j, "task_id");
        const auto& alts = j.at("alts");
        if (!alts.is_array() || alts.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": choice tasks must have exactly two alternatives");
        task.alts[0] = parse_alt(alts[0]);
        task.alts[1] = parse_alt(alts[1]);
        if (j.contains("chosen") && !j.at("chosen").is_null()) {
            task.chosen = j.at("chosen").get<int>();
            if (task.chosen != 0 && task.chosen != 1)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": chosen must be 0 or 1");
        }
        data.tasks.push_back(std::move(task));
    }
    return data;
}

void write_dataset_jsonl(const Dataset& data, const std::string& path) {
    auto out = open_output(path);
    for (const auto& task : data.tasks) {
        json j{{"respondent_id", task.respondent_id},
               {"task_id", task.task_id},
               {"alts", json::array({alt_to_json(task.alts[0]), alt_to_json(task.alts[1])})}};
        if (task.chosen == 0 || task.chosen == 1) j["chosen"] = task.chosen;
        out << j.dump() << '\n';
    }
}

ImageManifest read_manifest_jsonl(const std::string& path) {
    auto in = open_input(path);
    ImageManifest manifest;
    manifest.base_dir = std::filesystem::path(path).parent_path().string();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ImageMeta meta;
        meta.image_id = j.at("image_id").get<std::string>();
        meta.path = j.at("path").get<std::string>();
        meta.month = j.at("month").get<int>();
        check_month(meta.month);
        meta.municipality = j.at("municipality").get<std::string>();
        if (j.contains("density") && !j.at("density").is_null())
            meta.density = j.at("density").get<double>();
        if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
            const auto& g = j.at("ground_truth");
            SceneFractions f;
            f.green = g.value("green", 0.0);
            f.built = g.value("built", 0.0);
            f.sky = g.value("sky", 0.0);
            f.water = g.value("water", 0.0);
            f.road = g.value("road", 0.0);
            f.clutter = g.value("clutter", 0.0);
            meta.ground_truth = f;
        }
        manifest.images.push_back(std::move(meta));
    }
    return manifest;
}

std::string params_to_json(const ModelParams& p) {
    json j{{"beta_hhc", p.beta_hhc},
           {"beta_tti", p.beta_tti},
           {"beta_month", p.beta_month},
           {"beta_k", p.beta_k},
           {"scaling", {{"cost_divisor", p.scaling.cost_divisor},
                        {"time_divisor", p.scaling.time_divisor}}}};
    return j.dump(2);
}

ModelParams params_from_json(const std::string& text) {
    const json j = json::parse(text);
    ModelParams p;
    p.beta_hhc = j.at("beta_hhc").get<double>();
    p.beta_tti = j.at("beta_tti").get<double>();
    const auto& months = j.at("beta_month");
    if (months.size() != 12) throw std::runtime_error("beta_month must hold 12 values");
    for (int m = 0; m < 12; ++m) p.beta_month[m] = months[m].get<double>();
    if (p.beta_month[11] != 0.0)
        throw std::runtime_error("the December month constant must be fixed to zero");
    if (j.contains("beta_k")) p.beta_k = j.at("beta_k").get<std::vector<double>>();
    if (j.contains("scaling")) {
        p.scaling.cost_divisor = j.at("scaling").value("cost_divisor", 225.0);
        p.scaling.time_divisor = j.at("scaling").value("time_divisor", 15.0);
    }
    return p;
}

std::string estimation_to_json(const EstimationResult& r) {
    json params = json::array();
    for (std::size_t i = 0; i < r.param_names.size(); ++i)
        params.push_back({{"name", r.param_names[i]},
                          {"est", r.estimates[i]},
                          {"se", r.std_errors[i]},
                          {"p", r.p_values[i]}});
    json j{{"converged", r.converged},
           {"iterations", r.iterations},
           {"n_obs", r.n_obs},
           {"loglik", r.loglik},
           {"rho2", r.rho2},
           {"cross_entropy", r.cross_entropy},
           {"params", params},
           {"covariance", r.covariance},
           {"vtt", r.vtt},
           {"vtt_se", r.vtt_se},
           {"vtt_p", r.vtt_p},
           {"model_params", json::parse(params_to_json(r.params))}};
    return j.dump(2);
}

void write_manifest_jsonl(const ImageManifest& manifest, const std::string& path) {
    auto out = open_output(path);
    for (const auto& m : manifest.images) {
        json j{{"image_id", m.image_id},
               {"path", m.path},
               {"month", m.month},
               {"municipality", m.municipality}};
        if (m.density) j["density"] = *m.density;
        if (m.ground_truth) {
            const auto& f = *m.ground_truth;
            j["ground_truth"] = {{"green", f.green}, {"built", f.built}, {"sky", f.sky},
                                 {"water", f.water}, {"road", f.road},  {"clutter", f.clutter}};
        }
        out << j.dump() << '\n';
    }
}

}  // namespace cvdcm
