#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cvdcm/dataset_io.hpp"
#include "test_support.hpp"

using namespace cvdcm;
using namespace cvdcm::test;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cvdcm_io_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("dataset JSONL round trip") {
    Rng rng(1);
    Dataset data = random_dataset(rng, 25);
    for (std::size_t i = 0; i < data.tasks.size(); ++i) {
        data.tasks[i].respondent_id = "r" + std::to_string(i / 5);
        data.tasks[i].alts[0].image_id = "img_a" + std::to_string(i);
        data.tasks[i].alts[1].image_id = "img_b" + std::to_string(i);
    }
    data.tasks[3].chosen = -1;  // unanswered survives the round trip

    TempDir tmp;
    write_dataset_jsonl(data, tmp.file("d.jsonl"));
    const Dataset back = read_dataset_jsonl(tmp.file("d.jsonl"));
    REQUIRE(back.n_obs() == data.n_obs());
    for (int i = 0; i < data.n_obs(); ++i) {
        CHECK(back.tasks[i].respondent_id == data.tasks[i].respondent_id);
        CHECK(back.tasks[i].task_id == data.tasks[i].task_id);
        CHECK(back.tasks[i].chosen == data.tasks[i].chosen);
        for (int j = 0; j < 2; ++j) {
            CHECK(back.tasks[i].alts[j].hhc == data.tasks[i].alts[j].hhc);
            CHECK(back.tasks[i].alts[j].tti == data.tasks[i].alts[j].tti);
            CHECK(back.tasks[i].alts[j].month == data.tasks[i].alts[j].month);
            CHECK(back.tasks[i].alts[j].image_id == data.tasks[i].alts[j].image_id);
        }
    }
}

TEST_CASE("dataset JSONL validation errors") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("bad.jsonl"));
        out << R"({"respondent_id":"r0","task_id":"t0","alts":[{"hhc":0,"tti":0}],"chosen":0})"
            << "\n";
    }
    CHECK_THROWS(read_dataset_jsonl(tmp.file("bad.jsonl")));  // one alternative only

    {
        std::ofstream out(tmp.file("bad2.jsonl"));
        out << "not json\n";
    }
    CHECK_THROWS(read_dataset_jsonl(tmp.file("bad2.jsonl")));

    {
        std::ofstream out(tmp.file("bad3.jsonl"));
        out << R"({"respondent_id":"r0","task_id":"t0","alts":[{"hhc":0,"tti":0},)"
            << R"({"hhc":1,"tti":1}],"chosen":2})" << "\n";
    }
    CHECK_THROWS(read_dataset_jsonl(tmp.file("bad3.jsonl")));

    CHECK_THROWS(read_dataset_jsonl(tmp.file("missing.jsonl")));
}

TEST_CASE("manifest JSONL round trip with metadata") {
    ImageManifest manifest;
    manifest.base_dir = "/data";
    for (int i = 0; i < 5; ++i) {
        ImageMeta m;
        m.image_id = "img_" + std::to_string(i);
        m.path = "images/" + m.image_id + ".png";
        m.month = 1 + i;
        m.municipality = "M" + std::to_string(i % 2);
        if (i % 2 == 0) m.density = 0.1 * i;
        if (i > 0) m.ground_truth = SceneFractions{0.1 * i, 0.2, 0.3, 0.0, 0.4 - 0.1 * i, 0.0};
        manifest.images.push_back(m);
    }
    TempDir tmp;
    write_manifest_jsonl(manifest, tmp.file("m.jsonl"));
    const ImageManifest back = read_manifest_jsonl(tmp.file("m.jsonl"));
    REQUIRE(back.images.size() == 5);
    CHECK(back.find("img_3") != nullptr);
    CHECK(back.find("nope") == nullptr);
    CHECK(back.images[2].density.has_value());
    CHECK(!back.images[1].density.has_value());
    CHECK(back.images[4].ground_truth->green == doctest::Approx(0.4));
    CHECK(back.resolve_path(back.images[0]) == tmp.file("images/img_0.png"));
}

TEST_CASE("model params JSON round trip enforces the December normalization") {
    ModelParams p;
    p.beta_hhc = -0.87;
    p.beta_tti = -0.21;
    p.beta_month[0] = 0.46;
    p.beta_k = {0.1, -0.2, 0.3};
    const ModelParams back = params_from_json(params_to_json(p));
    CHECK(back.beta_hhc == p.beta_hhc);
    CHECK(back.beta_month[0] == 0.46);
    CHECK(back.beta_k == p.beta_k);

    ModelParams bad = p;
    bad.beta_month[11] = 0.5;
    CHECK_THROWS(params_from_json(params_to_json(bad)));
}
