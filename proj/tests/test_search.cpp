#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "fusesim/search.hpp"

using namespace fusesim;

TEST_CASE("prefill length bucketing") {
    CHECK(bucket_prefill_length(32).index == 0);
    CHECK(bucket_prefill_length(32).representative == 32);
    CHECK(bucket_prefill_length(48).representative == 32);
    CHECK(bucket_prefill_length(49).representative == 64);
    CHECK(bucket_prefill_length(100).index == 2);
    CHECK(bucket_prefill_length(100).representative == 128);
    CHECK(bucket_prefill_length(384).representative == 256);
    CHECK(bucket_prefill_length(385).representative == 512);
    CHECK(bucket_prefill_length(512).index == 4);
    CHECK(bucket_prefill_length(512).representative == 512);
    CHECK(bucket_prefill_length(10000).representative == 512);
    CHECK_THROWS_AS(bucket_prefill_length(0), SimError);
}

TEST_CASE("search_g1 respects the budget and the evaluation caps") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(32);
    ProfileEntry pinned_max = measure_config(c, phase, 2850, 848, std::nullopt);

    double budget = 1.02 * pinned_max.energy_per_token;
    SearchResult r = search_g1(c, phase, budget);
    CHECK(r.energy_per_token <= budget);
    CHECK(r.report.inferences_step1 <= 12);
    CHECK(r.report.inferences_step2 <= 36);
    CHECK(r.report.candidates.gpu.size() >= 1);
    CHECK(r.report.candidates.gpu.size() <= 2);
    if (r.report.candidates.gpu.size() == 2) {
        // adjacent in the GPU list
        auto& g = c.table.gpu;
        auto i0 = std::find(g.begin(), g.end(), r.report.candidates.gpu[0]) - g.begin();
        auto i1 = std::find(g.begin(), g.end(), r.report.candidates.gpu[1]) - g.begin();
        CHECK(std::abs(i1 - i0) == 1);
    }

    // a generous budget stops step 1 at the top frequency: one candidate
    SearchResult top = search_g1(c, phase, 10.0 * pinned_max.energy_per_token);
    CHECK(top.report.inferences_step1 == 1);
    CHECK(top.report.candidates.gpu == std::vector<double>{848.0});

    CHECK_THROWS_AS(search_g1(c, phase, 1e-3), BudgetInfeasible);
}

TEST_CASE("lowering the G1 budget never lowers the result latency") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(32);
    double e0 = measure_config(c, phase, 2850, 848, std::nullopt).energy_per_token;
    double prev_lat = 0;
    for (double scale : {1.30, 1.10, 1.02}) {
        SearchResult r = search_g1(c, phase, scale * e0);
        CHECK(r.latency >= prev_lat - 1e-9);
        prev_lat = r.latency;
    }
}

TEST_CASE("search_g2 respects the target and the evaluation caps") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(32);
    ProfileEntry pinned_max = measure_config(c, phase, 2850, 848, std::nullopt);

    double target = 1.10 * pinned_max.latency;
    SearchResult r = search_g2(c, phase, target);
    CHECK(r.latency <= target);
    CHECK(r.report.inferences_step1 <= 12);
    CHECK(r.report.inferences_step2 <= 36);
    CHECK(r.report.candidates.gpu.size() >= 1);
    CHECK(r.report.candidates.gpu.size() <= 2);

    CHECK_THROWS_AS(search_g2(c, phase, 1e-3), TargetInfeasible);
}

TEST_CASE("build_config_table is deterministic and bounded") {
    Calibration c = default_calibration();
    TableGoals goals;
    goals.decode =
        SearchGoal::g1(1.02 * measure_config(c, PhaseSpec::decode(kDecodeRepresentative), 2850,
                                             848, std::nullopt)
                                  .energy_per_token);
    for (int i = 0; i < 5; ++i) {
        PhaseSpec p = PhaseSpec::prefill(kPrefillRepresentatives[i]);
        goals.prefill[i] =
            SearchGoal::g1(1.02 * measure_config(c, p, 2850, 848, std::nullopt).energy_per_token);
    }
    FuseTable a = build_config_table(c, goals);
    FuseTable b = build_config_table(c, goals);
    CHECK(fuse_table_to_json(a) == fuse_table_to_json(b));
    CHECK(a.aggregate.total() <= 72);
    for (int i = 0; i < 5; ++i) {
        CHECK(c.table.contains(Component::Cpu, a.prefill[i].f_cpu));
        CHECK(c.table.contains(Component::Gpu, a.prefill[i].f_gpu));
    }

    // lookup routing
    CHECK(lookup_config(a, PhaseKind::Decode, 0).f_gpu == a.decode.f_gpu);
    CHECK(lookup_config(a, PhaseKind::Prefill, 200).f_gpu == a.prefill[3].f_gpu);
    CHECK(lookup_config(a, PhaseKind::Prefill, 1).f_gpu == a.prefill[0].f_gpu);

    // serialization round-trip
    std::string path =
        (std::filesystem::temp_directory_path() / "fusesim_table_test.json").string();
    save_fuse_table(a, path);
    FuseTable back = load_fuse_table(path);
    CHECK(fuse_table_to_json(back) == fuse_table_to_json(a));
    std::remove(path.c_str());
}
