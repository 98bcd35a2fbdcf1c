#include <doctest.h>

#include "fusesim/metrics.hpp"
#include "fusesim/sim.hpp"
#include "fusesim/util.hpp"

using namespace fusesim;

namespace {

GovernorSet all_pin(const Calibration& c, double fc, double fg, double fm) {
    return {make_pin(fc, Component::Cpu, c.table), make_pin(fg, Component::Gpu, c.table),
            make_pin(fm, Component::Mem, c.table)};
}

}  // namespace

TEST_CASE("all-pin latency matches the analytic steady state") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(32);
    for (auto [fc, fg, fm] : {std::tuple{2850.0, 848.0, 3172.0}, {1277.0, 400.0, 1014.0},
                              {500.0, 151.0, 421.0}}) {
        GovernorSet gov = all_pin(c, fc, fg, fm);
        RunOutput out = run_phase(c, phase, gov);
        double expect = steady_state({fc, fg, fm}, c.decode).period * phase.k * phase.n_d;
        CHECK(out.result.latency == doctest::Approx(expect).epsilon(1e-9));
        CHECK(out.trace.back().tokens_done == doctest::Approx(32.0).epsilon(1e-9));
    }
}

TEST_CASE("faster pins are never slower") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(8);
    GovernorSet fast = all_pin(c, 2850, 848, 3172);
    GovernorSet slow = all_pin(c, 500, 151, 421);
    CHECK(run_phase(c, phase, fast).result.latency <=
          run_phase(c, phase, slow).result.latency);
}

TEST_CASE("default governors drive the GPU to a low effective frequency") {
    Calibration c = default_calibration();
    GovernorSet gov = c.default_governors();
    RunOutput out = run_phase(c, PhaseSpec::decode(32), gov);
    CHECK(effective_frequency(out.trace, Component::Gpu) < 500.0);
}

TEST_CASE("runs are deterministic and traces conserve energy") {
    Calibration c = default_calibration();
    GovernorSet g1 = c.default_governors();
    GovernorSet g2 = c.default_governors();
    PhaseSpec phase = PhaseSpec::decode(16);
    RunOutput a = run_phase(c, phase, g1);
    RunOutput b = run_phase(c, phase, g2);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].power == b.trace[i].power);
        CHECK(a.trace[i].f_gpu == b.trace[i].f_gpu);
        CHECK(a.trace[i].u_cpu == b.trace[i].u_cpu);
    }
    KahanSum e;
    for (const auto& r : a.trace) e.add(r.power * r.dt);
    CHECK(e.value() / 1000.0 ==
          doctest::Approx(a.result.avg_power * a.result.latency / 1000.0).epsilon(1e-9));
    CHECK(e.value() / 1000.0 == doctest::Approx(a.result.energy).epsilon(1e-9));
}

TEST_CASE("empty schedule is equivalent to run_phase") {
    Calibration c = default_calibration();
    GovernorSet gov = c.default_governors();
    RunOutput direct = run_phase(c, PhaseSpec::decode(8), gov);

    Scenario sc;
    sc.phase = PhaseSpec::decode(8);
    sc.governors = c.default_governors();
    RunOutput via_scenario = run_scenario(c, sc);
    REQUIRE(direct.trace.size() == via_scenario.trace.size());
    for (std::size_t i = 0; i < direct.trace.size(); ++i)
        CHECK(direct.trace[i].power == via_scenario.trace[i].power);
}

TEST_CASE("scenario rejects a decreasing schedule") {
    Calibration c = default_calibration();
    Scenario sc;
    sc.phase = PhaseSpec::decode(4);
    sc.governors = c.default_governors();
    sc.schedule.push_back({100.0, std::nullopt, GpuGovernor{c.make_quickstep(848)}, std::nullopt});
    sc.schedule.push_back({50.0, std::nullopt, GpuGovernor{c.make_quickstep(848)}, std::nullopt});
    CHECK_THROWS_AS(run_scenario(c, sc), SimError);
}

TEST_CASE("unpinning the GPU mid-run spirals both components to their minima") {
    Calibration c = default_calibration();
    Scenario sc;
    sc.phase = PhaseSpec::decode(1 << 30);
    sc.duration_ms = 1500.0;
    sc.governors = {c.make_eas(2850), make_pin(848, Component::Gpu, c.table), c.make_mem(3172)};
    sc.schedule.push_back({250.0, std::nullopt, GpuGovernor{c.make_quickstep(848)}, std::nullopt});
    RunOutput out = run_scenario(c, sc);

    double prev = 848;
    bool monotone = true;
    for (const auto& r : out.trace) {
        if (r.t < 250) continue;
        if (r.f_gpu > prev + 1e-12) monotone = false;
        prev = r.f_gpu;
    }
    CHECK(monotone);
    CHECK(out.trace.back().f_gpu == 151);
    CHECK(out.trace.back().f_cpu == 500);
}

TEST_CASE("trace CSV has one row per tick with the documented header") {
    Calibration c = default_calibration();
    GovernorSet gov = all_pin(c, 2850, 848, 3172);
    RunOutput out = run_phase(c, PhaseSpec::decode(2), gov);
    std::string csv = trace_to_csv(out.trace);
    CHECK(csv.rfind("t_ms,f_cpu,f_gpu,f_mem,u_cpu,u_gpu,u_mem,power_mw,tokens_done\n", 0) == 0);
    std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == out.trace.size() + 1);
}

TEST_CASE("non-termination guard fires when no kernel can complete") {
    Calibration c = default_calibration();
    c.decode.g0 = 1e12;  // one kernel takes ~1e12 ms
    GovernorSet gov = all_pin(c, 2850, 848, 3172);
    RunOptions opt;
    opt.record_trace = false;
    opt.max_ms = 2000;
    CHECK_THROWS_AS(run_phase(c, PhaseSpec::decode(1), gov, opt), NonTermination);
}
