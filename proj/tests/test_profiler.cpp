#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "fusesim/profiler.hpp"
#include "fusesim/util.hpp"

using namespace fusesim;

namespace {

ProfileEntry synthetic(double fc, double fg, double lat, double e) {
    ProfileEntry p;
    p.cfg = {fc, fg, std::nullopt};
    p.phase = PhaseSpec::decode(32);
    p.latency = lat;
    p.energy_per_token = e;
    p.avg_power = 1000;
    return p;
}

ProfileSet three_entries() {
    ProfileSet ps;
    ps.calib_hash = "test";
    ps.insert(synthetic(2850, 848, 130, 410));  // A
    ps.insert(synthetic(2188, 701, 150, 395));  // B
    ps.insert(synthetic(1426, 572, 175, 388));  // C
    return ps;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("pin_opt under an energy budget and a latency target") {
    ProfileSet ps = three_entries();
    PinOptConstraint budget;
    budget.energy_budget = 396;
    CHECK(pin_opt(ps, budget).latency == 150);  // B: fastest within budget

    PinOptConstraint target;
    target.latency_target = 180;
    CHECK(pin_opt(ps, target).energy_per_token == 388);  // C: cheapest feasible

    budget.energy_budget = 100;  // below every entry
    CHECK_THROWS_AS(pin_opt(ps, budget), BudgetInfeasible);
}

TEST_CASE("pin_opt extremes return the global minima") {
    ProfileSet ps = three_entries();
    PinOptConstraint budget;
    budget.energy_budget = 1e18;
    CHECK(pin_opt(ps, budget).latency == 130);
    PinOptConstraint target;
    target.latency_target = 1e18;
    CHECK(pin_opt(ps, target).energy_per_token == 388);
}

TEST_CASE("pareto keeps exactly the non-dominated entries") {
    ProfileSet single;
    single.insert(synthetic(2850, 848, 100, 100));
    CHECK(pareto(single).size() == 1);

    ProfileSet dominated;
    dominated.insert(synthetic(2850, 848, 100, 100));  // dominates the next
    dominated.insert(synthetic(2188, 701, 120, 150));
    ProfileSet front = pareto(dominated);
    CHECK(front.size() == 1);
    CHECK(front.entries.begin()->second.latency == 100);

    // anti-chain: all three survive
    CHECK(pareto(three_entries()).size() == 3);
}

TEST_CASE("sweep over restricted grids") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(4);

    GridSpec one;
    one.cpu = {2850};
    one.gpu = {848};
    one.mem = {3172.0};
    ProfileSet ps = sweep(c, phase, one, 1);
    CHECK(ps.size() == 1);
    ProfileEntry direct = measure_config(c, phase, 2850, 848, 3172.0);
    CHECK(ps.entries.begin()->second.latency == direct.latency);
    CHECK(ps.entries.begin()->second.energy_per_token == direct.energy_per_token);

    GridSpec gpu_only;
    gpu_only.cpu = {2188};
    gpu_only.gpu = c.table.gpu;
    gpu_only.mem = {3172.0};
    CHECK(sweep(c, phase, gpu_only, 2).size() == 12);
}

TEST_CASE("full default grid yields 2808 profiles") {
    Calibration c = default_calibration();
    ProfileSet ps = sweep(c, PhaseSpec::decode(4), GridSpec::full(c.table), 8);
    CHECK(ps.size() == 2808);
}

TEST_CASE("sweep result is independent of the worker count") {
    Calibration c = default_calibration();
    PhaseSpec phase = PhaseSpec::decode(2);
    GridSpec grid;
    grid.cpu = {500, 1426, 2850};
    grid.gpu = {151, 471, 848};
    grid.mem = {std::nullopt, 3172.0};
    ProfileSet serial = sweep(c, phase, grid, 1);
    ProfileSet parallel = sweep(c, phase, grid, 4);
    CHECK(profiles_to_csv(serial) == profiles_to_csv(parallel));
}

TEST_CASE("profile CSV round-trips") {
    Calibration c = default_calibration();
    GridSpec grid;
    grid.cpu = {2850, 500};
    grid.gpu = {848};
    grid.mem = {std::nullopt, 1014.0};
    ProfileSet ps = sweep(c, PhaseSpec::decode(2), grid, 1);

    std::string path = temp_path("fusesim_profiles_test.csv");
    save_profiles(ps, path);
    ProfileSet back = load_profiles(path);
    CHECK(profiles_to_csv(back) == profiles_to_csv(ps));
    std::remove(path.c_str());

    std::string empty = temp_path("fusesim_profiles_empty.csv");
    write_file(empty, "");
    CHECK_THROWS_AS(load_profiles(empty), ParseError);
    std::remove(empty.c_str());
}

TEST_CASE("mixed calibration hashes are rejected on load") {
    std::string path = temp_path("fusesim_profiles_mixed.csv");
    write_file(path,
               "phase_kind,n_p,n_d,f_cpu,f_gpu,f_mem_or_default,latency_ms,"
               "energy_mj_per_token,avg_power_mw,calib_hash\n"
               "decode,0,32,2850,848,default,100,400,2000,aaaa\n"
               "decode,0,32,2850,701,default,110,380,1900,bbbb\n");
    CHECK_THROWS_AS(load_profiles(path), ParseError);
    std::remove(path.c_str());
}
