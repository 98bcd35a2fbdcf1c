#include <doctest.h>

#include <cmath>

#include "fusesim/metrics.hpp"

using namespace fusesim;

namespace {

SimTrace constant_trace(double f, double ms) {
    SimTrace t;
    for (int i = 0; i < static_cast<int>(ms); ++i) {
        TickRecord r;
        r.t = i;
        r.dt = 1.0;
        r.f_cpu = r.f_gpu = r.f_mem = f;
        t.push_back(r);
    }
    return t;
}

SimTrace append(SimTrace a, const SimTrace& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

bool exact(double got, double want) { return std::abs(got - want) <= 1e-12 * std::abs(want); }

}  // namespace

TEST_CASE("effective_frequency is the time-weighted mean") {
    CHECK(exact(effective_frequency(constant_trace(848, 100), Component::Gpu), 848.0));
    CHECK(exact(effective_frequency(append(constant_trace(848, 50), constant_trace(151, 50)),
                                    Component::Gpu),
                499.5));
    CHECK(exact(effective_frequency(append(constant_trace(701, 75), constant_trace(151, 25)),
                                    Component::Gpu),
                563.5));
    CHECK_THROWS_AS(effective_frequency({}, Component::Gpu), SimError);
}

TEST_CASE("effective_frequency ignores how intervals are partitioned") {
    SimTrace split = constant_trace(701, 10);
    SimTrace merged;
    TickRecord r;
    r.dt = 10.0;
    r.f_gpu = 701;
    merged.push_back(r);
    CHECK(exact(effective_frequency(split, Component::Gpu),
                effective_frequency(merged, Component::Gpu)));
}

TEST_CASE("energy_per_token formulas") {
    CHECK(exact(energy_per_token(2000, 200, PhaseSpec::decode(1)), 400.0));
    CHECK(exact(energy_per_token(3000, 3200, PhaseSpec::prefill(32)), 300.0));
    // linear in power
    CHECK(exact(energy_per_token(1000, 200, PhaseSpec::decode(1)),
                energy_per_token(2000, 200, PhaseSpec::decode(1)) / 2.0));
}

TEST_CASE("e2e_latency formula") {
    CHECK(exact(e2e_latency(10000, 200, 256), 61000.0));
    CHECK(exact(e2e_latency(1234.5, 999, 1), 1234.5));
    CHECK(exact(e2e_latency(0, 100, 11), 1000.0));
    CHECK_THROWS_AS(e2e_latency(100, 100, 0), SimError);
}

TEST_CASE("decode energy-per-token times tokens equals power times duration") {
    double p = 1718.0, tpot = 42.5;
    int n_d = 17;
    double per_token = energy_per_token(p, tpot, PhaseSpec::decode(1));
    CHECK(exact(per_token * n_d, p * (tpot * n_d) / 1000.0));
}
