#pragma once

#include <vector>

#include "fusesim/calibration.hpp"
#include "fusesim/governors.hpp"
#include "fusesim/model.hpp"
#include "fusesim/types.hpp"

namespace fusesim {

// One simulation tick (1 ms; the final tick of a phase may be fractional).
struct TickRecord {
    double t = 0;        // ms, start of tick
    double dt = 1.0;     // ms covered by this record
    double f_cpu = 0, f_gpu = 0, f_mem = 0;
    double u_cpu = 0, u_gpu = 0, u_mem = 0;
    double power = 0;    // mW
    double tokens_done = 0;
    PhaseKind phase = PhaseKind::Decode;
};

using SimTrace = std::vector<TickRecord>;

struct PhaseResult {
    double latency = 0;        // ms to finish the phase's kernels
    double avg_power = 0;      // mW, time-average over the whole run
    double energy = 0;         // mJ, full time-integral of power
    double head50_energy = 0;  // mJ spent in the first 50 ms (warm-up window)
    double freq_time_cpu = 0;  // MHz*ms sums for effective frequencies
    double freq_time_gpu = 0;
    double freq_time_mem = 0;

    // Average power excluding the first 50 ms (profiling warm-up rule);
    // falls back to avg_power for runs shorter than that.
    double warm_power() const {
        return latency > 50.0 ? (energy * 1000.0 - head50_energy * 1000.0) / (latency - 50.0)
                              : avg_power;
    }
};

// A scheduled governor replacement at a simulated instant (pin / unpin).
struct GovernorChange {
    double at_ms = 0;
    std::optional<CpuGovernor> cpu;
    std::optional<GpuGovernor> gpu;
    std::optional<MemGovernor> mem;
};

struct Scenario {
    PhaseSpec phase;
    GovernorSet governors;
    std::vector<GovernorChange> schedule;       // times non-decreasing
    std::optional<double> duration_ms;          // run for a fixed time instead
                                                // of to completion
};

struct RunOptions {
    bool record_trace = true;
    double max_ms = 60000.0;  // non-termination guard (no token within this)
};

struct RunOutput {
    SimTrace trace;
    PhaseResult result;
};

// Advance 1 ms ticks: per tick compute steady-state utilizations at the
// current frequencies, accrue fractional kernel progress, feed busy fractions
// to the governors at their cadences (EAS every tick, quickstep/memory every
// window), stop when the phase's kernels complete (or duration elapses).
// The governor set is taken by reference and left in its final state so
// callers can run consecutive phases under continuous governor dynamics.
RunOutput run_phase(const Calibration& calib, const PhaseSpec& phase, GovernorSet& gov,
                    const RunOptions& opt = {});

RunOutput run_scenario(const Calibration& calib, const Scenario& sc, const RunOptions& opt = {});

// Trace CSV (header: t_ms,f_cpu,f_gpu,f_mem,u_cpu,u_gpu,u_mem,power_mw,tokens_done).
std::string trace_to_csv(const SimTrace& trace);

}  // namespace fusesim
