#pragma once

#include "fusesim/sim.hpp"
#include "fusesim/types.hpp"

namespace fusesim {

struct PhaseMetrics {
    double latency = 0;           // TTFT (prefill) or TPOT (decode), ms
    double energy_per_token = 0;  // mJ
    double avg_power = 0;         // mW
    double eff_freq_cpu = 0;      // MHz, time-weighted
    double eff_freq_gpu = 0;
    double eff_freq_mem = 0;
};

// Time-weighted average frequency over a trace.
double effective_frequency(const SimTrace& trace, Component c);

// prefill: P*TTFT/N_p; decode: P*TPOT (latency is per token already).
double energy_per_token(double avg_power_mw, double latency_ms, const PhaseSpec& phase);

// TTFT + (N_d - 1) * TPOT.
double e2e_latency(double ttft_ms, double tpot_ms, int n_d);

// Full metrics for a finished phase run. Latency is reported per token for
// decode (TPOT) and for the whole batch for prefill (TTFT). Energy-per-token
// uses the warm-up-discarded average power (profiling rule).
PhaseMetrics phase_metrics(const RunOutput& out, const PhaseSpec& phase);

}  // namespace fusesim
