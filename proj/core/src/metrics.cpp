#include "fusesim/metrics.hpp"

#include "fusesim/util.hpp"

namespace fusesim {

double effective_frequency(const SimTrace& trace, Component c) {
    if (trace.empty()) throw SimError("effective_frequency: empty trace");
    KahanSum num, den;
    for (const auto& r : trace) {
        double f = c == Component::Cpu ? r.f_cpu : c == Component::Gpu ? r.f_gpu : r.f_mem;
        num.add(f * r.dt);
        den.add(r.dt);
    }
    return num.value() / den.value();
}

double energy_per_token(double avg_power_mw, double latency_ms, const PhaseSpec& phase) {
    if (phase.kind == PhaseKind::Prefill) {
        if (phase.n_p <= 0) throw SimError("energy_per_token: N_p must be >= 1");
        return avg_power_mw * latency_ms / phase.n_p / 1000.0;
    }
    return avg_power_mw * latency_ms / 1000.0;  // latency is per token (TPOT)
}

double e2e_latency(double ttft_ms, double tpot_ms, int n_d) {
    if (n_d < 1) throw SimError("e2e_latency: N_d must be >= 1");
    return ttft_ms + (n_d - 1) * tpot_ms;
}

PhaseMetrics phase_metrics(const RunOutput& out, const PhaseSpec& phase) {
    PhaseMetrics m;
    const PhaseResult& r = out.result;
    m.latency = phase.kind == PhaseKind::Decode ? r.latency / phase.n_d : r.latency;
    m.avg_power = r.avg_power;
    m.energy_per_token = energy_per_token(r.warm_power(), m.latency, phase);
    m.eff_freq_cpu = r.freq_time_cpu / r.latency;
    m.eff_freq_gpu = r.freq_time_gpu / r.latency;
    m.eff_freq_mem = r.freq_time_mem / r.latency;
    return m;
}

}  // namespace fusesim
