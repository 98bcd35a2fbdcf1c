#include "fusesim/sim.hpp"

#include <cmath>
#include <sstream>

#include "fusesim/metrics.hpp"
#include "fusesim/util.hpp"

namespace fusesim {

namespace {

RunOutput run_impl(const Calibration& calib, const PhaseSpec& phase, GovernorSet& gov,
                   const std::vector<GovernorChange>& schedule, std::optional<double> duration_ms,
                   const RunOptions& opt) {
    phase.validate();
    const PerfModelParams perf = calib.perf_for(phase);
    // Prefill processes its prompt as one batch of K kernels with scaled
    // work; decode completes K kernels per output token.
    const double kernels_target =
        phase.kind == PhaseKind::Prefill ? phase.k : static_cast<double>(phase.n_d) * phase.k;

    const int window = calib.gov.quickstep_window_ms;
    RunOutput out;
    KahanSum energy_uj;        // mW*ms
    KahanSum head50_uj;
    KahanSum ft_cpu, ft_gpu, ft_mem;
    double kernels_done = 0;
    double t = 0;
    double latency = -1;
    double last_progress = 0;  // last time a kernel boundary was crossed
    std::vector<double> win_gpu, win_mem;
    win_gpu.reserve(window);
    win_mem.reserve(window);
    std::size_t next_change = 0;

    while (true) {
        while (next_change < schedule.size() && schedule[next_change].at_ms <= t) {
            const auto& ch = schedule[next_change++];
            if (ch.cpu) gov.cpu = *ch.cpu;
            if (ch.gpu) gov.gpu = *ch.gpu;
            if (ch.mem) gov.mem = *ch.mem;
        }
        FreqConfig cfg{current_freq(gov.cpu), current_freq(gov.gpu), current_freq(gov.mem)};
        UtilPoint up = steady_state(cfg, perf);
        double power = power_draw(cfg, up, calib.power, calib.table);

        double dt = 1.0;
        double kernels_next = kernels_done + dt / up.period;
        if (!duration_ms && kernels_next >= kernels_target && latency < 0) {
            dt = (kernels_target - kernels_done) * up.period;
            latency = t + dt;
            kernels_next = kernels_target;
        }
        if (std::floor(kernels_next) > std::floor(kernels_done)) last_progress = t + dt;
        kernels_done = kernels_next;

        energy_uj.add(power * dt);
        if (t < 50.0) head50_uj.add(power * std::min(dt, 50.0 - t));
        ft_cpu.add(cfg.f_cpu * dt);
        ft_gpu.add(cfg.f_gpu * dt);
        ft_mem.add(cfg.f_mem.value() * dt);
        if (opt.record_trace)
            out.trace.push_back({t, dt, cfg.f_cpu, cfg.f_gpu, *cfg.f_mem, up.u_cpu, up.u_gpu,
                                 up.u_mem, power, kernels_done / phase.k, phase.kind});
        if (latency >= 0) break;

        if (auto* eas = std::get_if<EasState>(&gov.cpu)) {
            eas_tick(*eas, up.u_cpu, cfg.f_cpu, calib.table.max(Component::Cpu));
            eas_select(*eas, calib.table);
        }
        win_gpu.push_back(up.u_gpu);
        win_mem.push_back(up.u_mem);
        if (static_cast<int>(win_gpu.size()) >= window) {
            double mg = 0, mm = 0;
            for (double v : win_gpu) mg += v;
            for (double v : win_mem) mm += v;
            mg /= win_gpu.size();
            mm /= win_mem.size();
            win_gpu.clear();
            win_mem.clear();
            if (auto* qs = std::get_if<QuickstepState>(&gov.gpu)) quickstep_step(*qs, mg);
            if (auto* im = std::get_if<InteractiveMemState>(&gov.mem))
                interactive_mem_step(*im, mm, calib.table);
        }
        t += 1.0;
        if (duration_ms && t >= *duration_ms) {
            latency = *duration_ms;
            break;
        }
        if (t - last_progress > opt.max_ms)
            throw NonTermination("no token completed within " + std::to_string(opt.max_ms) +
                                 " ms simulated");
    }

    out.result.latency = latency;
    out.result.energy = energy_uj.value() / 1000.0;
    out.result.head50_energy = head50_uj.value() / 1000.0;
    out.result.avg_power = energy_uj.value() / latency;
    out.result.freq_time_cpu = ft_cpu.value();
    out.result.freq_time_gpu = ft_gpu.value();
    out.result.freq_time_mem = ft_mem.value();
    return out;
}

}  // namespace

RunOutput run_phase(const Calibration& calib, const PhaseSpec& phase, GovernorSet& gov,
                    const RunOptions& opt) {
    return run_impl(calib, phase, gov, {}, std::nullopt, opt);
}

RunOutput run_scenario(const Calibration& calib, const Scenario& sc, const RunOptions& opt) {
    for (std::size_t i = 1; i < sc.schedule.size(); ++i)
        if (sc.schedule[i].at_ms < sc.schedule[i - 1].at_ms)
            throw SimError("scenario schedule times must be non-decreasing");
    GovernorSet gov = sc.governors;
    return run_impl(calib, sc.phase, gov, sc.schedule, sc.duration_ms, opt);
}

std::string trace_to_csv(const SimTrace& trace) {
    std::ostringstream os;
    os << "t_ms,f_cpu,f_gpu,f_mem,u_cpu,u_gpu,u_mem,power_mw,tokens_done\n";
    for (const auto& r : trace) {
        os << format_double(r.t) << ',' << format_double(r.f_cpu) << ',' << format_double(r.f_gpu)
           << ',' << format_double(r.f_mem) << ',' << format_double(r.u_cpu) << ','
           << format_double(r.u_gpu) << ',' << format_double(r.u_mem) << ','
           << format_double(r.power) << ',' << format_double(r.tokens_done) << '\n';
    }
    return os.str();
}

}  // namespace fusesim
