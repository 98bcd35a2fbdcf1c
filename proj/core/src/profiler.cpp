#include "fusesim/profiler.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "fusesim/sim.hpp"
#include "fusesim/util.hpp"

namespace fusesim {

ProfileKey key_of(const ProfileEntry& e) {
    ProfileKey k;
    k.phase_kind = e.phase.kind == PhaseKind::Prefill ? 0 : 1;
    k.n_p = e.phase.n_p;
    k.n_d = e.phase.n_d;
    k.f_cpu = e.cfg.f_cpu;
    k.f_gpu = e.cfg.f_gpu;
    k.f_mem = mem_key(e.cfg);
    return k;
}

void ProfileSet::insert(const ProfileEntry& e) { entries[key_of(e)] = e; }

GridSpec GridSpec::full(const FrequencyTable& t) {
    GridSpec g;
    g.cpu = t.cpu;
    g.gpu = t.gpu;
    g.mem.reserve(t.mem.size());
    for (double f : t.mem) g.mem.emplace_back(f);
    return g;
}

ProfileEntry measure_config(const Calibration& calib, const PhaseSpec& phase,
                            std::optional<double> pin_cpu, std::optional<double> pin_gpu,
                            std::optional<double> pin_mem) {
    GovernorSet gov;
    gov.cpu = pin_cpu ? CpuGovernor{make_pin(*pin_cpu, Component::Cpu, calib.table)}
                      : CpuGovernor{calib.make_eas(calib.table.max(Component::Cpu))};
    gov.gpu = pin_gpu ? GpuGovernor{make_pin(*pin_gpu, Component::Gpu, calib.table)}
                      : GpuGovernor{calib.make_quickstep(calib.table.max(Component::Gpu))};
    gov.mem = pin_mem ? MemGovernor{make_pin(*pin_mem, Component::Mem, calib.table)}
                      : MemGovernor{calib.make_mem(calib.table.max(Component::Mem))};
    RunOptions opt;
    opt.record_trace = false;
    RunOutput out = run_phase(calib, phase, gov, opt);
    PhaseMetrics m = phase_metrics(out, phase);
    ProfileEntry e;
    e.cfg = {pin_cpu.value_or(-1.0), pin_gpu.value_or(-1.0), pin_mem};
    if (pin_cpu) e.cfg.f_cpu = *pin_cpu;
    if (pin_gpu) e.cfg.f_gpu = *pin_gpu;
    e.phase = phase;
    e.latency = m.latency;
    e.energy_per_token = m.energy_per_token;
    e.avg_power = out.result.warm_power();
    return e;
}

ProfileSet sweep(const Calibration& calib, const PhaseSpec& phase, const GridSpec& grid,
                 int workers) {
    struct Combo {
        double fc, fg;
        std::optional<double> fm;
    };
    std::vector<Combo> combos;
    for (double fc : grid.cpu)
        for (double fg : grid.gpu)
            for (const auto& fm : grid.mem) combos.push_back({fc, fg, fm});

    std::vector<ProfileEntry> results(combos.size());
    int n_workers = std::max(1, workers);
    if (n_workers == 1) {
        for (std::size_t i = 0; i < combos.size(); ++i)
            results[i] = measure_config(calib, phase, combos[i].fc, combos[i].fg, combos[i].fm);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex err_mu;
        auto work = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= combos.size()) return;
                try {
                    results[i] =
                        measure_config(calib, phase, combos[i].fc, combos[i].fg, combos[i].fm);
                } catch (...) {
                    std::scoped_lock lk(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> threads;
        for (int w = 0; w < n_workers; ++w) threads.emplace_back(work);
        for (auto& th : threads) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // Key-ordered assembly: the profile set is identical for any worker count.
    ProfileSet ps;
    ps.calib_hash = calib.hash_hex();
    for (const auto& e : results) ps.insert(e);
    return ps;
}

ProfileEntry pin_opt(const ProfileSet& ps, const PinOptConstraint& c) {
    if (c.energy_budget.has_value() == c.latency_target.has_value())
        throw SimError("pin_opt: exactly one of energy_budget / latency_target required");
    const ProfileEntry* best = nullptr;
    auto key = [&](const ProfileEntry& e) {
        // Primary objective first; ties fall to lower energy, then lower
        // frequencies (gpu, cpu, mem).
        double primary = c.energy_budget ? e.latency : e.energy_per_token;
        double secondary = c.energy_budget ? e.energy_per_token : e.latency;
        return std::make_tuple(primary, secondary, e.cfg.f_gpu, e.cfg.f_cpu, mem_key(e.cfg));
    };
    for (const auto& [k, e] : ps.entries) {
        if (c.energy_budget && e.energy_per_token > *c.energy_budget) continue;
        if (c.latency_target && e.latency > *c.latency_target) continue;
        if (!best || key(e) < key(*best)) best = &e;
    }
    if (!best) {
        if (c.energy_budget) throw BudgetInfeasible("no profiled configuration fits the budget");
        throw TargetInfeasible("no profiled configuration meets the target");
    }
    return *best;
}

ProfileSet pareto(const ProfileSet& ps) {
    ProfileSet out;
    out.calib_hash = ps.calib_hash;
    for (const auto& [ka, a] : ps.entries) {
        bool dominated = false;
        for (const auto& [kb, b] : ps.entries) {
            if (b.latency <= a.latency && b.energy_per_token <= a.energy_per_token &&
                (b.latency < a.latency || b.energy_per_token < a.energy_per_token)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.insert(a);
    }
    return out;
}

std::string profiles_to_csv(const ProfileSet& ps) {
    std::ostringstream os;
    os << "phase_kind,n_p,n_d,f_cpu,f_gpu,f_mem_or_default,latency_ms,"
          "energy_mj_per_token,avg_power_mw,calib_hash\n";
    for (const auto& [k, e] : ps.entries) {
        os << to_string(e.phase.kind) << ',' << e.phase.n_p << ',' << e.phase.n_d << ','
           << format_double(e.cfg.f_cpu) << ',' << format_double(e.cfg.f_gpu) << ','
           << (e.cfg.f_mem ? format_double(*e.cfg.f_mem) : std::string("default")) << ','
           << format_double(e.latency) << ',' << format_double(e.energy_per_token) << ','
           << format_double(e.avg_power) << ',' << ps.calib_hash << '\n';
    }
    return os.str();
}

void save_profiles(const ProfileSet& ps, const std::string& path) {
    write_file(path, profiles_to_csv(ps));
}

ProfileSet load_profiles(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("profiles: empty file: " + path);
    ProfileSet ps;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 10)
            throw ParseError("profiles: line " + std::to_string(lineno) + ": expected 10 fields");
        ProfileEntry e;
        e.phase.kind = fields[0] == "prefill" ? PhaseKind::Prefill : PhaseKind::Decode;
        e.phase.n_p = std::stoi(fields[1]);
        e.phase.n_d = std::stoi(fields[2]);
        e.cfg.f_cpu = std::stod(fields[3]);
        e.cfg.f_gpu = std::stod(fields[4]);
        if (fields[5] != "default") e.cfg.f_mem = std::stod(fields[5]);
        e.latency = std::stod(fields[6]);
        e.energy_per_token = std::stod(fields[7]);
        e.avg_power = std::stod(fields[8]);
        if (ps.calib_hash.empty())
            ps.calib_hash = fields[9];
        else if (ps.calib_hash != fields[9])
            throw ParseError("profiles: line " + std::to_string(lineno) +
                             ": mixed calibration hashes");
        ps.insert(e);
    }
    return ps;
}

}  // namespace fusesim
