#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "fusesim/calibration.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/types.hpp"

namespace fusesim {

struct ProfileEntry {
    FreqConfig cfg;  // f_mem disengaged = memory under its default governor
    PhaseSpec phase;
    double latency = 0;           // TPOT (decode) or TTFT (prefill), ms
    double energy_per_token = 0;  // mJ
    double avg_power = 0;         // mW (warm-up discarded)
};

// Deterministic ordering key: phase then (f_gpu, f_cpu, f_mem).
struct ProfileKey {
    int phase_kind = 0;
    int n_p = 0, n_d = 0;
    double f_cpu = 0, f_gpu = 0, f_mem = -1;
    auto operator<=>(const ProfileKey&) const = default;
};
ProfileKey key_of(const ProfileEntry& e);

struct ProfileSet {
    std::map<ProfileKey, ProfileEntry> entries;
    std::string calib_hash;

    void insert(const ProfileEntry& e);
    std::size_t size() const { return entries.size(); }
};

// Grid of pinned frequencies to sweep; memory may include the
// governor-default sentinel (disengaged optional).
struct GridSpec {
    std::vector<double> cpu;
    std::vector<double> gpu;
    std::vector<std::optional<double>> mem;

    static GridSpec full(const FrequencyTable& t);
};

// One all-Pin (or memory-default) measurement; shared by sweeps, searches,
// and baselines. Disengaged pin = that component's default governor.
ProfileEntry measure_config(const Calibration& calib, const PhaseSpec& phase,
                            std::optional<double> pin_cpu, std::optional<double> pin_gpu,
                            std::optional<double> pin_mem);

// Brute-force sweep over the grid; one run per combination. Combinations may
// be evaluated on several worker threads; assembly is key-ordered, so the
// result is identical for any worker count.
ProfileSet sweep(const Calibration& calib, const PhaseSpec& phase, const GridSpec& grid,
                 int workers = 1);

// Pin-Opt oracle over a profile set.
struct PinOptConstraint {
    std::optional<double> energy_budget;   // mJ/token: argmin latency, e <= budget
    std::optional<double> latency_target;  // ms: argmin energy, latency <= target
};
ProfileEntry pin_opt(const ProfileSet& ps, const PinOptConstraint& c);

// Entries not dominated in (latency, energy_per_token).
ProfileSet pareto(const ProfileSet& ps);

// CSV persistence. Header:
// phase_kind,n_p,n_d,f_cpu,f_gpu,f_mem_or_default,latency_ms,energy_mj_per_token,avg_power_mw,calib_hash
void save_profiles(const ProfileSet& ps, const std::string& path);
ProfileSet load_profiles(const std::string& path);
std::string profiles_to_csv(const ProfileSet& ps);

}  // namespace fusesim
