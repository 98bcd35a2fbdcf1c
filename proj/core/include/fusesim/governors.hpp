#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "fusesim/types.hpp"

namespace fusesim {

// ---------------------------------------------------------------------------
// Pin: fixed frequency (min = max clamp)
// ---------------------------------------------------------------------------

struct PinState {
    double freq = 0;
};

PinState make_pin(double freq, Component c, const FrequencyTable& table);

// ---------------------------------------------------------------------------
// Quickstep (GPU): per-frequency min/max utilization bands, one step per
// evaluation window
// ---------------------------------------------------------------------------

struct QuickstepBand {
    double freq = 0;
    double min_util = 0;
    double max_util = 1;
};

struct QuickstepState {
    std::vector<QuickstepBand> dvfs_table;  // ascending by frequency
    double current_freq = 0;
    int window_ms = 20;

    void validate() const;
};

// Default bands when a calibration does not override them: min 0.60 /
// max 0.90 for every row, except min 0 at the lowest and max 1 at the
// highest frequency.
std::vector<QuickstepBand> default_quickstep_bands(const std::vector<double>& gpu_list);

// Step up/down/hold by the window-average utilization; returns (and stores)
// the new frequency. Moves at most one table step.
double quickstep_step(QuickstepState& st, double window_avg_util);

// ---------------------------------------------------------------------------
// EAS (CPU): decayed frequency-invariant load tracking, lowest satisfying
// frequency with headroom
// ---------------------------------------------------------------------------

struct EasState {
    double load = 0;          // in [0, c_max]
    double c_max = 1024.0;
    double decay = 0;         // per-ms factor y, default 0.5^(1/32)
    double headroom = 1.25;   // h
    double current_freq = 0;

    static double default_decay() { return std::pow(0.5, 1.0 / 32.0); }
};

// load <- y*load + (1-y)*C_max*busy*(f_cur/f_max), clamped to [0, C_max].
double eas_tick(EasState& st, double busy_fraction, double f_cur, double f_max);

// min{f in cpu list : C_max*(f/f_max) >= h*load}, clamped to f_max; stores
// and returns the selection.
double eas_select(EasState& st, const FrequencyTable& table);

// ---------------------------------------------------------------------------
// Interactive memory governor: target frequency from bus utilization every
// period
// ---------------------------------------------------------------------------

struct InteractiveMemState {
    double current_freq = 0;
    double target_load = 0.7;
    int period_ms = 20;
};

// target = current * u_mem / target_load; jumps to the lowest table
// frequency >= target (clamped to max); stores and returns it.
double interactive_mem_step(InteractiveMemState& st, double u_mem, const FrequencyTable& table);

// ---------------------------------------------------------------------------
// GovernorSet
// ---------------------------------------------------------------------------

using CpuGovernor = std::variant<EasState, PinState>;
using GpuGovernor = std::variant<QuickstepState, PinState>;
using MemGovernor = std::variant<InteractiveMemState, PinState>;

struct GovernorSet {
    CpuGovernor cpu;
    GpuGovernor gpu;
    MemGovernor mem;
};

inline double current_freq(const CpuGovernor& g) {
    return std::holds_alternative<PinState>(g) ? std::get<PinState>(g).freq
                                               : std::get<EasState>(g).current_freq;
}
inline double current_freq(const GpuGovernor& g) {
    return std::holds_alternative<PinState>(g) ? std::get<PinState>(g).freq
                                               : std::get<QuickstepState>(g).current_freq;
}
inline double current_freq(const MemGovernor& g) {
    return std::holds_alternative<PinState>(g) ? std::get<PinState>(g).freq
                                               : std::get<InteractiveMemState>(g).current_freq;
}

}  // namespace fusesim
