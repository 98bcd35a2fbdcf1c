#include "fusesim/governors.hpp"

#include <algorithm>

namespace fusesim {

PinState make_pin(double freq, Component c, const FrequencyTable& table) {
    if (!table.contains(c, freq))
        throw SimError("pin frequency " + std::to_string(freq) + " not in table");
    return PinState{freq};
}

void QuickstepState::validate() const {
    if (dvfs_table.empty()) throw SimError("quickstep: empty dvfs table");
    for (std::size_t i = 0; i < dvfs_table.size(); ++i) {
        const auto& row = dvfs_table[i];
        if (!(0.0 <= row.min_util && row.min_util < row.max_util && row.max_util <= 1.0))
            throw SimError("quickstep: invalid band for row " + std::to_string(row.freq));
        if (i + 1 < dvfs_table.size() && dvfs_table[i + 1].min_util > row.max_util)
            throw SimError("quickstep: dead band between rows");
    }
}

std::vector<QuickstepBand> default_quickstep_bands(const std::vector<double>& gpu_list) {
    std::vector<QuickstepBand> bands;
    for (std::size_t i = 0; i < gpu_list.size(); ++i) {
        QuickstepBand b;
        b.freq = gpu_list[i];
        b.min_util = i == 0 ? 0.0 : 0.60;
        b.max_util = i + 1 == gpu_list.size() ? 1.0 : 0.90;
        bands.push_back(b);
    }
    return bands;
}

double quickstep_step(QuickstepState& st, double window_avg_util) {
    std::size_t i = 0;
    while (i < st.dvfs_table.size() && st.dvfs_table[i].freq != st.current_freq) ++i;
    if (i == st.dvfs_table.size()) throw SimError("quickstep: current frequency not in table");
    if (window_avg_util > st.dvfs_table[i].max_util && i + 1 < st.dvfs_table.size())
        ++i;
    else if (window_avg_util < st.dvfs_table[i].min_util && i > 0)
        --i;
    st.current_freq = st.dvfs_table[i].freq;
    return st.current_freq;
}

double eas_tick(EasState& st, double busy_fraction, double f_cur, double f_max) {
    double y = st.decay;
    st.load = y * st.load + (1.0 - y) * st.c_max * busy_fraction * (f_cur / f_max);
    st.load = std::clamp(st.load, 0.0, st.c_max);
    return st.load;
}

double eas_select(EasState& st, const FrequencyTable& table) {
    double f_max = table.max(Component::Cpu);
    double need = st.headroom * st.load / st.c_max * f_max;
    st.current_freq = table.ceil(Component::Cpu, need);
    return st.current_freq;
}

double interactive_mem_step(InteractiveMemState& st, double u_mem, const FrequencyTable& table) {
    double target = st.current_freq * u_mem / st.target_load;
    st.current_freq = table.ceil(Component::Mem, target);
    return st.current_freq;
}

}  // namespace fusesim
