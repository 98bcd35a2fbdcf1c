#pragma once

#include <cstdint>
#include <string>

#include "fusesim/governors.hpp"
#include "fusesim/model.hpp"
#include "fusesim/types.hpp"

namespace fusesim {

// Governor tuning knobs carried by a calibration file.
struct GovernorParams {
    double eas_c_max = 1024.0;
    double eas_decay_half_life_ms = 32.0;
    double eas_headroom = 1.25;
    int quickstep_window_ms = 20;
    std::vector<QuickstepBand> quickstep_bands;  // empty -> default bands
    double mem_target_load = 0.7;
    int mem_period_ms = 20;
};

// A complete model instance: frequency domain, per-phase workload parameters,
// power coefficients, governor knobs, and the anchors + fixed parameters that
// produced the workload fit.
struct Calibration {
    std::string model_id = "pixel7-tinyllama-like";
    FrequencyTable table;
    PerfModelParams prefill;
    PerfModelParams decode;
    PowerModelParams power;
    GovernorParams gov;
    std::vector<Anchor> anchors;
    CalibrationFixed fixed_prefill;
    CalibrationFixed fixed_decode;

    const PerfModelParams& perf(PhaseKind k) const {
        return k == PhaseKind::Prefill ? prefill : decode;
    }
    // Workload parameters for a concrete phase (prefill scaled to N_p).
    PerfModelParams perf_for(const PhaseSpec& ph) const {
        return ph.kind == PhaseKind::Prefill ? prefill.scaled_to(ph.n_p) : decode;
    }

    void validate() const;

    // FNV-1a hash of the canonical serialized form; identifies the
    // calibration in profiles, tables, and manifests.
    std::uint64_t hash() const;
    std::string hash_hex() const;

    std::vector<QuickstepBand> quickstep_bands() const {
        return gov.quickstep_bands.empty() ? default_quickstep_bands(table.gpu)
                                           : gov.quickstep_bands;
    }

    // Fully-default governors, all starting at the top frequencies.
    GovernorSet default_governors() const;
    EasState make_eas(double f0) const;
    QuickstepState make_quickstep(double f0) const;
    InteractiveMemState make_mem(double f0) const;
};

// Canonical JSON (de)serialization.
std::string to_json(const Calibration& c);
Calibration calibration_from_json(const std::string& text);
Calibration load_calibration(const std::string& path);
void save_calibration(const Calibration& c, const std::string& path);

// The shipped default calibration (Pixel 7 tables, fitted workload and power
// parameters, tuned quickstep bands).
Calibration default_calibration();

}  // namespace fusesim
