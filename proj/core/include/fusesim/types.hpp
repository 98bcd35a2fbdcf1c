#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fusesim {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CalibrationInfeasible : SimError {
    using SimError::SimError;
};

struct BudgetInfeasible : SimError {
    using SimError::SimError;
};

struct TargetInfeasible : SimError {
    using SimError::SimError;
};

struct InfeasibleConstraint : SimError {
    using SimError::SimError;
};

struct NonTermination : SimError {
    using SimError::SimError;
};

struct ParseError : SimError {
    using SimError::SimError;
};

// ---------------------------------------------------------------------------
// Frequency domain
// ---------------------------------------------------------------------------

enum class Component { Cpu, Gpu, Mem };

// Discrete available frequencies per component, strictly increasing, in MHz.
struct FrequencyTable {
    std::vector<double> cpu;
    std::vector<double> gpu;
    std::vector<double> mem;

    const std::vector<double>& list(Component c) const {
        switch (c) {
            case Component::Cpu: return cpu;
            case Component::Gpu: return gpu;
            default: return mem;
        }
    }

    void validate() const;

    bool contains(Component c, double f) const {
        const auto& l = list(c);
        return std::find(l.begin(), l.end(), f) != l.end();
    }

    double max(Component c) const { return list(c).back(); }
    double min(Component c) const { return list(c).front(); }

    // Lowest table frequency >= need; clamps to the maximum if none qualifies.
    double ceil(Component c, double need) const {
        for (double f : list(c))
            if (f >= need) return f;
        return max(c);
    }
};

// Pixel 7 / Pixel 7 Pro frequency lists (big-core CPU cluster, GPU, memory
// interface), MHz.
FrequencyTable pixel7_table();

// One (CPU, GPU, memory) combination. A disengaged f_mem means "memory left
// to its default governor" (used by the FUSE search space).
struct FreqConfig {
    double f_cpu = 0;
    double f_gpu = 0;
    std::optional<double> f_mem;

    bool operator==(const FreqConfig& o) const = default;
};

// Sort key used for deterministic ordering and tie-breaking; a
// governor-default memory field sorts before any pinned value.
inline double mem_key(const FreqConfig& c) { return c.f_mem.value_or(-1.0); }

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

enum class PhaseKind { Prefill, Decode };

inline const char* to_string(PhaseKind k) {
    return k == PhaseKind::Prefill ? "prefill" : "decode";
}

// A unit of inference work: one prefill batch (N_p prompt tokens) or a run of
// N_d decode tokens, each token made of K serialized kernels.
struct PhaseSpec {
    PhaseKind kind = PhaseKind::Decode;
    int n_p = 0;  // prompt tokens (prefill)
    int n_d = 0;  // output tokens (decode)
    int k = 22;   // kernels per token

    static PhaseSpec prefill(int n_p, int k = 22) { return {PhaseKind::Prefill, n_p, 0, k}; }
    static PhaseSpec decode(int n_d, int k = 22) { return {PhaseKind::Decode, 0, n_d, k}; }

    int tokens() const { return kind == PhaseKind::Prefill ? n_p : n_d; }

    void validate() const {
        if (k < 1) throw SimError("kernels_per_token must be >= 1");
        if (kind == PhaseKind::Prefill && n_p < 1) throw SimError("prefill needs N_p >= 1");
        if (kind == PhaseKind::Decode && n_d < 1) throw SimError("decode needs N_d >= 1");
    }
};

}  // namespace fusesim
