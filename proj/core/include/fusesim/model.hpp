#pragma once

#include <cmath>
#include <vector>

#include "fusesim/types.hpp"

namespace fusesim {

// ---------------------------------------------------------------------------
// Performance model
// ---------------------------------------------------------------------------
//
// Each kernel's period at a frequency combination is
//     T = t_issue + t_exec + t_gap
//     t_issue = W_c / f_cpu
//     t_exec  = W_g / f_gpu + B_m / f_mem
//     t_gap   = G_c / f_cpu + g0
// Work terms are in MHz*ms, frequencies in MHz, times in ms.
//
// W_o is CPU work overlapped with kernel execution (driver polling, data
// staging): it contributes to CPU busy time, u_cpu = (W_c + W_o)/(f_cpu*T),
// but not to the period. With W_o = 0 this reduces to u_cpu = t_issue/T.

struct PerfModelParams {
    double w_c = 0;   // CPU issue work
    double w_g = 0;   // GPU compute work
    double b_m = 0;   // memory traffic work
    double g_c = 0;   // CPU-speed-dependent pipeline-gap work
    double g0 = 0;    // fixed gap, ms
    double w_o = 0;   // overlapped CPU work (busy time only)

    // Prefill scaling: relative to a reference prompt length, W_g and B_m
    // scale linearly, W_c and W_o sublinearly (batching amortizes issue cost).
    int n_ref = 32;
    double wc_exp = 0.5;

    PerfModelParams scaled_to(int n_p) const {
        double s = static_cast<double>(n_p) / n_ref;
        PerfModelParams p = *this;
        p.w_c = w_c * std::pow(s, wc_exp);
        p.w_o = w_o * std::pow(s, wc_exp);
        p.w_g = w_g * s;
        p.b_m = b_m * s;
        return p;
    }

    void validate() const {
        if (w_g <= 0) throw SimError("perf params: W_g must be > 0");
        if (w_c < 0 || b_m < 0 || g_c < 0 || g0 < 0 || w_o < 0)
            throw SimError("perf params: negative work term");
    }
};

struct KernelTimes {
    double t_issue = 0;
    double t_exec = 0;
    double t_gap = 0;
};

struct UtilPoint {
    double period = 0;  // T, ms per kernel
    double u_cpu = 0;
    double u_gpu = 0;
    double u_mem = 0;
};

KernelTimes kernel_times(const FreqConfig& cfg, const PerfModelParams& p);
UtilPoint steady_state(const FreqConfig& cfg, const PerfModelParams& p);

// ---------------------------------------------------------------------------
// Power model
// ---------------------------------------------------------------------------
//
// P = P_idle + sum_c u_c * (a_c * fhat^e_c + b_c * fhat),  fhat = f / max(table)

struct ComponentPower {
    double a = 0;       // dynamic coefficient, mW
    double b = 0;       // linear coefficient, mW
    double exp = 3.0;
};

struct PowerModelParams {
    double p_idle = 600.0;  // mW
    ComponentPower cpu{0, 0, 3.0};
    ComponentPower gpu{0, 0, 3.0};
    ComponentPower mem{0, 0, 2.0};

    void validate() const {
        if (p_idle <= 0) throw SimError("power params: P_idle must be > 0");
        for (const auto* c : {&cpu, &gpu, &mem})
            if (c->a < 0 || c->b < 0) throw SimError("power params: negative coefficient");
    }
};

double power_draw(const FreqConfig& cfg, const UtilPoint& up, const PowerModelParams& pp,
                  const FrequencyTable& table);

// ---------------------------------------------------------------------------
// Calibration from utilization anchors
// ---------------------------------------------------------------------------

enum class AnchorMetric { UCpu, UGpu };

struct Anchor {
    PhaseKind phase = PhaseKind::Decode;
    FreqConfig cfg;        // f_mem must be pinned for anchors
    AnchorMetric metric = AnchorMetric::UGpu;
    double value = 0;      // observed utilization fraction
};

// Parameters held fixed during calibration; the remaining ones are solved.
struct CalibrationFixed {
    std::optional<double> w_c, w_g, b_m, g_c, g0, w_o;
};

struct CalibrationResult {
    PerfModelParams params;
    double max_residual = 0;   // max |predicted - observed| utilization
    int iterations = 0;        // refinement iterations used
};

// Least-squares fit of the free parameters to the anchors of one phase.
// The period-weighted residuals are linear in all work terms, so the fit is a
// direct linear solve; a coordinate-descent polish (iteration cap 1e4,
// tolerance 1e-9) then minimizes the true squared utilization residuals.
// Throws CalibrationInfeasible if the best max residual exceeds 0.05.
CalibrationResult calibrate_from_targets(const std::vector<Anchor>& anchors,
                                         const CalibrationFixed& fixed,
                                         const PerfModelParams& defaults = {});

}  // namespace fusesim
