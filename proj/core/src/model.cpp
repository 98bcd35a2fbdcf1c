#include "fusesim/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fusesim {

KernelTimes kernel_times(const FreqConfig& cfg, const PerfModelParams& p) {
    KernelTimes kt;
    kt.t_issue = p.w_c / cfg.f_cpu;
    kt.t_exec = p.w_g / cfg.f_gpu + p.b_m / cfg.f_mem.value();
    kt.t_gap = p.g_c / cfg.f_cpu + p.g0;
    return kt;
}

UtilPoint steady_state(const FreqConfig& cfg, const PerfModelParams& p) {
    KernelTimes kt = kernel_times(cfg, p);
    UtilPoint up;
    up.period = kt.t_issue + kt.t_exec + kt.t_gap;
    up.u_cpu = std::min(1.0, (p.w_c + p.w_o) / cfg.f_cpu / up.period);
    up.u_gpu = kt.t_exec / up.period;
    up.u_mem = (p.b_m / cfg.f_mem.value()) / up.period;
    return up;
}

double power_draw(const FreqConfig& cfg, const UtilPoint& up, const PowerModelParams& pp,
                  const FrequencyTable& table) {
    auto comp = [](double u, double fhat, const ComponentPower& c) {
        return u * (c.a * std::pow(fhat, c.exp) + c.b * fhat);
    };
    return pp.p_idle + comp(up.u_cpu, cfg.f_cpu / table.max(Component::Cpu), pp.cpu) +
           comp(up.u_gpu, cfg.f_gpu / table.max(Component::Gpu), pp.gpu) +
           comp(up.u_mem, cfg.f_mem.value() / table.max(Component::Mem), pp.mem);
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

namespace {

constexpr int kNumParams = 6;  // w_c, w_g, b_m, g_c, g0, w_o

std::array<double, kNumParams> as_array(const PerfModelParams& p) {
    return {p.w_c, p.w_g, p.b_m, p.g_c, p.g0, p.w_o};
}

PerfModelParams from_array(const std::array<double, kNumParams>& a, const PerfModelParams& base) {
    PerfModelParams p = base;
    p.w_c = a[0];
    p.w_g = a[1];
    p.b_m = a[2];
    p.g_c = a[3];
    p.g0 = a[4];
    p.w_o = a[5];
    return p;
}

std::array<std::optional<double>, kNumParams> fixed_array(const CalibrationFixed& f) {
    return {f.w_c, f.w_g, f.b_m, f.g_c, f.g0, f.w_o};
}

double residual(const Anchor& a, const PerfModelParams& p) {
    UtilPoint up = steady_state(a.cfg, p);
    double predicted = a.metric == AnchorMetric::UCpu ? up.u_cpu : up.u_gpu;
    return predicted - a.value;
}

double max_abs_residual(const std::vector<Anchor>& anchors, const PerfModelParams& p) {
    double m = 0;
    for (const auto& a : anchors) m = std::max(m, std::abs(residual(a, p)));
    return m;
}

double sq_objective(const std::vector<Anchor>& anchors, const PerfModelParams& p) {
    double s = 0;
    for (const auto& a : anchors) {
        double r = residual(a, p);
        s += r * r;
    }
    return s;
}

// Coefficients of each parameter in the period-weighted anchor equation
//   predicted_numerator - u * T = 0,
// which is linear in all six work terms. For u_gpu the numerator is t_exec;
// for u_cpu it is (W_c + W_o)/f_cpu (valid while the min(1, .) clamp is
// inactive, which holds for utilization anchors < 1).
struct LinearRow {
    std::array<double, kNumParams> coeff{};
    double rhs = 0;
};

LinearRow linear_row(const Anchor& a) {
    double fc = a.cfg.f_cpu, fg = a.cfg.f_gpu, fm = a.cfg.f_mem.value();
    double u = a.value;
    LinearRow row;
    // T coefficients: w_c/fc + w_g/fg + b_m/fm + g_c/fc + g0
    std::array<double, kNumParams> t_coeff = {1.0 / fc, 1.0 / fg, 1.0 / fm, 1.0 / fc, 1.0, 0.0};
    std::array<double, kNumParams> num{};
    if (a.metric == AnchorMetric::UGpu) {
        num[1] = 1.0 / fg;
        num[2] = 1.0 / fm;
    } else {
        num[0] = 1.0 / fc;
        num[5] = 1.0 / fc;
    }
    for (int j = 0; j < kNumParams; ++j) row.coeff[j] = num[j] - u * t_coeff[j];
    row.rhs = 0;
    return row;
}

// Least-squares solve of A x = b via normal equations with partial pivoting.
// Returns false when the system is singular.
bool solve_least_squares(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                         std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m[i][j] += a[r][i] * a[r][j];
            m[i][n] += a[r][i] * b[r];
        }
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-12) return false;
        std::swap(m[piv], m[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            for (int j = col; j <= n; ++j) m[r][j] -= f * m[col][j];
        }
    }
    for (int i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    return true;
}

}  // namespace

CalibrationResult calibrate_from_targets(const std::vector<Anchor>& anchors,
                                         const CalibrationFixed& fixed,
                                         const PerfModelParams& defaults) {
    if (anchors.empty()) throw CalibrationInfeasible("no anchors given");
    for (const auto& a : anchors)
        if (!a.cfg.f_mem) throw CalibrationInfeasible("anchor without pinned memory frequency");

    auto fixed_vals = fixed_array(fixed);
    std::vector<int> free_idx;
    for (int j = 0; j < kNumParams; ++j)
        if (!fixed_vals[j]) free_idx.push_back(j);
    if (free_idx.empty()) {
        PerfModelParams p = from_array({*fixed_vals[0], *fixed_vals[1], *fixed_vals[2],
                                        *fixed_vals[3], *fixed_vals[4], *fixed_vals[5]},
                                       defaults);
        double r = max_abs_residual(anchors, p);
        if (r > 0.05) throw CalibrationInfeasible("fully fixed parameters miss the anchors");
        return {p, r, 0};
    }
    if (anchors.size() < free_idx.size())
        throw CalibrationInfeasible("fewer anchors than free parameters");

    // Direct linear solve on the period-weighted residuals.
    std::vector<std::vector<double>> a_rows;
    std::vector<double> b_rows;
    for (const auto& an : anchors) {
        LinearRow row = linear_row(an);
        std::vector<double> coeffs(free_idx.size());
        double rhs = row.rhs;
        for (int j = 0; j < kNumParams; ++j) {
            if (fixed_vals[j]) {
                rhs -= row.coeff[j] * *fixed_vals[j];
            }
        }
        for (std::size_t i = 0; i < free_idx.size(); ++i) coeffs[i] = row.coeff[free_idx[i]];
        a_rows.push_back(std::move(coeffs));
        b_rows.push_back(rhs);
    }
    std::array<double, kNumParams> sol{};
    for (int j = 0; j < kNumParams; ++j) sol[j] = fixed_vals[j].value_or(0.0);
    std::vector<double> x(free_idx.size(), 0.0);
    bool solved = solve_least_squares(a_rows, b_rows, x);
    if (solved)
        for (std::size_t i = 0; i < free_idx.size(); ++i) sol[free_idx[i]] = std::max(0.0, x[i]);

    PerfModelParams params = from_array(sol, defaults);

    // Coordinate-descent polish on the true squared utilization residuals.
    constexpr int kMaxIter = 10000;
    constexpr double kTol = 1e-9;
    double obj = sq_objective(anchors, params);
    int iter = 0;
    auto arr = as_array(params);
    for (; iter < kMaxIter && obj > kTol; ++iter) {
        double before = obj;
        for (int j : free_idx) {
            double step = std::max(1e-4, std::abs(arr[j]) * 1e-3);
            for (int tries = 0; tries < 60 && step > 1e-12; ++tries) {
                bool moved = false;
                for (double dir : {+1.0, -1.0}) {
                    double cand = std::max(0.0, arr[j] + dir * step);
                    double old = arr[j];
                    arr[j] = cand;
                    double o = sq_objective(anchors, from_array(arr, defaults));
                    if (o < obj) {
                        obj = o;
                        moved = true;
                        break;
                    }
                    arr[j] = old;
                }
                if (!moved) step *= 0.5;
            }
        }
        params = from_array(arr, defaults);
        if (before - obj < kTol) break;
    }

    CalibrationResult result;
    result.params = params;
    result.max_residual = max_abs_residual(anchors, params);
    result.iterations = iter;
    if (result.max_residual > 0.05)
        throw CalibrationInfeasible("calibration residual " + std::to_string(result.max_residual) +
                                    " exceeds 0.05");
    return result;
}

}  // namespace fusesim
