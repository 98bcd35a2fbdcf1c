#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusesim/search.hpp"

namespace fusesim {

struct Request {
    int id = 0;
    int prefill_tokens = 0;  // N_p, <= 512
    int decode_tokens = 0;   // N_d, <= 256
};

inline constexpr int kMaxPrefillTokens = 512;
inline constexpr int kMaxDecodeTokens = 256;

// Line-delimited "id prefill_tokens decode_tokens" records ('#' comments
// allowed); out-of-bound records are rejected with their line number.
std::vector<Request> load_requests(const std::string& path);

// Deterministic log-normal lengths clipped to (0,512] x (0,256], tuned so
// n=200, seed=0 sample means land near the reference trace means
// (232.4, 70.0).
std::vector<Request> synthesize_requests(int n, std::uint64_t seed);

struct RequestResult {
    int id = 0;
    double ttft = 0;    // ms
    double tpot = 0;    // ms
    double e2e = 0;     // ms
    double energy = 0;  // mJ (full integral over both phases)
};

struct ReplayReport {
    std::string policy;  // "gov", "fuse-g1", ...
    std::vector<RequestResult> per_request;
    double mean_ttft = 0;
    double mean_tpot = 0;
    double mean_e2e = 0;
    double total_energy_mj = 0;
    double total_mah = 0;  // at the nominal voltage below
};

inline constexpr double kNominalVoltage = 3.85;  // V, for mAh reporting

struct ReplayPolicy {
    enum class Kind { Gov, Fuse } kind = Kind::Gov;
    FuseTable table;  // used when kind == Fuse
    std::string label = "gov";

    static ReplayPolicy gov() { return {Kind::Gov, {}, "gov"}; }
    static ReplayPolicy fuse(FuseTable t, std::string label = "fuse") {
        return {Kind::Fuse, std::move(t), std::move(label)};
    }
};

// Sequential replay: per request, prefill then decode. Gov runs all default
// governors continuously across requests; Fuse pins (cpu,gpu) per phase via
// table lookup and releases them at phase end, while the memory governor
// stays default and continuous throughout.
ReplayReport replay(const Calibration& calib, const ReplayPolicy& policy,
                    const std::vector<Request>& requests);

struct CompareRow {
    std::string metric;
    double base = 0;
    double other = 0;
    double ratio = 0;  // other / base
};

// Ratios other/base for mean TTFT, mean TPOT, mean E2E, and total energy.
// Throws on request-set mismatch.
std::vector<CompareRow> compare_reports(const ReplayReport& base, const ReplayReport& other);

std::string replay_report_to_csv(const ReplayReport& r);
std::string compare_to_csv(const std::vector<CompareRow>& rows);

}  // namespace fusesim
