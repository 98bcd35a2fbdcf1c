#pragma once

#include <map>
#include <string>
#include <vector>

#include "fusesim/profiler.hpp"

namespace fusesim {

// ---------------------------------------------------------------------------
// Goals
// ---------------------------------------------------------------------------

struct SearchGoal {
    enum class Kind { G1, G2 } kind = Kind::G1;
    double value = 0;  // G1: energy budget mJ/token; G2: latency target ms

    static SearchGoal g1(double budget_mj) { return {Kind::G1, budget_mj}; }
    static SearchGoal g2(double target_ms) { return {Kind::G2, target_ms}; }
};

// GPU candidates produced by Step 1 (F and F' for G1; the minimum-energy
// frequency or the straddling pair for G2). At most two, adjacent if two.
struct CandidateSet {
    std::vector<double> gpu;
};

struct SearchReport {
    int inferences_step1 = 0;
    int inferences_step2 = 0;
    std::vector<ProfileEntry> evaluated_step1;
    std::vector<ProfileEntry> evaluated_step2;
    CandidateSet candidates;

    int total() const { return inferences_step1 + inferences_step2; }
};

struct SearchResult {
    FreqConfig cfg;  // f_mem disengaged (memory stays on its default governor)
    double latency = 0;
    double energy_per_token = 0;
    SearchReport report;
};

// G1 (minimize latency under an energy budget):
//   Step 1 descends GPU frequencies with the CPU under default EAS and memory
//   under its default governor, stopping at the first frequency F whose
//   energy-per-token fits the budget; candidates are {F, F'} with F' one step
//   above (omitted when F is the maximum).
//   Step 2 descends pinned CPU frequencies per candidate, stopping at the
//   first fit; a candidate is abandoned early once its energy both exceeds
//   the budget and stops decreasing. Returns the feasible combination with
//   the lowest latency.
// Throws BudgetInfeasible when nothing fits.
SearchResult search_g1(const Calibration& calib, const PhaseSpec& phase, double budget_mj);

// G2 (minimize energy under a latency target):
//   Step 1 descends GPU frequencies until energy-per-token increases; the
//   previous frequency is the minimum-energy one. If the target is at or
//   above its latency the candidate set is just that frequency; otherwise it
//   is the two consecutive frequencies straddling the target (falling back to
//   the maximum GPU frequency when even it is slower than the target).
//   Step 2 descends pinned CPU frequencies per candidate until latency
//   exceeds the target; returns the lowest-energy combination that meets it.
// Throws TargetInfeasible when nothing meets the target.
SearchResult search_g2(const Calibration& calib, const PhaseSpec& phase, double target_ms);

// ---------------------------------------------------------------------------
// Prefill buckets and the runtime table
// ---------------------------------------------------------------------------

struct Bucket {
    int index = 0;
    int representative = 0;  // tokens
};

// (0,48]->32, (48,96]->64, (96,192]->128, (192,384]->256, (384,inf)->512.
Bucket bucket_prefill_length(int n_p);

inline const int kPrefillRepresentatives[5] = {32, 64, 128, 256, 512};
inline const int kDecodeRepresentative = 32;

struct FuseEntry {
    double f_cpu = 0;
    double f_gpu = 0;
    SearchGoal goal;
    double latency = 0;
    double energy_per_token = 0;
};

struct FuseTable {
    std::string model_id;
    std::string calib_hash;
    FuseEntry decode;
    FuseEntry prefill[5];  // by bucket index
    SearchReport aggregate;

    const FuseEntry& prefill_entry(int n_p) const {
        return prefill[bucket_prefill_length(n_p).index];
    }
};

// Goals for the six settings (decode at the 32-token representative plus the
// five prefill representatives).
struct TableGoals {
    SearchGoal decode;
    SearchGoal prefill[5];
};

FuseTable build_config_table(const Calibration& calib, const TableGoals& goals);

struct PinnedPair {
    double f_cpu = 0;
    double f_gpu = 0;
};
PinnedPair lookup_config(const FuseTable& table, PhaseKind kind, int n_p);

std::string fuse_table_to_json(const FuseTable& t);
FuseTable fuse_table_from_json(const std::string& text);
void save_fuse_table(const FuseTable& t, const std::string& path);
FuseTable load_fuse_table(const std::string& path);

}  // namespace fusesim
