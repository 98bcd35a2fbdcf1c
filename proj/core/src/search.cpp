#include "fusesim/search.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

#include "fusesim/util.hpp"

namespace fusesim {

using json = nlohmann::ordered_json;

namespace {

// One search evaluation: GPU pinned, CPU pinned or left to EAS, memory always
// on its default governor (the search space is (f_cpu, f_gpu) only).
ProfileEntry eval(const Calibration& calib, const PhaseSpec& phase, std::optional<double> fc,
                  double fg) {
    return measure_config(calib, phase, fc, fg, std::nullopt);
}

}  // namespace

SearchResult search_g1(const Calibration& calib, const PhaseSpec& phase, double budget_mj) {
    const auto& gpu = calib.table.gpu;
    const auto& cpu = calib.table.cpu;
    SearchReport rep;

    // Step 1: descend GPU frequencies under default EAS until the first fit.
    std::optional<double> f, f_prime;
    std::optional<double> prev;
    for (auto it = gpu.rbegin(); it != gpu.rend(); ++it) {
        ProfileEntry e = eval(calib, phase, std::nullopt, *it);
        ++rep.inferences_step1;
        rep.evaluated_step1.push_back(e);
        if (e.energy_per_token <= budget_mj) {
            f = *it;
            f_prime = prev;
            break;
        }
        prev = *it;
    }
    if (!f) throw BudgetInfeasible("no GPU frequency fits the energy budget under default EAS");
    rep.candidates.gpu.push_back(*f);
    if (f_prime) rep.candidates.gpu.push_back(*f_prime);

    // Step 2: per candidate, descend pinned CPU frequencies to the first fit;
    // abandon a candidate once energy both exceeds the budget and stops
    // decreasing (the per-row energy curve is unimodal in f_cpu).
    struct Feasible {
        double lat, e, fg, fc;
    };
    std::vector<Feasible> feasible;
    for (double cand : rep.candidates.gpu) {
        std::optional<double> prev_e;
        for (auto it = cpu.rbegin(); it != cpu.rend(); ++it) {
            ProfileEntry e = eval(calib, phase, *it, cand);
            ++rep.inferences_step2;
            rep.evaluated_step2.push_back(e);
            if (e.energy_per_token <= budget_mj) {
                feasible.push_back({e.latency, e.energy_per_token, cand, *it});
                break;
            }
            if (prev_e && e.energy_per_token >= *prev_e) break;
            prev_e = e.energy_per_token;
        }
    }
    if (feasible.empty())
        throw BudgetInfeasible("no pinned (cpu, gpu) combination fits the energy budget");
    auto key = [](const Feasible& x) { return std::make_tuple(x.lat, x.e, x.fg, x.fc); };
    const Feasible& best =
        *std::min_element(feasible.begin(), feasible.end(),
                          [&](const Feasible& a, const Feasible& b) { return key(a) < key(b); });

    SearchResult res;
    res.cfg = {best.fc, best.fg, std::nullopt};
    res.latency = best.lat;
    res.energy_per_token = best.e;
    res.report = std::move(rep);
    return res;
}

SearchResult search_g2(const Calibration& calib, const PhaseSpec& phase, double target_ms) {
    const auto& gpu = calib.table.gpu;
    const auto& cpu = calib.table.cpu;
    SearchReport rep;

    // Step 1: descend GPU frequencies until energy-per-token turns upward.
    struct Eval {
        double fg, e, lat;
    };
    std::vector<Eval> evals;
    for (auto it = gpu.rbegin(); it != gpu.rend(); ++it) {
        ProfileEntry e = eval(calib, phase, std::nullopt, *it);
        ++rep.inferences_step1;
        rep.evaluated_step1.push_back(e);
        evals.push_back({*it, e.energy_per_token, e.latency});
        if (evals.size() >= 2 && evals.back().e > evals[evals.size() - 2].e) break;
    }
    const Eval& min_e = (evals.size() >= 2 && evals.back().e > evals[evals.size() - 2].e)
                            ? evals[evals.size() - 2]
                            : evals.back();

    std::vector<double>& cands = rep.candidates.gpu;
    if (target_ms >= min_e.lat) {
        cands.push_back(min_e.fg);
    } else {
        for (std::size_t i = 0; i + 1 < evals.size(); ++i) {
            if (evals[i].lat <= target_ms && target_ms < evals[i + 1].lat) {
                cands.push_back(evals[i].fg);
                cands.push_back(evals[i + 1].fg);
                break;
            }
        }
        // Even the fastest governed-CPU point misses the target: only the top
        // GPU frequency (with a faster pinned CPU) can still reach it.
        if (cands.empty()) cands.push_back(gpu.back());
    }

    // Step 2: per candidate, descend pinned CPU frequencies while the target
    // is met; keep the lowest-energy feasible combination.
    struct Feasible {
        double e, lat, fg, fc;
    };
    std::vector<Feasible> feasible;
    for (double cand : cands) {
        for (auto it = cpu.rbegin(); it != cpu.rend(); ++it) {
            ProfileEntry e = eval(calib, phase, *it, cand);
            ++rep.inferences_step2;
            rep.evaluated_step2.push_back(e);
            if (e.latency > target_ms) break;
            feasible.push_back({e.energy_per_token, e.latency, cand, *it});
        }
    }
    if (feasible.empty())
        throw TargetInfeasible("no pinned (cpu, gpu) combination meets the latency target");
    auto key = [](const Feasible& x) { return std::make_tuple(x.e, x.lat, x.fg, x.fc); };
    const Feasible& best =
        *std::min_element(feasible.begin(), feasible.end(),
                          [&](const Feasible& a, const Feasible& b) { return key(a) < key(b); });

    SearchResult res;
    res.cfg = {best.fc, best.fg, std::nullopt};
    res.latency = best.lat;
    res.energy_per_token = best.e;
    res.report = std::move(rep);
    return res;
}

Bucket bucket_prefill_length(int n_p) {
    if (n_p < 1) throw SimError("bucket_prefill_length: N_p must be >= 1");
    if (n_p <= 48) return {0, 32};
    if (n_p <= 96) return {1, 64};
    if (n_p <= 192) return {2, 128};
    if (n_p <= 384) return {3, 256};
    return {4, 512};
}

namespace {

FuseEntry run_goal(const Calibration& calib, const PhaseSpec& phase, const SearchGoal& goal,
                   SearchReport& aggregate) {
    SearchResult r = goal.kind == SearchGoal::Kind::G1 ? search_g1(calib, phase, goal.value)
                                                       : search_g2(calib, phase, goal.value);
    aggregate.inferences_step1 += r.report.inferences_step1;
    aggregate.inferences_step2 += r.report.inferences_step2;
    FuseEntry e;
    e.f_cpu = r.cfg.f_cpu;
    e.f_gpu = r.cfg.f_gpu;
    e.goal = goal;
    e.latency = r.latency;
    e.energy_per_token = r.energy_per_token;
    return e;
}

}  // namespace

FuseTable build_config_table(const Calibration& calib, const TableGoals& goals) {
    FuseTable t;
    t.model_id = calib.model_id;
    t.calib_hash = calib.hash_hex();
    t.decode = run_goal(calib, PhaseSpec::decode(kDecodeRepresentative), goals.decode, t.aggregate);
    for (int i = 0; i < 5; ++i)
        t.prefill[i] = run_goal(calib, PhaseSpec::prefill(kPrefillRepresentatives[i]),
                                goals.prefill[i], t.aggregate);
    return t;
}

PinnedPair lookup_config(const FuseTable& table, PhaseKind kind, int n_p) {
    const FuseEntry& e = kind == PhaseKind::Decode ? table.decode : table.prefill_entry(n_p);
    return {e.f_cpu, e.f_gpu};
}

namespace {

json entry_to_json(const FuseEntry& e) {
    return json{{"f_cpu", e.f_cpu},
                {"f_gpu", e.f_gpu},
                {"goal", e.goal.kind == SearchGoal::Kind::G1 ? "g1" : "g2"},
                {"goal_value", e.goal.value},
                {"latency_ms", e.latency},
                {"energy_mj_per_token", e.energy_per_token}};
}

FuseEntry entry_from_json(const json& j) {
    FuseEntry e;
    e.f_cpu = j.at("f_cpu");
    e.f_gpu = j.at("f_gpu");
    e.goal.kind = j.at("goal") == "g1" ? SearchGoal::Kind::G1 : SearchGoal::Kind::G2;
    e.goal.value = j.at("goal_value");
    e.latency = j.value("latency_ms", 0.0);
    e.energy_per_token = j.value("energy_mj_per_token", 0.0);
    return e;
}

}  // namespace

std::string fuse_table_to_json(const FuseTable& t) {
    json j;
    j["model_id"] = t.model_id;
    j["calib_hash"] = t.calib_hash;
    j["decode"] = entry_to_json(t.decode);
    json pf = json::array();
    for (int i = 0; i < 5; ++i) {
        json e = entry_to_json(t.prefill[i]);
        e["bucket_tokens"] = kPrefillRepresentatives[i];
        pf.push_back(e);
    }
    j["prefill"] = pf;
    j["search_inferences"] = {{"step1", t.aggregate.inferences_step1},
                              {"step2", t.aggregate.inferences_step2}};
    return j.dump(2) + "\n";
}

FuseTable fuse_table_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("config table: ") + e.what());
    }
    FuseTable t;
    t.model_id = j.value("model_id", "");
    t.calib_hash = j.value("calib_hash", "");
    t.decode = entry_from_json(j.at("decode"));
    const json& pf = j.at("prefill");
    if (pf.size() != 5) throw ParseError("config table: expected 5 prefill entries");
    for (int i = 0; i < 5; ++i) t.prefill[i] = entry_from_json(pf[i]);
    if (j.contains("search_inferences")) {
        t.aggregate.inferences_step1 = j["search_inferences"].value("step1", 0);
        t.aggregate.inferences_step2 = j["search_inferences"].value("step2", 0);
    }
    return t;
}

void save_fuse_table(const FuseTable& t, const std::string& path) {
    write_file(path, fuse_table_to_json(t));
}

FuseTable load_fuse_table(const std::string& path) {
    return fuse_table_from_json(read_file(path));
}

}  // namespace fusesim
