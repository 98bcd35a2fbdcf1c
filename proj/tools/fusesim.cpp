// fusesim: command-line front end for the DVFS/LLM-inference simulator.
//
// Subcommands: simulate, sweep, search, table, replay, rerun. Every command
// that writes artifacts also writes a <out>.manifest.json next to them;
// `rerun --manifest <file>` re-executes the recorded invocation and
// reproduces the artifacts byte-for-byte.
//
// Exit codes: 0 success, 2 invalid arguments, 3 simulation/search error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fusesim/calibration.hpp"
#include "fusesim/manifest.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/profiler.hpp"
#include "fusesim/replay.hpp"
#include "fusesim/search.hpp"
#include "fusesim/sim.hpp"
#include "fusesim/util.hpp"

namespace fs = fusesim;
using json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string calib_path;
    std::string phase = "decode";
    int np = 32;
    int nd = 32;
};

fs::Calibration load_calib(const CommonOpts& c) {
    return c.calib_path.empty() ? fs::default_calibration() : fs::load_calibration(c.calib_path);
}

fs::PhaseSpec make_phase(const CommonOpts& c) {
    if (c.phase == "prefill") return fs::PhaseSpec::prefill(c.np);
    if (c.phase == "decode") return fs::PhaseSpec::decode(c.nd);
    throw CLI::ValidationError("--phase must be prefill or decode");
}

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--calib", c.calib_path, "Calibration JSON (default: built-in)");
    cmd->add_option("--phase", c.phase, "Phase: prefill or decode")
        ->check(CLI::IsMember({"prefill", "decode"}));
    cmd->add_option("--np", c.np, "Prompt tokens (prefill)")->check(CLI::PositiveNumber);
    cmd->add_option("--nd", c.nd, "Output tokens (decode)")->check(CLI::PositiveNumber);
}

void write_manifest(const std::string& command, const std::vector<std::string>& argv,
                    const fs::Calibration& calib, std::uint64_t seed,
                    const std::vector<std::string>& outputs, double wall_ms,
                    const std::string& out_base) {
    fs::RunManifest m;
    m.command = command;
    m.arguments = argv;
    m.calib_hash = calib.hash_hex();
    m.seed = seed;
    m.outputs = outputs;
    m.wall_ms = wall_ms;
    fs::save_manifest(m, out_base + ".manifest.json");
}

json entry_json(const fs::ProfileEntry& e) {
    json j;
    j["f_cpu"] = e.cfg.f_cpu;
    j["f_gpu"] = e.cfg.f_gpu;
    j["f_mem"] = e.cfg.f_mem ? json(*e.cfg.f_mem) : json("default");
    j["latency_ms"] = e.latency;
    j["energy_mj_per_token"] = e.energy_per_token;
    j["avg_power_mw"] = e.avg_power;
    return j;
}

int run_cli(std::vector<std::string> argv);  // forward (rerun recurses)

int run_cli(std::vector<std::string> argv) {
    CLI::App app{"Deterministic mobile DVFS + LLM-inference simulator"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string out;
    int workers = 1;
    std::optional<double> pin_cpu, pin_gpu, pin_mem;
    std::string goal = "g1";
    std::optional<double> budget_mj, target_ms;
    bool from_gov = false;
    std::string requests_path, table_path, policy = "gov";
    int synth_n = 0;
    std::uint64_t seed = 0;
    std::string manifest_path;

    CLI::App* sim = app.add_subcommand("simulate", "Run one phase and write trace + metrics");
    add_common(sim, common);
    sim->add_option("--pin-cpu", pin_cpu, "Pin CPU frequency (MHz)");
    sim->add_option("--pin-gpu", pin_gpu, "Pin GPU frequency (MHz)");
    sim->add_option("--pin-mem", pin_mem, "Pin memory frequency (MHz)");
    sim->add_option("--out", out, "Output base path")->required();

    CLI::App* swp = app.add_subcommand("sweep", "Brute-force profile over the frequency grid");
    add_common(swp, common);
    swp->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    swp->add_option("--out", out, "Output base path")->required();

    CLI::App* sea = app.add_subcommand("search", "Two-step FUSE search for one setting");
    add_common(sea, common);
    sea->add_option("--goal", goal, "g1 (energy budget) or g2 (latency target)")
        ->check(CLI::IsMember({"g1", "g2"}));
    sea->add_option("--budget-mj", budget_mj, "G1 energy budget, mJ/token");
    sea->add_option("--target-ms", target_ms, "G2 latency target, ms");
    sea->add_option("--out", out, "Output base path")->required();

    CLI::App* tab = app.add_subcommand("table", "Build the per-bucket pinned-frequency table");
    tab->add_option("--calib", common.calib_path, "Calibration JSON (default: built-in)");
    tab->add_option("--goal", goal, "g1 or g2")->check(CLI::IsMember({"g1", "g2"}));
    tab->add_option("--budget-mj", budget_mj, "G1 budget applied to every setting");
    tab->add_option("--target-ms", target_ms, "G2 target applied to every setting");
    tab->add_flag("--from-gov", from_gov,
                  "Derive each setting's goal from the default-governor baseline");
    tab->add_option("--out", out, "Output base path")->required();

    CLI::App* rep = app.add_subcommand("replay", "Replay a request trace under a policy");
    rep->add_option("--calib", common.calib_path, "Calibration JSON (default: built-in)");
    rep->add_option("--requests", requests_path, "Request file (id np nd per line)");
    rep->add_option("--synth", synth_n, "Synthesize this many requests instead");
    rep->add_option("--seed", seed, "Seed for --synth");
    rep->add_option("--policy", policy, "gov or fuse")->check(CLI::IsMember({"gov", "fuse"}));
    rep->add_option("--table", table_path, "Pinned-frequency table JSON (fuse policy)");
    rep->add_option("--out", out, "Output base path")->required();

    CLI::App* rrn = app.add_subcommand("rerun", "Re-execute a recorded run manifest");
    rrn->add_option("--manifest", manifest_path, "Manifest JSON")->required();

    const std::vector<std::string> argv_fwd(argv.rbegin(), argv.rend());
    try {
        app.parse(argv);  // reversed vector form; consumed during parsing
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    auto t0 = std::chrono::steady_clock::now();
    auto wall = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        if (app.got_subcommand(sim)) {
            fs::Calibration calib = load_calib(common);
            fs::PhaseSpec phase = make_phase(common);
            // Bad pin values are flag errors, not simulation errors.
            if (pin_cpu && !calib.table.contains(fs::Component::Cpu, *pin_cpu))
                throw CLI::ValidationError("--pin-cpu: frequency not in the CPU table");
            if (pin_gpu && !calib.table.contains(fs::Component::Gpu, *pin_gpu))
                throw CLI::ValidationError("--pin-gpu: frequency not in the GPU table");
            if (pin_mem && !calib.table.contains(fs::Component::Mem, *pin_mem))
                throw CLI::ValidationError("--pin-mem: frequency not in the memory table");
            fs::GovernorSet gov;
            gov.cpu = pin_cpu
                          ? fs::CpuGovernor{fs::make_pin(*pin_cpu, fs::Component::Cpu, calib.table)}
                          : fs::CpuGovernor{calib.make_eas(calib.table.max(fs::Component::Cpu))};
            gov.gpu =
                pin_gpu ? fs::GpuGovernor{fs::make_pin(*pin_gpu, fs::Component::Gpu, calib.table)}
                        : fs::GpuGovernor{calib.make_quickstep(calib.table.max(fs::Component::Gpu))};
            gov.mem =
                pin_mem ? fs::MemGovernor{fs::make_pin(*pin_mem, fs::Component::Mem, calib.table)}
                        : fs::MemGovernor{calib.make_mem(calib.table.max(fs::Component::Mem))};
            fs::RunOutput o = fs::run_phase(calib, phase, gov);
            fs::PhaseMetrics m = fs::phase_metrics(o, phase);
            fs::write_file(out + ".trace.csv", fs::trace_to_csv(o.trace));
            json mj;
            mj["phase"] = fs::to_string(phase.kind);
            mj["tokens"] = phase.tokens();
            mj[phase.kind == fs::PhaseKind::Prefill ? "ttft_ms" : "tpot_ms"] = m.latency;
            mj["energy_mj_per_token"] = m.energy_per_token;
            mj["total_energy_mj"] = o.result.energy;
            mj["avg_power_mw"] = o.result.avg_power;
            mj["eff_freq_cpu_mhz"] = m.eff_freq_cpu;
            mj["eff_freq_gpu_mhz"] = m.eff_freq_gpu;
            mj["eff_freq_mem_mhz"] = m.eff_freq_mem;
            fs::write_file(out + ".metrics.json", mj.dump(2) + "\n");
            write_manifest("simulate", argv_fwd, calib, 0,
                           {out + ".trace.csv", out + ".metrics.json"}, wall(), out);
            std::cout << mj.dump(2) << "\n";
        } else if (app.got_subcommand(swp)) {
            fs::Calibration calib = load_calib(common);
            fs::PhaseSpec phase = make_phase(common);
            fs::ProfileSet ps =
                fs::sweep(calib, phase, fs::GridSpec::full(calib.table), workers);
            fs::save_profiles(ps, out + ".profiles.csv");
            write_manifest("sweep", argv_fwd, calib, 0, {out + ".profiles.csv"}, wall(), out);
            std::cout << "profiled " << ps.size() << " configurations -> " << out
                      << ".profiles.csv\n";
        } else if (app.got_subcommand(sea)) {
            fs::Calibration calib = load_calib(common);
            fs::PhaseSpec phase = make_phase(common);
            fs::SearchResult r;
            if (goal == "g1") {
                if (!budget_mj) throw CLI::ValidationError("--goal g1 requires --budget-mj");
                r = fs::search_g1(calib, phase, *budget_mj);
            } else {
                if (!target_ms) throw CLI::ValidationError("--goal g2 requires --target-ms");
                r = fs::search_g2(calib, phase, *target_ms);
            }
            json j;
            j["goal"] = goal;
            j["goal_value"] = goal == "g1" ? *budget_mj : *target_ms;
            j["f_cpu"] = r.cfg.f_cpu;
            j["f_gpu"] = r.cfg.f_gpu;
            j["latency_ms"] = r.latency;
            j["energy_mj_per_token"] = r.energy_per_token;
            j["inferences_step1"] = r.report.inferences_step1;
            j["inferences_step2"] = r.report.inferences_step2;
            j["gpu_candidates"] = r.report.candidates.gpu;
            fs::write_file(out + ".search.json", j.dump(2) + "\n");
            write_manifest("search", argv_fwd, calib, 0, {out + ".search.json"}, wall(), out);
            std::cout << j.dump(2) << "\n";
        } else if (app.got_subcommand(tab)) {
            fs::Calibration calib = load_calib(common);
            fs::TableGoals goals;
            auto goal_for = [&](const fs::PhaseSpec& phase) {
                if (from_gov) {
                    fs::ProfileEntry g = fs::measure_config(calib, phase, std::nullopt,
                                                            std::nullopt, std::nullopt);
                    return goal == "g1" ? fs::SearchGoal::g1(g.energy_per_token)
                                        : fs::SearchGoal::g2(g.latency);
                }
                if (goal == "g1") {
                    if (!budget_mj)
                        throw CLI::ValidationError("table --goal g1 needs --budget-mj or --from-gov");
                    return fs::SearchGoal::g1(*budget_mj);
                }
                if (!target_ms)
                    throw CLI::ValidationError("table --goal g2 needs --target-ms or --from-gov");
                return fs::SearchGoal::g2(*target_ms);
            };
            goals.decode = goal_for(fs::PhaseSpec::decode(fs::kDecodeRepresentative));
            for (int i = 0; i < 5; ++i)
                goals.prefill[i] =
                    goal_for(fs::PhaseSpec::prefill(fs::kPrefillRepresentatives[i]));
            fs::FuseTable t = fs::build_config_table(calib, goals);
            fs::save_fuse_table(t, out + ".table.json");
            write_manifest("table", argv_fwd, calib, 0, {out + ".table.json"}, wall(), out);
            std::cout << fs::fuse_table_to_json(t);
        } else if (app.got_subcommand(rep)) {
            fs::Calibration calib = load_calib(common);
            std::vector<fs::Request> reqs;
            if (!requests_path.empty())
                reqs = fs::load_requests(requests_path);
            else if (synth_n > 0)
                reqs = fs::synthesize_requests(synth_n, seed);
            else
                throw CLI::ValidationError("replay needs --requests or --synth");
            fs::ReplayPolicy pol = fs::ReplayPolicy::gov();
            if (policy == "fuse") {
                if (table_path.empty())
                    throw CLI::ValidationError("--policy fuse requires --table");
                pol = fs::ReplayPolicy::fuse(fs::load_fuse_table(table_path));
            }
            fs::ReplayReport r = fs::replay(calib, pol, reqs);
            fs::write_file(out + ".replay.csv", fs::replay_report_to_csv(r));
            json j;
            j["policy"] = r.policy;
            j["requests"] = r.per_request.size();
            j["mean_ttft_ms"] = r.mean_ttft;
            j["mean_tpot_ms"] = r.mean_tpot;
            j["mean_e2e_ms"] = r.mean_e2e;
            j["total_energy_mj"] = r.total_energy_mj;
            j["total_mah"] = r.total_mah;
            fs::write_file(out + ".summary.json", j.dump(2) + "\n");
            write_manifest("replay", argv_fwd, calib, seed,
                           {out + ".replay.csv", out + ".summary.json"}, wall(), out);
            std::cout << j.dump(2) << "\n";
        } else if (app.got_subcommand(rrn)) {
            fs::RunManifest m = fs::load_manifest(manifest_path);
            std::vector<std::string> rev(m.arguments.rbegin(), m.arguments.rend());
            return run_cli(rev);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    return run_cli(std::move(args));
}
