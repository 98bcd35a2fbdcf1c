#include "fusesim/replay.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fusesim/metrics.hpp"
#include "fusesim/sim.hpp"
#include "fusesim/util.hpp"

namespace fusesim {

std::vector<Request> load_requests(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<Request> reqs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        Request r;
        if (!(ls >> r.id >> r.prefill_tokens >> r.decode_tokens))
            throw ParseError("requests: line " + std::to_string(lineno) +
                             ": expected 'id prefill_tokens decode_tokens'");
        std::string extra;
        if (ls >> extra)
            throw ParseError("requests: line " + std::to_string(lineno) + ": trailing fields");
        if (r.prefill_tokens < 1 || r.prefill_tokens > kMaxPrefillTokens)
            throw ParseError("requests: line " + std::to_string(lineno) +
                             ": prefill_tokens out of (0, 512]");
        if (r.decode_tokens < 1 || r.decode_tokens > kMaxDecodeTokens)
            throw ParseError("requests: line " + std::to_string(lineno) +
                             ": decode_tokens out of (0, 256]");
        reqs.push_back(r);
    }
    return reqs;
}

namespace {

// Explicit Box-Muller on mt19937_64 output: std::normal_distribution is
// implementation-defined, and replay streams must be bit-identical across
// toolchains.
double draw_normal(std::mt19937_64& rng) {
    double u1 = 0;
    while (u1 <= 0) u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int draw_lognormal(std::mt19937_64& rng, double mu, double sigma, int lo, int hi) {
    double v = std::exp(mu + sigma * draw_normal(rng));
    int n = static_cast<int>(std::lround(v));
    return std::clamp(n, lo, hi);
}

}  // namespace

std::vector<Request> synthesize_requests(int n, std::uint64_t seed) {
    if (n < 1) throw SimError("synthesize_requests: n must be >= 1");
    std::mt19937_64 rng(seed);
    const double mu_np = std::log(232.4) - 0.18;   // lognormal mean 232.4 before clipping
    const double sigma_np = 0.6;
    const double mu_nd = std::log(70.0) - 0.15125;  // lognormal mean 70 before clipping
    const double sigma_nd = 0.55;
    std::vector<Request> reqs;
    reqs.reserve(n);
    for (int i = 0; i < n; ++i) {
        Request r;
        r.id = i;
        r.prefill_tokens = draw_lognormal(rng, mu_np, sigma_np, 1, kMaxPrefillTokens);
        r.decode_tokens = draw_lognormal(rng, mu_nd, sigma_nd, 1, kMaxDecodeTokens);
        reqs.push_back(r);
    }
    return reqs;
}

ReplayReport replay(const Calibration& calib, const ReplayPolicy& policy,
                    const std::vector<Request>& requests) {
    if (requests.empty()) throw SimError("replay: empty request set");
    GovernorSet gov = calib.default_governors();
    RunOptions opt;
    opt.record_trace = false;
    opt.max_ms = 600000.0;

    auto run_pinned = [&](const PhaseSpec& phase, PinnedPair pin) {
        // FUSE pins CPU and GPU for the phase; the memory governor keeps its
        // continuous state across phases and requests.
        GovernorSet pinned;
        pinned.cpu = make_pin(pin.f_cpu, Component::Cpu, calib.table);
        pinned.gpu = make_pin(pin.f_gpu, Component::Gpu, calib.table);
        pinned.mem = gov.mem;
        RunOutput out = run_phase(calib, phase, pinned, opt);
        gov.mem = pinned.mem;
        return out;
    };

    ReplayReport rep;
    rep.policy = policy.label;
    KahanSum sum_ttft, sum_tpot, sum_e2e, sum_energy;
    for (const Request& rq : requests) {
        PhaseSpec pre = PhaseSpec::prefill(rq.prefill_tokens);
        PhaseSpec dec = PhaseSpec::decode(rq.decode_tokens);
        RunOutput rp, rd;
        if (policy.kind == ReplayPolicy::Kind::Fuse) {
            rp = run_pinned(pre, lookup_config(policy.table, PhaseKind::Prefill,
                                               rq.prefill_tokens));
            rd = run_pinned(dec, lookup_config(policy.table, PhaseKind::Decode, 0));
        } else {
            rp = run_phase(calib, pre, gov, opt);
            rd = run_phase(calib, dec, gov, opt);
        }
        RequestResult rr;
        rr.id = rq.id;
        rr.ttft = rp.result.latency;
        rr.tpot = rd.result.latency / rq.decode_tokens;
        rr.e2e = e2e_latency(rr.ttft, rr.tpot, rq.decode_tokens);
        rr.energy = rp.result.energy + rd.result.energy;
        rep.per_request.push_back(rr);
        sum_ttft.add(rr.ttft);
        sum_tpot.add(rr.tpot);
        sum_e2e.add(rr.e2e);
        sum_energy.add(rr.energy);
    }
    const double n = static_cast<double>(requests.size());
    rep.mean_ttft = sum_ttft.value() / n;
    rep.mean_tpot = sum_tpot.value() / n;
    rep.mean_e2e = sum_e2e.value() / n;
    rep.total_energy_mj = sum_energy.value();
    // mJ -> mAh: mWs / (V * 3600 s/h), with 1 mJ = 1 mWs.
    rep.total_mah = rep.total_energy_mj / (kNominalVoltage * 3600.0 * 1000.0) * 1000.0;
    return rep;
}

std::vector<CompareRow> compare_reports(const ReplayReport& base, const ReplayReport& other) {
    if (base.per_request.size() != other.per_request.size())
        throw SimError("compare: request sets differ in size");
    for (std::size_t i = 0; i < base.per_request.size(); ++i)
        if (base.per_request[i].id != other.per_request[i].id)
            throw SimError("compare: request sets differ at index " + std::to_string(i));
    auto row = [](std::string name, double a, double b) {
        return CompareRow{std::move(name), a, b, b / a};
    };
    return {row("mean_ttft_ms", base.mean_ttft, other.mean_ttft),
            row("mean_tpot_ms", base.mean_tpot, other.mean_tpot),
            row("mean_e2e_ms", base.mean_e2e, other.mean_e2e),
            row("total_energy_mj", base.total_energy_mj, other.total_energy_mj)};
}

std::string replay_report_to_csv(const ReplayReport& r) {
    std::ostringstream os;
    os << "policy,request_id,ttft_ms,tpot_ms,e2e_ms,energy_mj\n";
    for (const auto& rr : r.per_request) {
        os << r.policy << ',' << rr.id << ',' << format_double(rr.ttft) << ','
           << format_double(rr.tpot) << ',' << format_double(rr.e2e) << ','
           << format_double(rr.energy) << '\n';
    }
    return os.str();
}

std::string compare_to_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    os << "metric,base,other,ratio\n";
    for (const auto& r : rows)
        os << r.metric << ',' << format_double(r.base) << ',' << format_double(r.other) << ','
           << format_double(r.ratio) << '\n';
    return os.str();
}

}  // namespace fusesim
