#include "fusesim/calibration.hpp"

#include <cmath>

#include <json.hpp>

#include "fusesim/util.hpp"

namespace fusesim {

using json = nlohmann::ordered_json;

FrequencyTable pixel7_table() {
    FrequencyTable t;
    t.cpu = {500,  851,  984,  1106, 1277, 1426, 1582, 1745, 1826,
             2048, 2188, 2252, 2401, 2507, 2630, 2704, 2802, 2850};
    t.gpu = {151, 202, 251, 302, 351, 400, 471, 510, 572, 701, 762, 848};
    t.mem = {421, 546, 676, 845, 1014, 1352, 1539, 1716, 2028, 2288, 2535, 2730, 3172};
    return t;
}

void FrequencyTable::validate() const {
    for (const auto* l : {&cpu, &gpu, &mem}) {
        if (l->empty()) throw SimError("frequency table: empty list");
        for (std::size_t i = 1; i < l->size(); ++i)
            if ((*l)[i] <= (*l)[i - 1]) throw SimError("frequency table: not strictly increasing");
    }
}

void Calibration::validate() const {
    table.validate();
    prefill.validate();
    decode.validate();
    power.validate();
    if (!gov.quickstep_bands.empty()) {
        QuickstepState qs;
        qs.dvfs_table = gov.quickstep_bands;
        qs.current_freq = table.max(Component::Gpu);
        qs.validate();
        if (gov.quickstep_bands.size() != table.gpu.size())
            throw SimError("quickstep bands must cover the GPU frequency list");
        for (std::size_t i = 0; i < table.gpu.size(); ++i)
            if (gov.quickstep_bands[i].freq != table.gpu[i])
                throw SimError("quickstep band rows must match the GPU frequency list");
    }
    if (!(gov.mem_target_load > 0 && gov.mem_target_load <= 1))
        throw SimError("memory target_load must be in (0, 1]");
}

EasState Calibration::make_eas(double f0) const {
    EasState e;
    e.c_max = gov.eas_c_max;
    e.decay = std::pow(0.5, 1.0 / gov.eas_decay_half_life_ms);
    e.headroom = gov.eas_headroom;
    e.current_freq = f0;
    return e;
}

QuickstepState Calibration::make_quickstep(double f0) const {
    QuickstepState q;
    q.dvfs_table = quickstep_bands();
    q.current_freq = f0;
    q.window_ms = gov.quickstep_window_ms;
    return q;
}

InteractiveMemState Calibration::make_mem(double f0) const {
    InteractiveMemState m;
    m.current_freq = f0;
    m.target_load = gov.mem_target_load;
    m.period_ms = gov.mem_period_ms;
    return m;
}

GovernorSet Calibration::default_governors() const {
    return GovernorSet{make_eas(table.max(Component::Cpu)),
                       make_quickstep(table.max(Component::Gpu)),
                       make_mem(table.max(Component::Mem))};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json perf_to_json(const PerfModelParams& p) {
    return json{{"w_c", p.w_c}, {"w_g", p.w_g},     {"b_m", p.b_m},
                {"g_c", p.g_c}, {"g0", p.g0},       {"w_o", p.w_o},
                {"n_ref", p.n_ref}, {"wc_exp", p.wc_exp}};
}

PerfModelParams perf_from_json(const json& j) {
    PerfModelParams p;
    p.w_c = j.at("w_c");
    p.w_g = j.at("w_g");
    p.b_m = j.at("b_m");
    p.g_c = j.at("g_c");
    p.g0 = j.at("g0");
    p.w_o = j.value("w_o", 0.0);
    p.n_ref = j.value("n_ref", 32);
    p.wc_exp = j.value("wc_exp", 0.5);
    return p;
}

json comp_power_to_json(const ComponentPower& c) {
    return json{{"a", c.a}, {"b", c.b}, {"exp", c.exp}};
}

ComponentPower comp_power_from_json(const json& j, double default_exp) {
    return {j.at("a"), j.at("b"), j.value("exp", default_exp)};
}

json fixed_to_json(const CalibrationFixed& f) {
    json j = json::object();
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) j[k] = *v;
    };
    put("w_c", f.w_c);
    put("w_g", f.w_g);
    put("b_m", f.b_m);
    put("g_c", f.g_c);
    put("g0", f.g0);
    put("w_o", f.w_o);
    return j;
}

CalibrationFixed fixed_from_json(const json& j) {
    CalibrationFixed f;
    auto get = [&](const char* k) -> std::optional<double> {
        return j.contains(k) ? std::optional<double>(j.at(k).get<double>()) : std::nullopt;
    };
    f.w_c = get("w_c");
    f.w_g = get("w_g");
    f.b_m = get("b_m");
    f.g_c = get("g_c");
    f.g0 = get("g0");
    f.w_o = get("w_o");
    return f;
}

json anchor_to_json(const Anchor& a) {
    return json{{"phase", to_string(a.phase)},
                {"f_cpu", a.cfg.f_cpu},
                {"f_gpu", a.cfg.f_gpu},
                {"f_mem", a.cfg.f_mem.value()},
                {"metric", a.metric == AnchorMetric::UCpu ? "u_cpu" : "u_gpu"},
                {"value", a.value}};
}

Anchor anchor_from_json(const json& j) {
    Anchor a;
    a.phase = j.at("phase") == "prefill" ? PhaseKind::Prefill : PhaseKind::Decode;
    a.cfg = {j.at("f_cpu"), j.at("f_gpu"), j.at("f_mem").get<double>()};
    a.metric = j.at("metric") == "u_cpu" ? AnchorMetric::UCpu : AnchorMetric::UGpu;
    a.value = j.at("value");
    return a;
}

}  // namespace

std::string to_json(const Calibration& c) {
    json j;
    j["model_id"] = c.model_id;
    j["table"] = {{"cpu_mhz", c.table.cpu}, {"gpu_mhz", c.table.gpu}, {"mem_mhz", c.table.mem}};
    j["perf"] = {{"prefill", perf_to_json(c.prefill)}, {"decode", perf_to_json(c.decode)}};
    j["power"] = {{"p_idle_mw", c.power.p_idle},
                  {"cpu", comp_power_to_json(c.power.cpu)},
                  {"gpu", comp_power_to_json(c.power.gpu)},
                  {"mem", comp_power_to_json(c.power.mem)}};
    json bands = json::array();
    for (const auto& b : c.gov.quickstep_bands)
        bands.push_back({{"freq_mhz", b.freq}, {"min_util", b.min_util}, {"max_util", b.max_util}});
    j["governors"] = {{"eas",
                       {{"c_max", c.gov.eas_c_max},
                        {"decay_half_life_ms", c.gov.eas_decay_half_life_ms},
                        {"headroom", c.gov.eas_headroom}}},
                      {"quickstep", {{"window_ms", c.gov.quickstep_window_ms}, {"bands", bands}}},
                      {"mem", {{"target_load", c.gov.mem_target_load},
                               {"period_ms", c.gov.mem_period_ms}}}};
    json anchors = json::array();
    for (const auto& a : c.anchors) anchors.push_back(anchor_to_json(a));
    j["anchors"] = anchors;
    j["calibration_fixed"] = {{"prefill", fixed_to_json(c.fixed_prefill)},
                              {"decode", fixed_to_json(c.fixed_decode)}};
    return j.dump(2) + "\n";
}

Calibration calibration_from_json(const std::string& text) {
    Calibration c;
    try {
    json j = json::parse(text);
    c.model_id = j.value("model_id", "unnamed");
    c.table.cpu = j.at("table").at("cpu_mhz").get<std::vector<double>>();
    c.table.gpu = j.at("table").at("gpu_mhz").get<std::vector<double>>();
    c.table.mem = j.at("table").at("mem_mhz").get<std::vector<double>>();
    c.prefill = perf_from_json(j.at("perf").at("prefill"));
    c.decode = perf_from_json(j.at("perf").at("decode"));
    c.power.p_idle = j.at("power").at("p_idle_mw");
    c.power.cpu = comp_power_from_json(j.at("power").at("cpu"), 3.0);
    c.power.gpu = comp_power_from_json(j.at("power").at("gpu"), 3.0);
    c.power.mem = comp_power_from_json(j.at("power").at("mem"), 2.0);
    if (j.contains("governors")) {
        const json& g = j.at("governors");
        if (g.contains("eas")) {
            c.gov.eas_c_max = g.at("eas").value("c_max", 1024.0);
            c.gov.eas_decay_half_life_ms = g.at("eas").value("decay_half_life_ms", 32.0);
            c.gov.eas_headroom = g.at("eas").value("headroom", 1.25);
        }
        if (g.contains("quickstep")) {
            c.gov.quickstep_window_ms = g.at("quickstep").value("window_ms", 20);
            for (const auto& b : g.at("quickstep").value("bands", json::array()))
                c.gov.quickstep_bands.push_back(
                    {b.at("freq_mhz"), b.at("min_util"), b.at("max_util")});
        }
        if (g.contains("mem")) {
            c.gov.mem_target_load = g.at("mem").value("target_load", 0.7);
            c.gov.mem_period_ms = g.at("mem").value("period_ms", 20);
        }
    }
    for (const auto& a : j.value("anchors", json::array())) c.anchors.push_back(anchor_from_json(a));
    if (j.contains("calibration_fixed")) {
        c.fixed_prefill = fixed_from_json(j.at("calibration_fixed").at("prefill"));
        c.fixed_decode = fixed_from_json(j.at("calibration_fixed").at("decode"));
    }
    } catch (const std::exception& e) {
        throw ParseError(std::string("calibration: ") + e.what());
    }
    c.validate();
    return c;
}

Calibration load_calibration(const std::string& path) {
    return calibration_from_json(read_file(path));
}

void save_calibration(const Calibration& c, const std::string& path) {
    write_file(path, to_json(c));
}

std::uint64_t Calibration::hash() const { return fnv1a64(to_json(*this)); }

std::string Calibration::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

// ---------------------------------------------------------------------------
// Shipped default calibration
// ---------------------------------------------------------------------------

Calibration default_calibration() {
    Calibration c;
    c.model_id = "pixel7-tinyllama-like";
    c.table = pixel7_table();

    c.decode.w_c = 400.0;
    c.decode.w_g = 1600.0;
    c.decode.b_m = 2137.409655822467;
    c.decode.g_c = 460.3292080382689;
    c.decode.g0 = 0.9115016899556851;
    c.decode.w_o = 1773.5392702455679;

    c.prefill.w_c = 1600.0;
    c.prefill.w_g = 25600.0;
    c.prefill.b_m = 2500.0;
    c.prefill.g_c = 459.0;
    c.prefill.g0 = 6.201516950583996;
    c.prefill.w_o = 12995.912333990163;

    c.power.p_idle = 600.0;
    c.power.cpu = {1200.0, 0.0, 3.0};
    c.power.gpu = {360.0, 1438.0, 3.0};
    c.power.mem = {100.0, 150.0, 2.0};

    const double bands[12][2] = {{0.000, 0.900}, {0.856, 0.880}, {0.838, 0.863}, {0.823, 0.848},
                                 {0.810, 0.835}, {0.799, 0.823}, {0.786, 0.808}, {0.779, 0.801},
                                 {0.770, 0.790}, {0.754, 0.771}, {0.747, 0.762}, {0.752, 1.000}};
    for (std::size_t i = 0; i < c.table.gpu.size(); ++i)
        c.gov.quickstep_bands.push_back({c.table.gpu[i], bands[i][0], bands[i][1]});

    c.anchors = {
        {PhaseKind::Decode, {2850, 701, 3172.0}, AnchorMetric::UGpu, 0.709},
        {PhaseKind::Decode, {500, 701, 3172.0}, AnchorMetric::UGpu, 0.529},
        {PhaseKind::Decode, {2188, 848, 3172.0}, AnchorMetric::UCpu, 0.257},
        {PhaseKind::Decode, {2188, 151, 3172.0}, AnchorMetric::UCpu, 0.079},
        {PhaseKind::Prefill, {2188, 848, 3172.0}, AnchorMetric::UCpu, 0.175},
        {PhaseKind::Prefill, {2188, 762, 3172.0}, AnchorMetric::UGpu, 0.828},
    };
    c.fixed_decode.w_c = 400.0;
    c.fixed_decode.w_g = 1600.0;
    c.fixed_prefill.w_c = 1600.0;
    c.fixed_prefill.w_g = 25600.0;
    c.fixed_prefill.b_m = 2500.0;
    c.fixed_prefill.g_c = 459.0;
    return c;
}

}  // namespace fusesim
