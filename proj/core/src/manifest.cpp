#include "fusesim/manifest.hpp"

#include <json.hpp>

#include "fusesim/types.hpp"
#include "fusesim/util.hpp"

namespace fusesim {

using json = nlohmann::ordered_json;

void RunManifest::validate() const {
    if (command.empty()) throw SimError("manifest: empty command");
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["arguments"] = m.arguments;
    j["calib_hash"] = m.calib_hash;
    j["seed"] = m.seed;
    j["outputs"] = m.outputs;
    j["wall_ms"] = m.wall_ms;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    RunManifest m;
    try {
        json j = json::parse(text);
        m.command = j.at("command");
        m.arguments = j.at("arguments").get<std::vector<std::string>>();
        m.calib_hash = j.value("calib_hash", "");
        m.seed = j.value("seed", std::uint64_t{0});
        m.outputs = j.value("outputs", std::vector<std::string>{});
        m.wall_ms = j.value("wall_ms", 0.0);
    } catch (const std::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
}

void save_manifest(const RunManifest& m, const std::string& path) {
    write_file(path, manifest_to_json(m));
}

RunManifest load_manifest(const std::string& path) {
    return manifest_from_json(read_file(path));
}

}  // namespace fusesim
