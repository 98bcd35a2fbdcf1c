#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fusesim {

// Reproducibility record written next to every command's outputs; re-running
// the recorded command reproduces the artifact files byte-for-byte.
struct RunManifest {
    std::string command;                 // subcommand name
    std::vector<std::string> arguments;  // full argv (excluding program name)
    std::string calib_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;    // artifact paths written
    double wall_ms = 0;

    void validate() const;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

}  // namespace fusesim
