#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace facetemb {

/// Provenance record emitted once per CLI run.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;  // flat key/value snapshot
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_digests;  // path -> hex digest
    std::vector<std::string> outputs;
    double wall_ms = 0.0;

    void add_input(const std::string& path);
    void add_config(const std::string& key, const std::string& value);
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace facetemb
