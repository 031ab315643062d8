#include "facetemb/manifest.hpp"

#include <fstream>

#include "facetemb/errors.hpp"
#include "facetemb/hash.hpp"
#include "json.hpp"

namespace facetemb {

void RunManifest::add_input(const std::string& path) {
    input_digests.emplace_back(path, to_hex(file_digest(path)));
}

void RunManifest::add_config(const std::string& key, const std::string& value) {
    config.emplace_back(key, value);
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["command"] = manifest.command;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : manifest.config) cfg[k] = v;
    j["config"] = std::move(cfg);
    j["seed"] = manifest.seed;
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [p, d] : manifest.input_digests) inputs[p] = d;
    j["inputs"] = std::move(inputs);
    j["outputs"] = manifest.outputs;
    j["wall_ms"] = manifest.wall_ms;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace facetemb
