#include "tagembed/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tagembed/hash.hpp"

namespace tagembed {

void RunManifest::add_input(const std::string& path) {
    input_hashes.emplace_back(path, to_hex(hash_file(path)));
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["resolved_config"] = resolved_config;
    j["seed"] = seed;
    j["inputs"] = nlohmann::json::object();
    for (const auto& [p, h] : input_hashes) j["inputs"][p] = h;
    j["outputs"] = outputs;
    j["duration_seconds"] = duration_seconds;
    if (!error.empty()) j["error"] = error;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace tagembed
