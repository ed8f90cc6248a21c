#pragma once
// Run manifest: every CLI command records its resolved configuration,
// input digests and produced artifacts, and is written even on failure
// (with the error captured).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tagembed {

struct RunManifest {
    std::string command;
    std::string resolved_config;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> fnv1a hex
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;
    std::string error;  // empty on success

    void add_input(const std::string& path);  // hashes the file
    void add_output(const std::string& path) { outputs.push_back(path); }
    void write(const std::string& path) const;
};

}  // namespace tagembed
