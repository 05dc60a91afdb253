// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace revkit {

// Provenance sidecar written next to every artifact a command produces.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string tool_version;
    std::string started_at;
    std::string finished_at;
    std::map<std::string, std::string> extra;  // command-specific counts etc.

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);

    // Writes via a temp file + rename so readers never see a partial file.
    void write_atomic(const std::string& path) const;
};

}  // namespace revkit
