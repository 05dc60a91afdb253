// Copyright (c) 2026 the revkit authors
// SPDX-License-Identifier: Apache-2.0

#include "revkit/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace revkit {

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{
        {"command", command},     {"config_path", config_path},
        {"seed", seed},           {"inputs", inputs},
        {"outputs", outputs},     {"tool_version", tool_version},
        {"started_at", started_at}, {"finished_at", finished_at},
        {"extra", extra},
    };
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.value("command", "");
    m.config_path = j.value("config_path", "");
    m.seed = j.value("seed", std::uint64_t(0));
    m.inputs = j.value("inputs", std::vector<std::string>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.tool_version = j.value("tool_version", "");
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.extra = j.value("extra", std::map<std::string, std::string>{});
    return m;
}

void RunManifest::write_atomic(const std::string& path) const {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << to_json().dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace revkit
