#include "cmllab/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cmllab/hash.hpp"
#include "cmllab/maps.hpp"

namespace cmllab {

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read \"" + path + "\" for hashing");
    std::ostringstream body;
    body << in.rdbuf();
    return hash_hex(fnv1a64(body.str()));
}

namespace {

nlohmann::ordered_json records_json(const std::vector<FileRecord>& files) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const FileRecord& f : files) arr.push_back({{"path", f.path}, {"hash", f.hash_hex}});
    return arr;
}

std::vector<FileRecord> records_from(const nlohmann::ordered_json& arr) {
    std::vector<FileRecord> out;
    for (const auto& item : arr)
        out.push_back({item.at("path").get<std::string>(), item.at("hash").get<std::string>()});
    return out;
}

} // namespace

std::string RunManifest::to_json() const {
    nlohmann::ordered_json doc;
    doc["tool_version"] = tool_version;
    doc["command"] = command;
    doc["resolved_config"] = resolved_config;
    doc["master_seed"] = master_seed;
    doc["inputs"] = records_json(inputs);
    doc["outputs"] = records_json(outputs);
    doc["wall_seconds"] = wall_seconds;
    doc["steps_per_second"] = steps_per_second;
    return doc.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    RunManifest m;
    try {
        auto doc = nlohmann::ordered_json::parse(text);
        m.tool_version = doc.at("tool_version").get<std::string>();
        m.command = doc.at("command").get<std::string>();
        m.resolved_config = doc.at("resolved_config").get<std::string>();
        m.master_seed = doc.at("master_seed").get<std::uint64_t>();
        m.inputs = records_from(doc.at("inputs"));
        m.outputs = records_from(doc.at("outputs"));
        m.wall_seconds = doc.value("wall_seconds", 0.0);
        m.steps_per_second = doc.value("steps_per_second", 0.0);
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest \"" + path + "\"");
    out << to_json();
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read manifest \"" + path + "\"");
    std::ostringstream body;
    body << in.rdbuf();
    return from_json(body.str());
}

} // namespace cmllab
