#include "groundrec/manifest.hpp"

#include <array>
#include <fstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "groundrec/common.hpp"
#include "groundrec/ingest.hpp"

namespace groundrec {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["argv"] = argv;
    j["flags"] = flags;
    j["input_digests"] = input_digests;
    j["seeds"] = seeds;
    j["version"] = version;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.flags = j.at("flags").get<std::map<std::string, std::string>>();
    m.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::string>>();
    m.version = j.at("version").get<std::string>();
    return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    write_file(path, manifest.to_json());
}

RunManifest read_manifest(const std::filesystem::path& path) {
    try {
        return RunManifest::from_json(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid manifest: " + e.what());
    }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
    auto p = artifact;
    p += ".manifest.json";
    return p;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace groundrec
