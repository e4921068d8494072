#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace groundrec {

std::string sha256_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

/// Provenance written beside every artifact: enough to rerun the command and
/// check that its inputs are unchanged.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::map<std::string, std::string> flags;
    std::map<std::string, std::string> input_digests;  // path -> sha256
    std::map<std::string, std::string> seeds;
    std::string version = GROUNDREC_VERSION;

    std::string to_json() const;
    static RunManifest from_json(std::string_view text);
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/// `<artifact>.manifest.json` beside the artifact.
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

/// Writes bytes exactly (binary mode); throws DataError on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace groundrec
