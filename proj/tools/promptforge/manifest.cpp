#include "manifest.hpp"

#include "promptforge/core/errors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace promptforge::cli {

using nlohmann::json;

namespace {

std::string iso8601(std::chrono::system_clock::time_point tp) {
    auto t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::chrono::system_clock::time_point parse_iso8601(const std::string& text) {
    std::tm tm{};
    std::istringstream in(text);
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    if (in.fail()) throw DataError("bad timestamp '" + text + "'");
    return std::chrono::system_clock::from_time_t(timegm(&tm));
}

} // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

std::string to_json(const RunManifest& m) {
    json doc = {
        {"command", m.command},
        {"argv", m.argv},
        {"config", m.config_snapshot},
        {"seeds", m.seeds},
        {"backend", {{"kind", m.backend_kind}, {"engine", m.engine}}},
        {"input_digests", m.input_digests},
        {"outputs", m.outputs},
        {"started_at", iso8601(m.started_at)},
        {"finished_at", iso8601(m.finished_at)},
        {"call_count", m.call_count},
        {"status", m.succeeded ? "ok" : "failed"},
    };
    if (m.failure) doc["failure"] = *m.failure;
    return doc.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    try {
        auto doc = json::parse(text);
        RunManifest m;
        m.command = doc.at("command").get<std::string>();
        m.argv = doc.at("argv").get<std::vector<std::string>>();
        m.config_snapshot = doc.at("config").get<std::string>();
        m.seeds = doc.at("seeds").get<std::map<std::string, std::uint64_t>>();
        m.backend_kind = doc.at("backend").at("kind").get<std::string>();
        m.engine = doc.at("backend").at("engine").get<std::string>();
        m.input_digests = doc.at("input_digests").get<std::map<std::string, std::string>>();
        m.outputs = doc.at("outputs").get<std::vector<std::string>>();
        m.started_at = parse_iso8601(doc.at("started_at").get<std::string>());
        m.finished_at = parse_iso8601(doc.at("finished_at").get<std::string>());
        m.call_count = doc.at("call_count").get<std::uint64_t>();
        m.succeeded = doc.at("status").get<std::string>() == "ok";
        if (doc.contains("failure")) m.failure = doc.at("failure").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto final_path = dir / kManifestName;
    const auto tmp_path = dir / (std::string(kManifestName) + ".tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp_path.string());
        out << to_json(manifest);
        out.flush();
        if (!out) throw Error("cannot write " + tmp_path.string());
    }
    std::filesystem::rename(tmp_path, final_path);
}

RunManifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / kManifestName);
    if (!in) throw Error("no manifest in " + dir.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

std::vector<std::string> changed_inputs(const RunManifest& manifest) {
    std::vector<std::string> changed;
    for (const auto& [path, digest] : manifest.input_digests) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec) || sha256_file(path) != digest) changed.push_back(path);
    }
    return changed;
}

} // namespace promptforge::cli
