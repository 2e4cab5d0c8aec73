#ifndef BCLEARER_COLLECT_HPP
#define BCLEARER_COLLECT_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "content_id.hpp"
#include "errors.hpp"

namespace bclearer {

namespace fs = std::filesystem;

struct SnapshotChunk {
    ContentId hash;
    std::uint64_t len = 0;
};

// Immutable chunked copy of one source file. The id is a pure function of the
// byte content and the chunk size; nothing is transformed at this stage.
struct Snapshot {
    ContentId id;
    std::string source;
    std::uint64_t chunk_size = 0;
    std::vector<SnapshotChunk> chunks;
};

inline ContentId snapshot_id_of(const std::vector<SnapshotChunk>& chunks) {
    Sha256 h;
    for (const SnapshotChunk& c : chunks) {
        h.update(c.hash.hex());
        h.update(std::string_view("\n"));
    }
    return ContentId(h.finish());
}

inline std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot read " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) raise(ErrorCode::IoFailure, "read failed for " + path.string());
    return data;
}

inline void write_file_bytes(const fs::path& path, std::string_view data) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) raise(ErrorCode::IoFailure, "write failed for " + path.string());
}

inline nlohmann::ordered_json snapshot_manifest(const Snapshot& snap) {
    nlohmann::ordered_json chunks = nlohmann::ordered_json::array();
    for (const SnapshotChunk& c : snap.chunks) {
        chunks.push_back({{"hash", c.hash.hex()}, {"len", c.len}});
    }
    return nlohmann::ordered_json{{"id", snap.id.hex()},
                                  {"source", snap.source},
                                  {"chunk_size", snap.chunk_size},
                                  {"chunks", chunks}};
}

inline Snapshot snapshot_from_manifest(const nlohmann::json& j) {
    Snapshot snap;
    snap.id = ContentId::parse_hex(j.at("id").get<std::string>());
    snap.source = j.at("source").get<std::string>();
    snap.chunk_size = j.at("chunk_size").get<std::uint64_t>();
    for (const auto& c : j.at("chunks")) {
        snap.chunks.push_back(SnapshotChunk{
            ContentId::parse_hex(c.at("hash").get<std::string>()),
            c.at("len").get<std::uint64_t>()});
    }
    return snap;
}

// Stores `source_file` under store_dir/<id>/<index>.bin plus manifest.json.
// An empty file still yields one (empty) chunk so that every snapshot has at
// least one content-addressed part.
inline Snapshot collect(const fs::path& source_file, std::uint64_t chunk_size,
                        const fs::path& store_dir, std::string source_name = {}) {
    if (chunk_size == 0) raise(ErrorCode::ZeroChunkSize, "chunk_size must be >= 1");
    std::string bytes = read_file_bytes(source_file);
    if (source_name.empty()) source_name = source_file.filename().string();

    Snapshot snap;
    snap.source = source_name;
    snap.chunk_size = chunk_size;
    std::vector<std::string_view> parts;
    std::string_view rest = bytes;
    do {
        std::string_view part = rest.substr(0, std::min<std::size_t>(rest.size(), chunk_size));
        parts.push_back(part);
        rest.remove_prefix(part.size());
    } while (!rest.empty());
    for (std::string_view part : parts) {
        snap.chunks.push_back(SnapshotChunk{ContentId::of(part), part.size()});
    }
    snap.id = snapshot_id_of(snap.chunks);

    // Stored bytes are immutable: a snapshot that is already persisted is
    // never rewritten, so later verification sees exactly what Collect saw.
    fs::path dir = store_dir / snap.id.hex();
    if (!fs::exists(dir / "manifest.json")) {
        fs::create_directories(dir);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            write_file_bytes(dir / (std::to_string(i) + ".bin"), parts[i]);
        }
        write_file_bytes(dir / "manifest.json", snapshot_manifest(snap).dump(2) + "\n");
    }
    return snap;
}

inline Snapshot load_snapshot_manifest(const fs::path& store_dir, const ContentId& id) {
    fs::path manifest = store_dir / id.hex() / "manifest.json";
    if (!fs::exists(manifest))
        raise(ErrorCode::IoFailure, "no manifest at " + manifest.string());
    return snapshot_from_manifest(nlohmann::json::parse(read_file_bytes(manifest)));
}

inline std::string read_snapshot_bytes(const fs::path& store_dir, const Snapshot& snap) {
    std::string bytes;
    fs::path dir = store_dir / snap.id.hex();
    for (std::size_t i = 0; i < snap.chunks.size(); ++i) {
        fs::path chunk = dir / (std::to_string(i) + ".bin");
        if (!fs::exists(chunk))
            raise(ErrorCode::MissingChunk, "chunk " + std::to_string(i) + " of " +
                                               snap.id.hex() + " is missing");
        bytes += read_file_bytes(chunk);
    }
    return bytes;
}

struct SnapshotVerification {
    bool ok = true;
    // One line per defect, naming the offending chunk.
    std::vector<std::string> failures;
};

// Re-hashes the stored bytes; passes iff every chunk hash and the root id
// still match what was recorded at Collect time.
inline SnapshotVerification verify_snapshot(const fs::path& store_dir, const Snapshot& snap) {
    SnapshotVerification result;
    fs::path dir = store_dir / snap.id.hex();
    std::vector<SnapshotChunk> rehashed;
    for (std::size_t i = 0; i < snap.chunks.size(); ++i) {
        fs::path chunk_path = dir / (std::to_string(i) + ".bin");
        if (!fs::exists(chunk_path))
            raise(ErrorCode::MissingChunk,
                  "chunk " + std::to_string(i) + " of " + snap.id.hex() + " is missing");
        std::string bytes = read_file_bytes(chunk_path);
        ContentId actual = ContentId::of(bytes);
        rehashed.push_back(SnapshotChunk{actual, bytes.size()});
        if (actual != snap.chunks[i].hash) {
            result.ok = false;
            result.failures.push_back("chunk " + std::to_string(i) + " (" +
                                      chunk_path.string() + "): expected " +
                                      snap.chunks[i].hash.hex() + " got " + actual.hex());
        }
        if (bytes.size() != snap.chunks[i].len) {
            result.ok = false;
            result.failures.push_back("chunk " + std::to_string(i) + ": length " +
                                      std::to_string(bytes.size()) + " != recorded " +
                                      std::to_string(snap.chunks[i].len));
        }
    }
    if (snapshot_id_of(rehashed) != snap.id) {
        if (result.ok) {
            result.ok = false;
            result.failures.push_back("root id mismatch for " + snap.id.hex());
        }
    }
    return result;
}

}  // namespace bclearer

#endif
