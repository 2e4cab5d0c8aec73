#include <doctest.h>

#include <bclearer/collect.hpp>

#include <fstream>

#include "temp_dir.hpp"

using namespace bclearer;

TEST_CASE("empty file snapshots as one empty chunk") {
    TempDir dir("collect_empty");
    write_file_bytes(dir.path() / "empty.bin", "");
    Snapshot snap = collect(dir.path() / "empty.bin", 4, dir.path() / "store");

    REQUIRE(snap.chunks.size() == 1);
    CHECK(snap.chunks[0].len == 0);
    // Chunk hash is the well-known empty digest; the snapshot id is the hash
    // of the (one-element) chunk-hash list.
    CHECK(snap.chunks[0].hash.hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(snap.id == ContentId::of(snap.chunks[0].hash.hex() + "\n"));
}

TEST_CASE("chunking arithmetic and round-trip") {
    TempDir dir("collect_chunks");
    write_file_bytes(dir.path() / "ten.bin", "0123456789");
    Snapshot snap = collect(dir.path() / "ten.bin", 4, dir.path() / "store");
    REQUIRE(snap.chunks.size() == 3);
    CHECK(snap.chunks[0].len == 4);
    CHECK(snap.chunks[1].len == 4);
    CHECK(snap.chunks[2].len == 2);
    CHECK(read_snapshot_bytes(dir.path() / "store", snap) == "0123456789");
}

TEST_CASE("collect is deterministic") {
    TempDir dir("collect_det");
    write_file_bytes(dir.path() / "a.bin", "same content");
    write_file_bytes(dir.path() / "b.bin", "same content");
    Snapshot s1 = collect(dir.path() / "a.bin", 4, dir.path() / "store", "same");
    Snapshot s2 = collect(dir.path() / "b.bin", 4, dir.path() / "store2", "same");
    CHECK(s1.id == s2.id);
    // Different chunk size changes the identity.
    Snapshot s3 = collect(dir.path() / "a.bin", 5, dir.path() / "store3", "same");
    CHECK(s1.id != s3.id);
}

TEST_CASE("zero chunk size is rejected") {
    TempDir dir("collect_zero");
    write_file_bytes(dir.path() / "x.bin", "x");
    CHECK_THROWS_AS(collect(dir.path() / "x.bin", 0, dir.path() / "store"), Error);
    try {
        collect(dir.path() / "x.bin", 0, dir.path() / "store");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroChunkSize);
    }
}

TEST_CASE("manifest uses the exact key names") {
    TempDir dir("collect_manifest");
    write_file_bytes(dir.path() / "m.bin", "manifest me");
    Snapshot snap = collect(dir.path() / "m.bin", 4, dir.path() / "store");
    nlohmann::json j = nlohmann::json::parse(
        read_file_bytes(dir.path() / "store" / snap.id.hex() / "manifest.json"));
    CHECK(j.contains("id"));
    CHECK(j.contains("source"));
    CHECK(j.contains("chunk_size"));
    CHECK(j.contains("chunks"));
    CHECK(j["chunks"][0].contains("hash"));
    CHECK(j["chunks"][0].contains("len"));
    Snapshot back = snapshot_from_manifest(j);
    CHECK(back.id == snap.id);
    CHECK(back.chunk_size == 4);
}

TEST_CASE("verify passes on an untouched snapshot") {
    TempDir dir("collect_verify");
    write_file_bytes(dir.path() / "v.bin", "verify me please");
    Snapshot snap = collect(dir.path() / "v.bin", 4, dir.path() / "store");
    SnapshotVerification check = verify_snapshot(dir.path() / "store", snap);
    CHECK(check.ok);
    CHECK(check.failures.empty());
}

TEST_CASE("a single flipped byte fails verification naming the chunk") {
    TempDir dir("collect_flip");
    write_file_bytes(dir.path() / "f.bin", "0123456789abcdef");
    Snapshot snap = collect(dir.path() / "f.bin", 4, dir.path() / "store");

    // Flip one byte in chunk 2.
    fs::path chunk2 = dir.path() / "store" / snap.id.hex() / "2.bin";
    std::string bytes = read_file_bytes(chunk2);
    bytes[0] ^= 0x01;
    write_file_bytes(chunk2, bytes);

    SnapshotVerification check = verify_snapshot(dir.path() / "store", snap);
    CHECK_FALSE(check.ok);
    REQUIRE_FALSE(check.failures.empty());
    CHECK(check.failures[0].find("chunk 2") != std::string::npos);
    // The recorded expectation matches an independent recomputation.
    CHECK(check.failures[0].find(ContentId::of("89ab").hex()) != std::string::npos);
}

TEST_CASE("a deleted chunk raises MissingChunk") {
    TempDir dir("collect_missing");
    write_file_bytes(dir.path() / "d.bin", "0123456789");
    Snapshot snap = collect(dir.path() / "d.bin", 4, dir.path() / "store");
    fs::remove(dir.path() / "store" / snap.id.hex() / "1.bin");
    CHECK_THROWS_AS(verify_snapshot(dir.path() / "store", snap), Error);
    try {
        verify_snapshot(dir.path() / "store", snap);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingChunk);
    }
}
