#include <doctest.h>

#include <bclearer/collect.hpp>
#include <bclearer/load.hpp>

#include <string>
#include <vector>

#include "temp_dir.hpp"

using namespace bclearer;

namespace {

struct LoadHarness {
    TempDir dir{"load"};
    UnifiedGraph graph;
    ProvenanceStore store;
    RunId run = make_run_id(ContentId::of("cfg"), {});

    Snapshot snap(const std::string& name, const std::string& bytes) {
        write_file_bytes(dir.path() / name, bytes);
        return collect(dir.path() / name, 4, dir.path() / "store", name);
    }

    std::string bytes_of(const Snapshot& s) {
        return read_snapshot_bytes(dir.path() / "store", s);
    }
};

TableSpec csv_spec(const std::string& name) {
    TableSpec spec;
    spec.name = name;
    spec.format = TableFormat::Csv;
    spec.has_header = true;
    return spec;
}

// Reference splitter for the padding test: naive split on '\n' then on the
// delimiter, no quoting (the fixture text has none).
std::vector<std::vector<std::string>> reference_split(const std::string& text, char delim) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    auto flush_line = [&] {
        std::vector<std::string> fields;
        std::string f;
        for (char c : line) {
            if (c == delim) {
                fields.push_back(f);
                f.clear();
            } else {
                f += c;
            }
        }
        fields.push_back(f);
        rows.push_back(fields);
        line.clear();
    };
    for (char c : text) {
        if (c == '\n') flush_line();
        else line += c;
    }
    if (!line.empty()) flush_line();
    return rows;
}

}  // namespace

TEST_CASE("csv parser handles quoting") {
    auto rows = csv::parse("a,b\n\"1,5\",\"say \"\"hi\"\"\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "1,5");
    CHECK(rows[1][1] == "say \"hi\"");
    auto crlf = csv::parse("a,b\r\n1,2\r\n");
    REQUIRE(crlf.size() == 2);
    CHECK(crlf[1] == std::vector<std::string>{"1", "2"});
    // Quoted fields may span lines.
    auto multiline = csv::parse("\"two\nlines\",x\n");
    REQUIRE(multiline.size() == 1);
    CHECK(multiline[0][0] == "two\nlines");
}

TEST_CASE("csv writer round-trips through the parser") {
    std::vector<std::vector<std::string>> records{
        {"plain", "with,comma", "with\"quote"},
        {"multi\nline", "", "end"},
        {"\"", ",", "\r\n"},
        {"caf\xC3\xA9", "  padded  ", "a\"\"b"},
    };
    std::string text = csv::write(records);
    CHECK(csv::parse(text) == records);

    // Tab-delimited round-trip with the same quoting rules.
    std::string tsv = csv::write(records, '\t');
    CHECK(csv::parse(tsv, '\t') == records);
}

TEST_CASE("csv parser flushes a final record without a trailing newline") {
    auto rows = csv::parse("a,b\n1,2");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == std::vector<std::string>{"1", "2"});
}

TEST_CASE("load_table counts structure") {
    LoadHarness h;
    Snapshot s = h.snap("t.csv", "a,b\n1,2\n");
    LoadedSource src =
        load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("t"), "SYS", h.run);

    CHECK(src.columns.size() == 2);
    CHECK(src.rows.size() == 1);
    CHECK(src.cells.size() == 1);
    CHECK(src.cells[0].size() == 2);
    // 1 dataset + 1 table + 2 columns + 1 row + 2 cells.
    CHECK(h.graph.elements().size() == 7);
    CHECK(h.graph.element(src.cells[0][0]).payload == "1");
    CHECK(h.graph.element(src.cells[0][0]).parents ==
          std::vector<ContentId>{src.rows[0], src.columns[0]});
    CHECK(h.graph.generality(src.table) == Generality::Schema);
    CHECK(h.graph.generality(src.cells[0][1]) == Generality::Data);
}

TEST_CASE("loading the same csv twice is idempotent") {
    LoadHarness h;
    Snapshot s = h.snap("t.csv", "a,b\n1,2\n3,4\n");
    LoadedSource first =
        load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("t"), "SYS", h.run);
    std::size_t count = h.graph.elements().size();
    LoadedSource second =
        load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("t"), "SYS", h.run);
    CHECK(first.table == second.table);
    CHECK(first.columns == second.columns);
    CHECK(first.rows == second.rows);
    CHECK(h.graph.elements().size() == count);
}

TEST_CASE("duplicate row contents stay distinct via the ordinal payload") {
    LoadHarness h;
    Snapshot s = h.snap("dup.csv", "a,b\n1,2\n1,2\n");
    LoadedSource src =
        load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("dup"), "SYS", h.run);
    REQUIRE(src.rows.size() == 2);
    CHECK(src.rows[0] != src.rows[1]);
    CHECK(h.graph.element(src.rows[0]).payload == "0");
    CHECK(h.graph.element(src.rows[1]).payload == "1");
}

TEST_CASE("ragged rows are an error naming the file row ordinal") {
    LoadHarness h;
    Snapshot s = h.snap("ragged.csv", "a,b\n1,2,3\n");
    CHECK_THROWS_AS(
        load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("ragged"), "SYS", h.run),
        Error);
    try {
        UnifiedGraph g2;
        ProvenanceStore p2;
        load_table(g2, p2, s, h.bytes_of(s), csv_spec("ragged"), "SYS", h.run);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RaggedRow);
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("invalid utf-8 is an encoding error") {
    LoadHarness h;
    Snapshot s = h.snap("bad.csv", std::string("a,b\n\xFF\xFE,2\n"));
    CHECK_THROWS_AS(
        load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("bad"), "SYS", h.run), Error);
}

TEST_CASE("every loaded element is provenance-reachable from the snapshot") {
    LoadHarness h;
    Snapshot s = h.snap("t.csv", "a,b\n1,2\n3,4\n");
    load_table(h.graph, h.store, s, h.bytes_of(s), csv_spec("t"), "SYS", h.run);

    std::set<ContentId> chunk_ids;
    for (const SnapshotChunk& c : s.chunks) chunk_ids.insert(c.hash);
    for (const auto& [id, e] : h.graph.elements()) {
        auto ancestry = h.store.trace_back(id);
        bool reaches_chunk = false;
        for (std::size_t i : ancestry) {
            for (const ContentId& src : h.store.edge(i).sources)
                if (chunk_ids.count(src)) reaches_chunk = true;
        }
        CHECK(reaches_chunk);
    }
}

TEST_CASE("load_delimited_text") {
    LoadHarness h;
    SUBCASE("single row with pipe delimiter") {
        Snapshot s = h.snap("p.txt", "x|y\n");
        LoadedSource src =
            load_delimited_text(h.graph, h.store, s, h.bytes_of(s), '|', "SYS", h.run, "p");
        CHECK(src.rows.size() == 1);
        REQUIRE(src.columns.size() == 2);
        CHECK(h.graph.element(src.columns[0]).payload == "c0");
        CHECK(h.graph.element(src.columns[1]).payload == "c1");
    }
    SUBCASE("empty text gives a table with zero rows") {
        Snapshot s = h.snap("empty.txt", "");
        LoadedSource src =
            load_delimited_text(h.graph, h.store, s, h.bytes_of(s), '|', "SYS", h.run, "empty");
        CHECK(src.rows.empty());
        CHECK(src.columns.empty());
    }
    SUBCASE("mixed-width lines pad to the widest line") {
        std::string text = "a|b|c\nd\ne|f\n";
        Snapshot s = h.snap("mixed.txt", text);
        LoadedSource src =
            load_delimited_text(h.graph, h.store, s, h.bytes_of(s), '|', "SYS", h.run, "mixed");

        auto expected = reference_split(text, '|');
        std::size_t width = 0;
        for (const auto& row : expected) width = std::max(width, row.size());
        REQUIRE(src.columns.size() == width);
        REQUIRE(src.rows.size() == expected.size());
        std::size_t padded = 0;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            for (std::size_t j = 0; j < width; ++j) {
                std::string want = j < expected[i].size() ? expected[i][j] : "";
                if (j >= expected[i].size()) ++padded;
                CHECK(h.graph.element(src.cells[i][j]).payload == want);
            }
        }
        // Each padding cell carries its own derived edge.
        std::size_t pad_edges = 0;
        for (const TraceEdge& e : h.store.edges())
            if (e.transform.find(":pad:") != std::string::npos) ++pad_edges;
        CHECK(pad_edges == padded);
    }
}
