#include <doctest.h>

#include <bclearer/provenance.hpp>

#include <set>
#include <string>

using namespace bclearer;

namespace {

ContentId cid(const std::string& s) { return ContentId::of(s); }

RunId test_run() { return make_run_id(cid("config"), {cid("snap")}); }

// Brute-force reverse reachability, independent of the store's index-based
// traversal: fixpoint over "edges whose targets intersect the known set".
std::set<std::size_t> brute_force_back(const ProvenanceStore& store, const ContentId& item) {
    std::set<ContentId> known{item};
    std::set<std::size_t> edges;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < store.size(); ++i) {
            if (edges.count(i)) continue;
            const TraceEdge& e = store.edge(i);
            bool hits = false;
            for (const ContentId& t : e.targets)
                if (known.count(t)) hits = true;
            if (!hits) continue;
            edges.insert(i);
            for (const ContentId& s : e.sources) known.insert(s);
            changed = true;
        }
    }
    return edges;
}

std::set<std::size_t> brute_force_forward(const ProvenanceStore& store, const ContentId& item) {
    std::set<ContentId> known{item};
    std::set<std::size_t> edges;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < store.size(); ++i) {
            if (edges.count(i)) continue;
            const TraceEdge& e = store.edge(i);
            bool hits = false;
            for (const ContentId& s : e.sources)
                if (known.count(s)) hits = true;
            if (!hits) continue;
            edges.insert(i);
            for (const ContentId& t : e.targets) known.insert(t);
            changed = true;
        }
    }
    return edges;
}

// Fixture: chunk -> {cellA, cellB, rowX}; cellA -> cleanedA; {cleanedA, cellB}
// -> merged; rowX -> dropped branch.
struct Fixture {
    ProvenanceStore store;
    ContentId chunk = cid("chunk");
    ContentId cellA = cid("cellA");
    ContentId cellB = cid("cellB");
    ContentId rowX = cid("rowX");
    ContentId cleanedA = cid("cleanedA");
    ContentId merged = cid("merged");
    ContentId seedCat = cid("seed");

    Fixture() {
        RunId run = test_run();
        store.record_trace({chunk}, {cellA, cellB, rowX}, "load", run, TraceKind::Derived);
        store.record_trace({cellA}, {cleanedA}, "clean", run, TraceKind::Cleaned);
        store.record_trace({cleanedA, cellB}, {merged}, "merge", run, TraceKind::Merged);
        store.record_trace({}, {seedCat}, "seed", run, TraceKind::Seeded);
    }
};

}  // namespace

TEST_CASE("run ids derive from config and inputs, not the clock") {
    RunId a = make_run_id(cid("config"), {cid("s1"), cid("s2")});
    RunId b = make_run_id(cid("config"), {cid("s2"), cid("s1")});  // order-insensitive
    CHECK(a == b);
    CHECK(a != make_run_id(cid("config2"), {cid("s1"), cid("s2")}));
    CHECK(a != make_run_id(cid("config"), {cid("s1")}));
}

TEST_CASE("record_trace endpoint rules") {
    ProvenanceStore store;
    RunId run = test_run();
    CHECK_THROWS_AS(store.record_trace({}, {cid("t")}, "x", run, TraceKind::Derived), Error);
    try {
        store.record_trace({}, {cid("t")}, "x", run, TraceKind::Cleaned);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyEndpoint);
    }
    CHECK_THROWS_AS(store.record_trace({cid("s")}, {}, "x", run, TraceKind::Derived), Error);
    // Seeded edges may have empty sources.
    std::size_t idx = store.record_trace({}, {cid("boroType")}, "seed", run, TraceKind::Seeded);
    CHECK(idx == 0);
    CHECK(store.size() == 1);
}

TEST_CASE("trace_back matches the brute-force oracle") {
    Fixture f;
    CHECK(std::set<std::size_t>(f.store.trace_back(f.chunk).begin(),
                                f.store.trace_back(f.chunk).end()) ==
          brute_force_back(f.store, f.chunk));
    CHECK(f.store.trace_back(f.chunk).empty());  // collect roots have no ancestry

    auto merged_back = f.store.trace_back(f.merged);
    CHECK(std::set<std::size_t>(merged_back.begin(), merged_back.end()) ==
          brute_force_back(f.store, f.merged));
    // Both source transactions and their lineage are present.
    CHECK(merged_back.size() == 3);

    CHECK(f.store.trace_back(cid("unknown")).empty());
}

TEST_CASE("track_forward matches the brute-force oracle") {
    Fixture f;
    auto fwd = f.store.track_forward(f.cellA);
    CHECK(std::set<std::size_t>(fwd.begin(), fwd.end()) == brute_force_forward(f.store, f.cellA));
    CHECK(fwd.size() == 2);  // clean edge + merge edge

    CHECK(f.store.track_forward(f.merged).empty());  // final item
    // Dead branch: rowX only appears in the load edge.
    auto drop = f.store.track_forward(f.rowX);
    CHECK(drop.empty());
    CHECK(std::set<std::size_t>(drop.begin(), drop.end()) == brute_force_forward(f.store, f.rowX));
}

TEST_CASE("resolve_alias follows rename/merge chains") {
    ProvenanceStore store;
    RunId run = test_run();
    ContentId c0 = cid("col v0"), c1 = cid("col v1"), c2 = cid("col v2");
    CHECK(store.resolve_alias(c0) == c0);  // fixed point without edges

    store.record_trace({c0}, {c1}, "rename1", run, TraceKind::Renamed);
    store.record_trace({c1}, {c2}, "rename2", run, TraceKind::Renamed);
    CHECK(store.resolve_alias(c0) == c2);
    CHECK(store.resolve_alias(store.resolve_alias(c0)) == store.resolve_alias(c0));

    // Cleaned edges do not participate in alias resolution.
    ContentId cell = cid("cell"), cleaned = cid("cleaned cell");
    store.record_trace({cell}, {cleaned}, "clean", run, TraceKind::Cleaned);
    CHECK(store.resolve_alias(cell) == cell);
}

TEST_CASE("two distinct rename successors are ambiguous") {
    ProvenanceStore store;
    RunId run = test_run();
    ContentId src = cid("src");
    store.record_trace({src}, {cid("m1")}, "merge", run, TraceKind::Merged);
    store.record_trace({src}, {cid("m2")}, "merge", run, TraceKind::Merged);
    CHECK_THROWS_AS((void)store.resolve_alias(src), Error);
    try {
        (void)store.resolve_alias(src);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AmbiguousAlias);
    }
}

TEST_CASE("topological order exists iff the edge set is a DAG") {
    Fixture f;
    CHECK(f.store.is_dag());
    auto order = f.store.topological_order();
    REQUIRE(order.has_value());
    // Every edge goes forward in the order.
    std::map<ContentId, std::size_t> pos;
    for (std::size_t i = 0; i < order->size(); ++i) pos[(*order)[i]] = i;
    for (const TraceEdge& e : f.store.edges()) {
        for (const ContentId& s : e.sources)
            for (const ContentId& t : e.targets) CHECK(pos.at(s) < pos.at(t));
    }

    ProvenanceStore cyclic;
    RunId run = test_run();
    cyclic.record_trace({cid("a")}, {cid("b")}, "x", run, TraceKind::Derived);
    cyclic.record_trace({cid("b")}, {cid("a")}, "y", run, TraceKind::Derived);
    CHECK_FALSE(cyclic.is_dag());
}

TEST_CASE("ontogenic tree export") {
    Fixture f;
    std::string root_only = f.store.export_ontogenic_tree(
        f.chunk, ProvenanceStore::Direction::Backward);
    CHECK(root_only == "digraph ontogeny {\n  \"" + f.chunk.hex() + "\" [label=\"" +
                           f.chunk.short_hex() + "\"];\n}\n");

    std::string merged_tree =
        f.store.export_ontogenic_tree(f.merged, ProvenanceStore::Direction::Backward);
    CHECK(merged_tree.find("merge (merged)") != std::string::npos);
    CHECK(merged_tree.find(f.cleanedA.hex()) != std::string::npos);
    CHECK(merged_tree.find(f.cellB.hex()) != std::string::npos);
    CHECK(merged_tree ==
          f.store.export_ontogenic_tree(f.merged, ProvenanceStore::Direction::Backward));
}

TEST_CASE("log serialization escapes framing characters in transforms") {
    ProvenanceStore store;
    store.record_trace({cid("a")}, {cid("b")}, "load:evil\tname\nwith\\slash", test_run(),
                       TraceKind::Derived);
    std::string log = store.serialize_log();
    // The log stays one record per line with five tab-separated fields.
    CHECK(std::count(log.begin(), log.end(), '\n') == 1);
    CHECK(std::count(log.begin(), log.end(), '\t') == 4);
    ProvenanceStore back = ProvenanceStore::parse_log(log);
    CHECK(back.edge(0).transform == "load:evil\tname\nwith\\slash");
}

TEST_CASE("log serialization round-trips and preserves append order") {
    Fixture f;
    std::string log = f.store.serialize_log();
    CHECK(log.find("derived\tload\t") == 0);
    ProvenanceStore back = ProvenanceStore::parse_log(log);
    CHECK(back.size() == f.store.size());
    CHECK(back.serialize_log() == log);
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back.edge(i).transform == f.store.edge(i).transform);
        CHECK(back.edge(i).kind == f.store.edge(i).kind);
        CHECK(back.edge(i).sources == f.store.edge(i).sources);
        CHECK(back.edge(i).targets == f.store.edge(i).targets);
    }
}
