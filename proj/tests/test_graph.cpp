#include <doctest.h>

#include <bclearer/graph.hpp>
#include <bclearer/graph_io.hpp>

#include <string>

using namespace bclearer;

namespace {

// Independent reference for the canonical element encoding: plain string
// concatenation, written without looking at canonical_serialize.
std::string reference_concat(const std::string& kind, const std::vector<ContentId>& parents,
                             const std::string& payload) {
    std::string out;
    out.append("v1");
    out.push_back('|');
    out.append(kind);
    out.push_back('|');
    bool first = true;
    for (const ContentId& p : parents) {
        if (!first) out.push_back(',');
        out.append(p.hex());
        first = false;
    }
    out.push_back('|');
    out.append(payload);
    return out;
}

}  // namespace

TEST_CASE("canonical_serialize matches the reference concatenator") {
    CHECK(canonical_serialize(ElementKind::Value, {}, "") == "v1|Value||");
    CHECK(canonical_serialize(ElementKind::Value, {}, "100.00") == "v1|Value||100.00");

    ContentId row = ContentId::of("some row");
    ContentId col = ContentId::of("some column");
    CHECK(canonical_serialize(ElementKind::Cell, {row, col}, "Sales") ==
          reference_concat("Cell", {row, col}, "Sales"));
    CHECK(canonical_serialize(ElementKind::Cell, {row, col}, "pipe|in|payload") ==
          reference_concat("Cell", {row, col}, "pipe|in|payload"));
    CHECK_THROWS_AS(canonical_serialize(ElementKind::Value, {}, "\xFF"), Error);
}

TEST_CASE("element ids are the oracle hash of canonical bytes") {
    // Digests frozen from the independent SHA-256 oracle.
    CHECK(element_id(ElementKind::Value, {}, "").hex() ==
          "b157f69c98be8a63e0b2777e96e439ed6f8c59b1490f7989548e22f8e92dc5ea");
    CHECK(element_id(ElementKind::Value, {}, "100.00").hex() ==
          "5d7a6de58703dcd001952d2851fee8bfab26b3c7ef8726e811718e2e8cb428af");
}

TEST_CASE("add_element is idempotent and checks parents") {
    UnifiedGraph g;
    ContentId v1 = g.add_element(ElementKind::Value, {}, "100.00");
    std::size_t count = g.elements().size();
    ContentId v2 = g.add_element(ElementKind::Value, {}, "100.00");
    CHECK(v1 == v2);
    CHECK(g.elements().size() == count);

    ContentId unknown = ContentId::of("never inserted");
    CHECK_THROWS_AS(g.add_element(ElementKind::Cell, {unknown}, "x"), Error);
    try {
        g.add_element(ElementKind::Cell, {unknown}, "x");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DanglingReference);
    }
}

TEST_CASE("containment parents are recorded in order") {
    UnifiedGraph g;
    ContentId ds = g.add_element(ElementKind::Dataset, {}, "SYS");
    ContentId table = g.add_element(ElementKind::Table, {ds}, "t");
    ContentId col = g.add_element(ElementKind::Column, {table}, "c0");
    CHECK(g.element(col).parents == std::vector<ContentId>{table});
    CHECK(g.children_of(table) == std::vector<ContentId>{col});
}

TEST_CASE("add_triple is idempotent and validates endpoints") {
    UnifiedGraph g;
    ContentId rel = g.add_element(ElementKind::RelationType, {}, "likes");
    ContentId a = g.add_element(ElementKind::Value, {}, "a");
    ContentId b = g.add_element(ElementKind::Value, {}, "b");

    ContentId t1 = g.add_triple(rel, a, b);
    ContentId t2 = g.add_triple(rel, a, b);
    CHECK(t1 == t2);
    CHECK(g.triples().size() == 1);

    CHECK_THROWS_AS(g.add_triple(rel, a, ContentId::of("ghost")), Error);
    // Predicate must be a RelationType.
    CHECK_THROWS_AS(g.add_triple(a, rel, b), Error);
    CHECK(g.triples_with_subject(a) == std::vector<ContentId>{t1});
}

TEST_CASE("subtypeOf cycles are rejected") {
    UnifiedGraph g;
    g.add_element(ElementKind::RelationType, {}, "boro:subtypeOf");
    ContentId a = g.add_element(ElementKind::TypeNode, {}, "A");
    ContentId b = g.add_element(ElementKind::TypeNode, {}, "B");
    ContentId c = g.add_element(ElementKind::TypeNode, {}, "C");

    g.add_triple(wellknown::subtype_of(), a, b);
    CHECK_THROWS_AS(g.add_triple(wellknown::subtype_of(), b, a), Error);
    try {
        g.add_triple(wellknown::subtype_of(), b, a);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SubtypeCycle);
    }
    g.add_triple(wellknown::subtype_of(), b, c);
    CHECK_THROWS_AS(g.add_triple(wellknown::subtype_of(), c, a), Error);  // 3-cycle
    CHECK_THROWS_AS(g.add_triple(wellknown::subtype_of(), a, a), Error);  // self-loop
    // instanceOf between the same nodes is not constrained.
    g.add_element(ElementKind::RelationType, {}, "boro:instanceOf");
    g.add_triple(wellknown::instance_of(), b, a);
}

TEST_CASE("full-graph identity audit") {
    UnifiedGraph g;
    ContentId ds = g.add_element(ElementKind::Dataset, {}, "SYS");
    ContentId table = g.add_element(ElementKind::Table, {ds}, "t");
    g.add_element(ElementKind::Column, {table}, "c0");
    ContentId rel = g.add_element(ElementKind::RelationType, {}, "r");
    g.add_triple(rel, table, ds);
    CHECK(g.audit_identities().empty());
}

TEST_CASE("export_dot") {
    UnifiedGraph g;
    CHECK(g.export_dot() == "digraph g {\n}\n");

    ContentId rel = g.add_element(ElementKind::RelationType, {}, "debit");
    ContentId a = g.add_element(ElementKind::Value, {}, "txn1");
    ContentId b = g.add_element(ElementKind::Value, {}, "AcmeCo");
    g.add_triple(rel, a, b);

    std::string dot = g.export_dot();
    // Two nodes, one labelled edge; the predicate renders as the edge label.
    CHECK(dot.find("label=\"Value:" + a.short_hex() + ":txn1\"") != std::string::npos);
    CHECK(dot.find("label=\"Value:" + b.short_hex() + ":AcmeCo\"") != std::string::npos);
    CHECK(dot.find("-> \"" + b.hex() + "\" [label=\"debit\"]") != std::string::npos);
    CHECK(dot == g.export_dot());  // byte-identical on re-export

    // Scope filter: excluding Value kills the edge and both nodes.
    UnifiedGraph::DotScope scope;
    scope.kinds = {ElementKind::RelationType};
    CHECK(g.export_dot(scope) == "digraph g {\n}\n");
}

TEST_CASE("triples export format") {
    UnifiedGraph g;
    CHECK(g.export_triples().empty());
    ContentId rel = g.add_element(ElementKind::RelationType, {}, "r");
    ContentId a = g.add_element(ElementKind::Value, {}, "a");
    ContentId b = g.add_element(ElementKind::Value, {}, "b");
    g.add_triple(rel, a, b);
    g.add_triple(rel, b, a);
    std::string out = g.export_triples();
    // One line per triple: predHex \t subjHex \t objHex, sorted, trailing LF.
    CHECK(out.back() == '\n');
    std::string l1 = rel.hex() + "\t" + a.hex() + "\t" + b.hex();
    std::string l2 = rel.hex() + "\t" + b.hex() + "\t" + a.hex();
    std::string expected = l1 < l2 ? l1 + "\n" + l2 + "\n" : l2 + "\n" + l1 + "\n";
    CHECK(out == expected);
}

TEST_CASE("superseded items leave the active view but stay in the graph") {
    UnifiedGraph g;
    ContentId v = g.add_element(ElementKind::Value, {}, "x");
    CHECK(g.is_active(v));
    g.supersede(v);
    CHECK(g.has_element(v));
    CHECK_FALSE(g.is_active(v));
}

TEST_CASE("graph hash equality tracks the id sets") {
    UnifiedGraph a, b;
    a.add_element(ElementKind::Value, {}, "x");
    b.add_element(ElementKind::Value, {}, "x");
    CHECK(a.content_hash() == b.content_hash());
    b.add_element(ElementKind::Value, {}, "y");
    CHECK(a.content_hash() != b.content_hash());
}

TEST_CASE("exports depend on content, not insertion order") {
    auto build = [](bool reversed) {
        UnifiedGraph g;
        ContentId rel = g.add_element(ElementKind::RelationType, {}, "r");
        std::vector<std::string> payloads{"alpha", "beta", "gamma", "delta"};
        if (reversed) std::reverse(payloads.begin(), payloads.end());
        std::vector<ContentId> values;
        for (const std::string& p : payloads)
            values.push_back(g.add_element(ElementKind::Value, {}, p));
        std::sort(values.begin(), values.end());
        if (reversed) {
            for (std::size_t i = values.size() - 1; i > 0; --i)
                g.add_triple(rel, values[i - 1], values[i]);
        } else {
            for (std::size_t i = 1; i < values.size(); ++i)
                g.add_triple(rel, values[i - 1], values[i]);
        }
        return g;
    };
    UnifiedGraph a = build(false);
    UnifiedGraph b = build(true);
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.export_dot() == b.export_dot());
    CHECK(a.export_triples() == b.export_triples());
}

TEST_CASE("graph json round-trip") {
    UnifiedGraph g;
    ContentId ds = g.add_element(ElementKind::Dataset, {}, "SYS", "origin text");
    ContentId table = g.add_element(ElementKind::Table, {ds}, "t");
    ContentId rel = g.add_element(ElementKind::RelationType, {}, "r");
    g.add_triple(rel, table, ds);
    g.supersede(table);
    g.set_generality(ds, Generality::Metadata);

    nlohmann::ordered_json j = graph_to_json(g);
    UnifiedGraph back = graph_from_json(j);
    CHECK(back.content_hash() == g.content_hash());
    CHECK(back.is_superseded(table));
    CHECK(back.element(ds).origin == "origin text");
    CHECK(back.generality(ds) == Generality::Metadata);
    CHECK(graph_to_json(back).dump() == j.dump());
}
