#ifndef BCLEARER_GRAPH_IO_HPP
#define BCLEARER_GRAPH_IO_HPP

#include <functional>
#include <map>

#include <json.hpp>

#include "errors.hpp"
#include "graph.hpp"

namespace bclearer {

// Deterministic JSON persistence for graphs. Ids are stored for verification
// but always recomputable from the canonical fields.
inline nlohmann::ordered_json graph_to_json(const UnifiedGraph& graph) {
    nlohmann::ordered_json elements = nlohmann::ordered_json::array();
    for (const auto& [id, e] : graph.elements()) {
        nlohmann::ordered_json parents = nlohmann::ordered_json::array();
        for (const ContentId& p : e.parents) parents.push_back(p.hex());
        elements.push_back({{"id", id.hex()},
                            {"kind", kind_name(e.kind)},
                            {"parents", parents},
                            {"payload", e.payload},
                            {"origin", e.origin}});
    }
    nlohmann::ordered_json triples = nlohmann::ordered_json::array();
    for (const auto& [id, t] : graph.triples()) {
        triples.push_back({t.predicate.hex(), t.subject.hex(), t.object.hex()});
    }
    nlohmann::ordered_json superseded = nlohmann::ordered_json::array();
    for (const ContentId& id : graph.superseded()) superseded.push_back(id.hex());
    nlohmann::ordered_json generality = nlohmann::ordered_json::array();
    for (const auto& [id, g] : graph.generality_tags()) {
        generality.push_back({id.hex(), generality_name(g)});
    }
    return nlohmann::ordered_json{{"elements", elements},
                                  {"triples", triples},
                                  {"superseded", superseded},
                                  {"generality", generality}};
}

inline UnifiedGraph graph_from_json(const nlohmann::json& j) {
    struct Pending {
        ElementKind kind;
        std::vector<ContentId> parents;
        std::string payload;
        std::string origin;
    };
    std::map<ContentId, Pending> pending;
    for (const auto& e : j.at("elements")) {
        Pending p;
        auto kind = kind_from_name(e.at("kind").get<std::string>());
        if (!kind) raise(ErrorCode::EncodingError, "unknown element kind in graph file");
        p.kind = *kind;
        for (const auto& parent : e.at("parents"))
            p.parents.push_back(ContentId::parse_hex(parent.get<std::string>()));
        p.payload = e.at("payload").get<std::string>();
        p.origin = e.at("origin").get<std::string>();
        ContentId id = ContentId::parse_hex(e.at("id").get<std::string>());
        if (element_id(p.kind, p.parents, p.payload) != id)
            raise(ErrorCode::EncodingError, "element " + id.hex() + " fails identity audit");
        pending.emplace(id, std::move(p));
    }

    UnifiedGraph graph;
    std::function<void(const ContentId&)> insert = [&](const ContentId& id) {
        if (graph.has_element(id)) return;
        auto it = pending.find(id);
        if (it == pending.end())
            raise(ErrorCode::DanglingReference, "graph file references missing " + id.hex());
        for (const ContentId& p : it->second.parents) insert(p);
        graph.add_element(it->second.kind, it->second.parents, it->second.payload,
                          it->second.origin);
    };
    for (const auto& [id, p] : pending) insert(id);

    for (const auto& t : j.at("triples")) {
        graph.add_triple(ContentId::parse_hex(t.at(0).get<std::string>()),
                         ContentId::parse_hex(t.at(1).get<std::string>()),
                         ContentId::parse_hex(t.at(2).get<std::string>()));
    }
    for (const auto& s : j.at("superseded"))
        graph.supersede(ContentId::parse_hex(s.get<std::string>()));
    for (const auto& g : j.at("generality")) {
        ContentId id = ContentId::parse_hex(g.at(0).get<std::string>());
        std::string name = g.at(1).get<std::string>();
        Generality gen = name == "metadata" ? Generality::Metadata
                         : name == "schema" ? Generality::Schema
                                            : Generality::Data;
        graph.set_generality(id, gen);
    }
    return graph;
}

}  // namespace bclearer

#endif
