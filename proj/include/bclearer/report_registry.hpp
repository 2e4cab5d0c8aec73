#ifndef BCLEARER_REPORT_REGISTRY_HPP
#define BCLEARER_REPORT_REGISTRY_HPP

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "graph.hpp"
#include "provenance.hpp"
#include "query.hpp"

namespace bclearer {

// Holds the report queries inherited from the source systems, the rewritten
// form each one currently takes, and the signature captured at every stage.
// Queries are keyed by their as-registered (root) id; rewrites chain renamed
// edges from each query object to its successor.
class ReportRegistry {
public:
    struct Entry {
        ContentId root;
        ReportQuery current;
        std::string slice;
    };

    struct StoredSignature {
        ReportSignature signature;
        std::string figures;  // canonical figure text, kept for diffs
    };

    ContentId register_report(const UnifiedGraph& graph, const ProvenanceStore* aliases,
                              const ReportQuery& query, const std::string& slice = {}) {
        validate(graph, aliases, query);
        ContentId root = query.id();
        entries_.try_emplace(root, Entry{root, query, slice});
        return root;
    }

    bool has(const ContentId& root) const { return entries_.count(root) != 0; }

    const Entry& entry(const ContentId& root) const {
        auto it = entries_.find(root);
        if (it == entries_.end())
            raise(ErrorCode::DanglingReference, "query " + root.hex() + " is not registered");
        return it->second;
    }

    const std::map<ContentId, Entry>& entries() const { return entries_; }

    // Replaces the live form of a query, recording the rewrite as a renamed
    // edge on the query object itself.
    void rewrite(const ContentId& root, ReportQuery next, ProvenanceStore& prov,
                 const RunId& run, const std::string& transform) {
        auto it = entries_.find(root);
        if (it == entries_.end())
            raise(ErrorCode::DanglingReference, "query " + root.hex() + " is not registered");
        ContentId before = it->second.current.id();
        ContentId after = next.id();
        if (before == after) return;
        prov.record_trace({before}, {after}, transform, run, TraceKind::Renamed);
        it->second.current = std::move(next);
    }

    // Runs the query, canonically serializes the figures, hashes them, and
    // stores the signature against (query, stage).
    ReportSignature snapshot_report(const UnifiedGraph& graph, const ContentId& root,
                                    const std::string& stage,
                                    const ProvenanceStore* aliases = nullptr) {
        const Entry& e = entry(root);
        Figures figures = run_query(graph, e.current, aliases);
        ReportSignature sig = sign_figures(root, stage, figures);
        signatures_[{root, stage}] = StoredSignature{sig, figures_text(figures)};
        return sig;
    }

    const StoredSignature* signature(const ContentId& root, const std::string& stage) const {
        auto it = signatures_.find({root, stage});
        return it == signatures_.end() ? nullptr : &it->second;
    }

    const std::map<std::pair<ContentId, std::string>, StoredSignature>& signatures() const {
        return signatures_;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json queries = nlohmann::ordered_json::array();
        for (const auto& [root, e] : entries_) {
            queries.push_back({{"root", root.hex()},
                               {"slice", e.slice},
                               {"current", nlohmann::ordered_json::parse(
                                               e.current.canonical_json())}});
        }
        nlohmann::ordered_json sigs = nlohmann::ordered_json::array();
        for (const auto& [key, stored] : signatures_) {
            sigs.push_back({{"query", key.first.hex()},
                            {"stage", key.second},
                            {"hash", stored.signature.figures_hash.hex()},
                            {"figures", stored.figures}});
        }
        return nlohmann::ordered_json{{"queries", queries}, {"signatures", sigs}};
    }

    static ReportRegistry from_json(const nlohmann::json& j) {
        ReportRegistry reg;
        for (const auto& q : j.at("queries")) {
            Entry e;
            e.root = ContentId::parse_hex(q.at("root").get<std::string>());
            e.slice = q.at("slice").get<std::string>();
            e.current = ReportQuery::from_json(q.at("current"));
            reg.entries_.emplace(e.root, e);
        }
        for (const auto& s : j.at("signatures")) {
            ContentId root = ContentId::parse_hex(s.at("query").get<std::string>());
            std::string stage = s.at("stage").get<std::string>();
            StoredSignature stored;
            stored.signature = ReportSignature{
                root, stage, ContentId::parse_hex(s.at("hash").get<std::string>())};
            stored.figures = s.at("figures").get<std::string>();
            reg.signatures_[{root, stage}] = stored;
        }
        return reg;
    }

private:
    static void validate(const UnifiedGraph& graph, const ProvenanceStore* aliases,
                         const ReportQuery& query) {
        auto check = [&](const ContentId& id, const char* what) {
            ContentId resolved = view::resolve(aliases, id);
            if (!graph.has_element(resolved))
                raise(ErrorCode::DanglingReference,
                      std::string(what) + " " + id.hex() + " does not resolve");
        };
        check(query.target, "query target");
        for (const auto& [attr, value] : query.filters) check(attr, "filter attribute");
        if (query.group_by) check(*query.group_by, "group_by attribute");
        check(query.aggregate, "aggregate attribute");
    }

    std::map<ContentId, Entry> entries_;
    std::map<std::pair<ContentId, std::string>, StoredSignature> signatures_;
};

}  // namespace bclearer

#endif
