#ifndef BCLEARER_PROVENANCE_HPP
#define BCLEARER_PROVENANCE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "content_id.hpp"
#include "errors.hpp"
#include "graph.hpp"

namespace bclearer {

// Run identity derives from config and inputs, never from the clock, so two
// runs over the same material are byte-comparable.
using RunId = ContentId;

inline RunId make_run_id(const ContentId& config_hash, std::vector<ContentId> snapshot_ids) {
    std::sort(snapshot_ids.begin(), snapshot_ids.end());
    std::string canon = "r1|" + config_hash.hex() + "|";
    for (std::size_t i = 0; i < snapshot_ids.size(); ++i) {
        if (i) canon += ',';
        canon += snapshot_ids[i].hex();
    }
    return ContentId::of(canon);
}

enum class TraceKind { Derived, Renamed, Merged, Cleaned, Seeded };

inline const char* trace_kind_name(TraceKind k) {
    switch (k) {
        case TraceKind::Derived: return "derived";
        case TraceKind::Renamed: return "renamed";
        case TraceKind::Merged: return "merged";
        case TraceKind::Cleaned: return "cleaned";
        case TraceKind::Seeded: return "seeded";
    }
    return "?";
}

inline std::optional<TraceKind> trace_kind_from_name(std::string_view s) {
    if (s == "derived") return TraceKind::Derived;
    if (s == "renamed") return TraceKind::Renamed;
    if (s == "merged") return TraceKind::Merged;
    if (s == "cleaned") return TraceKind::Cleaned;
    if (s == "seeded") return TraceKind::Seeded;
    return std::nullopt;
}

struct TraceEdge {
    std::vector<ContentId> sources;
    std::vector<ContentId> targets;
    std::string transform;  // bUnit identifier
    RunId run;
    TraceKind kind = TraceKind::Derived;
};

// Append-only log of how information items turn into other items. Tracking
// follows an item forward, tracing follows it backward; either traversal
// returns edge indices into the log.
class ProvenanceStore {
public:
    std::size_t record_trace(std::vector<ContentId> sources, std::vector<ContentId> targets,
                             std::string transform, const RunId& run, TraceKind kind) {
        if (kind != TraceKind::Seeded && sources.empty())
            raise(ErrorCode::EmptyEndpoint, "non-seeded edge needs at least one source");
        if (targets.empty())
            raise(ErrorCode::EmptyEndpoint, "edge needs at least one target");
        std::size_t index = edges_.size();
        for (const ContentId& s : sources) by_source_[s].push_back(index);
        for (const ContentId& t : targets) by_target_[t].push_back(index);
        edges_.push_back(TraceEdge{std::move(sources), std::move(targets),
                                   std::move(transform), run, kind});
        return index;
    }

    const std::vector<TraceEdge>& edges() const { return edges_; }
    const TraceEdge& edge(std::size_t i) const { return edges_.at(i); }
    std::size_t size() const { return edges_.size(); }

    // All edges that (transitively) lead to `item`: the ancestry DAG.
    std::vector<std::size_t> trace_back(const ContentId& item) const {
        return reachable(item, by_target_, /*follow_sources=*/true);
    }

    // All edges (transitively) fed by `item`: the descendant DAG.
    std::vector<std::size_t> track_forward(const ContentId& item) const {
        return reachable(item, by_source_, /*follow_sources=*/false);
    }

    // One step of alias resolution: the unique renamed/merged successor, or
    // the item itself when no such edge exists.
    ContentId resolve_alias_step(const ContentId& item) const {
        std::set<ContentId> successors;
        auto it = by_source_.find(item);
        if (it != by_source_.end()) {
            for (std::size_t i : it->second) {
                const TraceEdge& e = edges_[i];
                if (e.kind != TraceKind::Renamed && e.kind != TraceKind::Merged) continue;
                for (const ContentId& t : e.targets) successors.insert(t);
            }
        }
        if (successors.empty()) return item;
        if (successors.size() > 1)
            raise(ErrorCode::AmbiguousAlias,
                  item.hex() + " has " + std::to_string(successors.size()) +
                      " rename/merge successors");
        return *successors.begin();
    }

    // Follows the chain of renamed/merged edges to the latest successor.
    ContentId resolve_alias(const ContentId& item) const {
        ContentId cur = item;
        std::set<ContentId> seen;
        for (;;) {
            if (!seen.insert(cur).second)
                raise(ErrorCode::AmbiguousAlias, "alias chain loops at " + cur.hex());
            ContentId next = resolve_alias_step(cur);
            if (next == cur) return cur;
            cur = next;
        }
    }

    // Topological order over all items touched by the log; empty optional if
    // the edge set is not a DAG.
    std::optional<std::vector<ContentId>> topological_order() const {
        std::map<ContentId, std::set<ContentId>> next;
        std::map<ContentId, int> indegree;
        for (const TraceEdge& e : edges_) {
            for (const ContentId& s : e.sources) {
                indegree.try_emplace(s, 0);
                for (const ContentId& t : e.targets) {
                    if (next[s].insert(t).second) ++indegree[t];
                }
            }
            for (const ContentId& t : e.targets) indegree.try_emplace(t, 0);
        }
        std::set<ContentId> ready;
        for (const auto& [id, d] : indegree)
            if (d == 0) ready.insert(id);
        std::vector<ContentId> order;
        while (!ready.empty()) {
            ContentId id = *ready.begin();
            ready.erase(ready.begin());
            order.push_back(id);
            auto it = next.find(id);
            if (it == next.end()) continue;
            for (const ContentId& t : it->second)
                if (--indegree[t] == 0) ready.insert(t);
        }
        if (order.size() != indegree.size()) return std::nullopt;
        return order;
    }

    bool is_dag() const { return topological_order().has_value(); }

    struct LabelFn {
        const UnifiedGraph* graph = nullptr;
        std::string operator()(const ContentId& id) const {
            if (graph && graph->has_element(id)) {
                const Element& e = graph->element(id);
                std::string p = e.payload.substr(0, 24);
                return std::string(kind_name(e.kind)) + ":" + id.short_hex() +
                       (p.empty() ? "" : ":" + p);
            }
            return id.short_hex();
        }
    };

    enum class Direction { Backward, Forward };

    // DOT rendering of one item's ontogenic tree.
    std::string export_ontogenic_tree(const ContentId& item, Direction dir) const {
        return export_ontogenic_tree(item, dir, LabelFn{});
    }

    std::string export_ontogenic_tree(const ContentId& item, Direction dir,
                                      const LabelFn& label) const {
        std::vector<std::size_t> idx =
            dir == Direction::Backward ? trace_back(item) : track_forward(item);
        std::set<ContentId> nodes{item};
        for (std::size_t i : idx) {
            const TraceEdge& e = edges_[i];
            nodes.insert(e.sources.begin(), e.sources.end());
            nodes.insert(e.targets.begin(), e.targets.end());
        }
        std::ostringstream out;
        out << "digraph ontogeny {\n";
        for (const ContentId& n : nodes) {
            out << "  \"" << n.hex() << "\" [label=\"" << dot_escape(label(n)) << "\"];\n";
        }
        std::vector<std::size_t> sorted(idx);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i : sorted) {
            const TraceEdge& e = edges_[i];
            for (const ContentId& s : e.sources) {
                for (const ContentId& t : e.targets) {
                    out << "  \"" << s.hex() << "\" -> \"" << t.hex() << "\" [label=\""
                        << dot_escape(e.transform) << " (" << trace_kind_name(e.kind)
                        << ")\"];\n";
                }
            }
        }
        out << "}\n";
        return out.str();
    }

    // Log file form: kind, transform, run, sources, targets; append order.
    // Transform text is escaped so user-derived names cannot break the
    // tab/newline framing.
    std::string serialize_log() const {
        std::string out;
        for (const TraceEdge& e : edges_) {
            out += trace_kind_name(e.kind);
            out += '\t';
            out += escape_field(e.transform);
            out += '\t';
            out += e.run.hex();
            out += '\t';
            out += join_ids(e.sources);
            out += '\t';
            out += join_ids(e.targets);
            out += '\n';
        }
        return out;
    }

    static ProvenanceStore parse_log(std::string_view text) {
        ProvenanceStore store;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string_view line = text.substr(pos, eol - pos);
            pos = eol + 1;
            if (line.empty()) continue;
            std::vector<std::string_view> fields = split(line, '\t');
            if (fields.size() != 5)
                raise(ErrorCode::EncodingError, "malformed provenance line");
            auto kind = trace_kind_from_name(fields[0]);
            if (!kind) raise(ErrorCode::EncodingError, "unknown trace kind");
            store.record_trace(parse_ids(fields[3]), parse_ids(fields[4]),
                               unescape_field(fields[1]), ContentId::parse_hex(fields[2]),
                               *kind);
        }
        return store;
    }

private:
    std::vector<std::size_t> reachable(const ContentId& start,
                                       const std::map<ContentId, std::vector<std::size_t>>& index,
                                       bool follow_sources) const {
        std::set<std::size_t> found;
        std::set<ContentId> visited;
        std::vector<ContentId> stack{start};
        while (!stack.empty()) {
            ContentId cur = stack.back();
            stack.pop_back();
            if (!visited.insert(cur).second) continue;
            auto it = index.find(cur);
            if (it == index.end()) continue;
            for (std::size_t i : it->second) {
                found.insert(i);
                const TraceEdge& e = edges_[i];
                const auto& frontier = follow_sources ? e.sources : e.targets;
                for (const ContentId& n : frontier) stack.push_back(n);
            }
        }
        return {found.begin(), found.end()};
    }

    static std::string escape_field(std::string_view s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '\\': out += "\\\\"; break;
                case '\t': out += "\\t"; break;
                case '\n': out += "\\n"; break;
                default: out += c;
            }
        }
        return out;
    }

    static std::string unescape_field(std::string_view s) {
        std::string out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '\\' || i + 1 >= s.size()) {
                out += s[i];
                continue;
            }
            ++i;
            if (s[i] == 't') out += '\t';
            else if (s[i] == 'n') out += '\n';
            else out += s[i];
        }
        return out;
    }

    static std::string join_ids(const std::vector<ContentId>& ids) {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ',';
            out += ids[i].hex();
        }
        return out;
    }

    static std::vector<ContentId> parse_ids(std::string_view s) {
        std::vector<ContentId> out;
        if (s.empty()) return out;
        for (std::string_view part : split(s, ',')) out.push_back(ContentId::parse_hex(part));
        return out;
    }

    static std::vector<std::string_view> split(std::string_view s, char sep) {
        std::vector<std::string_view> out;
        std::size_t pos = 0;
        for (;;) {
            std::size_t next = s.find(sep, pos);
            if (next == std::string_view::npos) {
                out.push_back(s.substr(pos));
                return out;
            }
            out.push_back(s.substr(pos, next - pos));
            pos = next + 1;
        }
    }

    static std::string dot_escape(std::string_view s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            out += c;
        }
        return out;
    }

    std::vector<TraceEdge> edges_;
    std::map<ContentId, std::vector<std::size_t>> by_source_;
    std::map<ContentId, std::vector<std::size_t>> by_target_;
};

}  // namespace bclearer

#endif
