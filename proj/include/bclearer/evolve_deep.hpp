#ifndef BCLEARER_EVOLVE_DEEP_HPP
#define BCLEARER_EVOLVE_DEEP_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "graph.hpp"
#include "provenance.hpp"
#include "query.hpp"
#include "report_registry.hpp"
#include "unicode.hpp"

namespace bclearer {

namespace detail {

// Successor triples for everything an evolve pass replaced: any active triple
// touching a replaced id is re-created against the replacement and the old
// triple is superseded.
inline void repoint_triples(UnifiedGraph& graph, const std::map<ContentId, ContentId>& replaced) {
    std::vector<ContentId> stale;
    for (const auto& [id, t] : graph.triples()) {
        if (!graph.is_active(id)) continue;
        if (replaced.count(t.predicate) || replaced.count(t.subject) ||
            replaced.count(t.object))
            stale.push_back(id);
    }
    auto mapped = [&](const ContentId& id) {
        auto it = replaced.find(id);
        return it == replaced.end() ? id : it->second;
    };
    for (const ContentId& id : stale) {
        Triple t = graph.triple(id);
        graph.add_triple(mapped(t.predicate), mapped(t.subject), mapped(t.object));
        graph.supersede(id);
    }
}

inline ContentId dataset_of_table(const UnifiedGraph& graph, const ContentId& table) {
    const Element& el = graph.element(table);
    if (el.parents.empty())
        raise(ErrorCode::DanglingReference, "table " + table.short_hex() + " has no dataset");
    return el.parents[0];
}

inline std::vector<ContentId> active_children_of_kind(const UnifiedGraph& graph,
                                                      const ContentId& parent,
                                                      ElementKind kind) {
    std::vector<ContentId> out;
    for (const ContentId& child : graph.children_of(parent)) {
        if (!graph.is_active(child)) continue;
        if (graph.element(child).kind == kind) out.push_back(child);
    }
    return out;
}

inline std::optional<ContentId> active_cell(const UnifiedGraph& graph, const ContentId& row,
                                            const ContentId& column) {
    for (const ContentId& child : graph.children_of(row)) {
        if (!graph.is_active(child)) continue;
        const Element& cell = graph.element(child);
        if (cell.kind == ElementKind::Cell && cell.parents.size() == 2 &&
            cell.parents[1] == column)
            return child;
    }
    return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cleansing

enum class CleanKind { Trim, NfcNormalize };

inline const char* clean_kind_name(CleanKind k) {
    return k == CleanKind::Trim ? "trim" : "nfc-normalize";
}

struct CleanChange {
    ContentId before;
    ContentId after;
    CleanKind kind;
};

struct CleanReport {
    std::vector<CleanChange> changes;
};

// Trims every active cell payload of leading/trailing Unicode whitespace and
// normalizes it to NFC. Unchanged cells keep their ids; changed cells get
// successors with cleaned trace edges. Idempotent by construction.
inline CleanReport clean_pass(UnifiedGraph& graph, ProvenanceStore& prov, const RunId& run) {
    CleanReport report;
    std::map<ContentId, ContentId> replaced;

    std::vector<ContentId> cells;
    for (const auto& [id, e] : graph.elements()) {
        if (e.kind == ElementKind::Cell && graph.is_active(id)) cells.push_back(id);
    }
    for (const ContentId& id : cells) {
        const Element cell = graph.element(id);
        std::string trimmed = unicode::trim_whitespace(cell.payload);
        std::string cleaned = unicode::to_nfc(trimmed);
        if (cleaned == cell.payload) continue;

        ContentId successor =
            graph.add_element(ElementKind::Cell, cell.parents, cleaned, cell.origin);
        graph.set_generality(successor, Generality::Data);
        graph.supersede(id);
        replaced[id] = successor;
        prov.record_trace({id}, {successor}, "clean_pass", run, TraceKind::Cleaned);
        if (trimmed != cell.payload)
            report.changes.push_back({id, successor, CleanKind::Trim});
        if (cleaned != trimmed)
            report.changes.push_back({id, successor, CleanKind::NfcNormalize});
    }
    detail::repoint_triples(graph, replaced);
    return report;
}

// ---------------------------------------------------------------------------
// Foreign-key inference (inclusion dependencies)

struct FkCandidate {
    ContentId referencing;
    ContentId referenced;
    std::size_t matched = 0;    // |distinct referencing values ∩ referenced values|
    std::size_t distinct = 0;   // |distinct referencing values|
    bool referenced_unique = false;
    bool name_match = false;
    bool accepted = false;

    double inclusion_ratio() const {
        return distinct == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(distinct);
    }
};

// Surfaces implicit structure: candidate pairs are all ordered column pairs,
// same-dataset and cross-dataset, self-pairs skipped. A candidate is accepted
// iff the inclusion ratio clears min_inclusion and the referenced column is
// unique-valued; accepted candidates become foreignKey triples with derived
// provenance.
inline std::vector<FkCandidate> infer_foreign_keys(UnifiedGraph& graph, ProvenanceStore& prov,
                                                   const RunId& run, double min_inclusion,
                                                   bool require_unique = true) {
    struct ColumnProfile {
        ContentId id;
        std::string name;
        std::set<std::string> distinct_nonempty;
        bool unique = false;  // all raw values distinct and non-empty
    };

    std::vector<ColumnProfile> profiles;
    for (const auto& [id, e] : graph.elements()) {
        if (e.kind != ElementKind::Column || !graph.is_active(id)) continue;
        ColumnProfile p;
        p.id = id;
        p.name = e.payload;
        std::size_t total = 0;
        bool has_empty = false;
        std::set<std::string> all;
        for (const ContentId& child : graph.children_of(id)) {
            if (!graph.is_active(child)) continue;
            const Element& cell = graph.element(child);
            if (cell.kind != ElementKind::Cell) continue;
            ++total;
            if (cell.payload.empty()) has_empty = true;
            else p.distinct_nonempty.insert(cell.payload);
            all.insert(cell.payload);
        }
        p.unique = total > 0 && !has_empty && all.size() == total;
        profiles.push_back(std::move(p));
    }

    std::vector<FkCandidate> candidates;
    for (const ColumnProfile& ref : profiles) {
        if (ref.distinct_nonempty.empty()) continue;  // no evidence to test
        for (const ColumnProfile& target : profiles) {
            if (ref.id == target.id) continue;
            FkCandidate c;
            c.referencing = ref.id;
            c.referenced = target.id;
            c.distinct = ref.distinct_nonempty.size();
            for (const std::string& v : ref.distinct_nonempty)
                if (target.distinct_nonempty.count(v)) ++c.matched;
            c.referenced_unique = target.unique;
            c.name_match = ref.name == target.name;
            bool ratio_ok =
                static_cast<double>(c.matched) >=
                min_inclusion * static_cast<double>(c.distinct);
            c.accepted = ratio_ok && (!require_unique || c.referenced_unique);
            candidates.push_back(c);
        }
    }

    bool fk_rel_seeded = graph.has_element(wellknown::foreign_key_rel());
    for (const FkCandidate& c : candidates) {
        if (!c.accepted) continue;
        if (!fk_rel_seeded) {
            graph.add_element(ElementKind::RelationType, {}, "bclearer:foreignKey");
            prov.record_trace({}, {wellknown::foreign_key_rel()}, "infer_foreign_keys:reserved",
                              run, TraceKind::Seeded);
            fk_rel_seeded = true;
        }
        ContentId tid = graph.add_triple(wellknown::foreign_key_rel(), c.referencing,
                                         c.referenced);
        prov.record_trace({c.referencing, c.referenced}, {tid}, "infer_foreign_keys", run,
                          TraceKind::Derived);
    }
    return candidates;
}

// ---------------------------------------------------------------------------
// Cross-source syntactic integration

struct IntegrationMapping {
    struct Rename {
        std::string source_system;
        std::string from;
        std::string to;
    };
    struct Recoding {
        std::string column;  // as-loaded column name
        std::map<std::string, std::string> map;
    };
    std::vector<Rename> renames;
    std::vector<Recoding> recodings;

    static IntegrationMapping from_json(const nlohmann::json& j) {
        IntegrationMapping m;
        if (j.contains("renames")) {
            for (const auto& r : j.at("renames")) {
                m.renames.push_back({r.at("source_system").get<std::string>(),
                                     r.at("from").get<std::string>(),
                                     r.at("to").get<std::string>()});
            }
        }
        if (j.contains("recodings")) {
            for (const auto& r : j.at("recodings")) {
                Recoding rec;
                rec.column = r.at("column").get<std::string>();
                for (const auto& [from, to] : r.at("map").items())
                    rec.map[from] = to.get<std::string>();
                m.recodings.push_back(std::move(rec));
            }
        }
        return m;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json renames_json = nlohmann::ordered_json::array();
        for (const auto& r : renames) {
            renames_json.push_back({{"source_system", r.source_system},
                                    {"from", r.from},
                                    {"to", r.to}});
        }
        nlohmann::ordered_json recodings_json = nlohmann::ordered_json::array();
        for (const auto& r : recodings) {
            nlohmann::ordered_json map = nlohmann::ordered_json::object();
            for (const auto& [from, to] : r.map) map[from] = to;
            recodings_json.push_back({{"column", r.column}, {"map", map}});
        }
        return nlohmann::ordered_json{{"renames", renames_json},
                                      {"recodings", recodings_json}};
    }
};

struct IntegrationReport {
    std::size_t tables_renamed = 0;
    std::size_t columns_renamed = 0;
    std::size_t cells_recoded = 0;
    std::size_t queries_rewritten = 0;
};

// Harmonizes names and value vocabularies across sources. Renamed containers
// get successor elements (and their rows/cells are re-anchored under them);
// recoded cell values get cleaned-kind edges; alias chains keep registered
// queries resolving.
inline IntegrationReport integrate_sources(UnifiedGraph& graph, ProvenanceStore& prov,
                                           const RunId& run, const IntegrationMapping& mapping,
                                           ReportRegistry* registry = nullptr) {
    IntegrationReport report;

    for (const auto& rec : mapping.recodings) {
        std::set<std::string> targets;
        for (const auto& [from, to] : rec.map) {
            if (!targets.insert(to).second)
                raise(ErrorCode::NonBijectiveRecoding,
                      "recoding for column '" + rec.column + "' maps two source values to '" +
                          to + "'");
        }
    }

    // Resolve what each mapping entry is talking about before touching anything.
    std::map<ContentId, std::string> table_new_name;
    std::map<ContentId, std::string> column_new_name;
    std::map<ContentId, const std::map<std::string, std::string>*> column_recode;

    auto active_tables_of = [&](const std::string& system) {
        std::vector<ContentId> out;
        for (const auto& [id, e] : graph.elements()) {
            if (e.kind != ElementKind::Table || !graph.is_active(id)) continue;
            if (graph.element(detail::dataset_of_table(graph, id)).payload == system)
                out.push_back(id);
        }
        return out;
    };

    for (const auto& rename : mapping.renames) {
        bool hit = false;
        for (const ContentId& table : active_tables_of(rename.source_system)) {
            if (graph.element(table).payload == rename.from) {
                hit = true;
                if (rename.from != rename.to) table_new_name[table] = rename.to;
            }
            for (const ContentId& col :
                 detail::active_children_of_kind(graph, table, ElementKind::Column)) {
                if (graph.element(col).payload == rename.from) {
                    hit = true;
                    if (rename.from != rename.to) column_new_name[col] = rename.to;
                }
            }
        }
        if (!hit)
            raise(ErrorCode::DanglingReference,
                  "rename '" + rename.from + "' matches nothing in system " +
                      rename.source_system);
    }

    for (const auto& rec : mapping.recodings) {
        bool hit = false;
        for (const auto& [id, e] : graph.elements()) {
            if (e.kind != ElementKind::Column || !graph.is_active(id)) continue;
            if (e.payload == rec.column) {
                column_recode[id] = &rec.map;
                hit = true;
            }
        }
        if (!hit)
            raise(ErrorCode::DanglingReference,
                  "recoding column '" + rec.column + "' matches no loaded column");
    }

    // Rebuild affected tables. Identity is content-derived, so a renamed
    // container cascades fresh ids through everything anchored under it.
    std::map<ContentId, ContentId> replaced;
    std::map<ContentId, std::map<std::string, std::string>> recoded_by_new_column;

    std::vector<ContentId> tables;
    for (const auto& [id, e] : graph.elements()) {
        if (e.kind == ElementKind::Table && graph.is_active(id)) tables.push_back(id);
    }

    for (const ContentId& table : tables) {
        std::vector<ContentId> columns =
            detail::active_children_of_kind(graph, table, ElementKind::Column);
        std::vector<ContentId> rows =
            detail::active_children_of_kind(graph, table, ElementKind::Row);

        bool table_renamed = table_new_name.count(table) != 0;
        bool any_column_change = false;
        for (const ContentId& col : columns) {
            if (column_new_name.count(col) || column_recode.count(col))
                any_column_change = true;
        }
        if (!table_renamed && !any_column_change) continue;

        const Element table_el = graph.element(table);
        ContentId new_table = table;
        if (table_renamed) {
            new_table = graph.add_element(ElementKind::Table, table_el.parents,
                                          table_new_name.at(table), table_el.origin);
            graph.set_generality(new_table, Generality::Schema);
            graph.supersede(table);
            replaced[table] = new_table;
            prov.record_trace({table}, {new_table}, "integrate_sources:rename-table", run,
                              TraceKind::Renamed);
            ++report.tables_renamed;
        }

        std::map<ContentId, ContentId> new_column_for;
        for (const ContentId& col : columns) {
            const Element col_el = graph.element(col);
            auto rename_it = column_new_name.find(col);
            std::string name = rename_it == column_new_name.end() ? col_el.payload
                                                                  : rename_it->second;
            if (!table_renamed && rename_it == column_new_name.end()) {
                new_column_for[col] = col;
                continue;
            }
            ContentId new_col =
                graph.add_element(ElementKind::Column, {new_table}, name, col_el.origin);
            graph.set_generality(new_col, Generality::Schema);
            if (new_col != col) {
                graph.supersede(col);
                replaced[col] = new_col;
                prov.record_trace({col}, {new_col}, "integrate_sources:rename-column", run,
                                  TraceKind::Renamed);
                if (rename_it != column_new_name.end()) ++report.columns_renamed;
            }
            new_column_for[col] = new_col;
        }
        for (const ContentId& col : columns) {
            auto rc = column_recode.find(col);
            if (rc != column_recode.end())
                recoded_by_new_column[new_column_for.at(col)] = *rc->second;
        }

        bool rows_move = table_renamed;
        for (const ContentId& row : rows) {
            const Element row_el = graph.element(row);
            ContentId new_row = row;
            if (rows_move) {
                new_row = graph.add_element(ElementKind::Row, {new_table}, row_el.payload,
                                            row_el.origin);
                graph.set_generality(new_row, Generality::Data);
                graph.supersede(row);
                replaced[row] = new_row;
                prov.record_trace({row}, {new_row}, "integrate_sources:rename-table", run,
                                  TraceKind::Renamed);
            }
            for (const ContentId& col : columns) {
                auto cell = detail::active_cell(graph, row, col);
                if (!cell) continue;
                const Element cell_el = graph.element(*cell);
                std::string payload = cell_el.payload;
                bool recoded = false;
                auto rc = column_recode.find(col);
                if (rc != column_recode.end()) {
                    auto hit = rc->second->find(payload);
                    if (hit != rc->second->end()) {
                        payload = hit->second;
                        recoded = true;
                    }
                }
                ContentId new_col = new_column_for.at(col);
                // Nothing about the cell's identity changed (an identity
                // recoding entry counts as no change).
                if (payload == cell_el.payload && new_row == row && new_col == col) continue;
                ContentId new_cell = graph.add_element(ElementKind::Cell, {new_row, new_col},
                                                       payload, cell_el.origin);
                graph.set_generality(new_cell, Generality::Data);
                graph.supersede(*cell);
                replaced[*cell] = new_cell;
                prov.record_trace({*cell}, {new_cell},
                                  recoded ? "integrate_sources:recode"
                                          : "integrate_sources:rename-table",
                                  run, recoded ? TraceKind::Cleaned : TraceKind::Renamed);
                if (recoded) ++report.cells_recoded;
            }
        }
    }

    detail::repoint_triples(graph, replaced);

    // Queries inherited from the sources co-evolve with the recoding: a
    // filter expecting an old vocabulary value is rewritten to expect the
    // harmonized one, recorded as a rename of the query object.
    if (registry) {
        std::vector<ContentId> roots;
        for (const auto& [root, e] : registry->entries()) roots.push_back(root);
        for (const ContentId& root : roots) {
            ReportQuery next = registry->entry(root).current;
            bool changed = false;
            for (auto& [attr, value] : next.filters) {
                ContentId resolved = prov.resolve_alias(attr);
                auto rc = recoded_by_new_column.find(resolved);
                if (rc == recoded_by_new_column.end()) continue;
                auto hit = rc->second.find(value);
                if (hit != rc->second.end()) {
                    value = hit->second;
                    changed = true;
                }
            }
            if (changed) {
                registry->rewrite(root, next, prov, run, "integrate_sources:recode-query");
                ++report.queries_rewritten;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Unification of types

struct UnifyReport {
    std::size_t types = 0;
    std::size_t instances = 0;
    std::size_t attributes = 0;
    std::size_t value_triples = 0;
};

// Folds the schema level into the data: each Table becomes a TypeNode, each
// Row an InstanceNode under instanceOf, each Column an attribute
// RelationType, and each Cell a (attribute, instance, value) triple. The
// superseded originals stay behind as provenance sources.
inline UnifyReport unify_types(UnifiedGraph& graph, ProvenanceStore& prov, const RunId& run) {
    UnifyReport report;

    if (!graph.has_element(wellknown::instance_of())) {
        graph.add_element(ElementKind::RelationType, {}, "boro:instanceOf");
        prov.record_trace({}, {wellknown::instance_of()}, "unify_types:reserved", run,
                          TraceKind::Seeded);
    }

    std::vector<ContentId> tables;
    for (const auto& [id, e] : graph.elements()) {
        if (e.kind == ElementKind::Table && graph.is_active(id)) tables.push_back(id);
    }

    for (const ContentId& table : tables) {
        const Element table_el = graph.element(table);
        ContentId type_node = graph.add_element(ElementKind::TypeNode, table_el.parents,
                                                table_el.payload, table_el.origin);
        graph.set_generality(type_node, Generality::Data);
        prov.record_trace({table}, {type_node}, "unify_types:type", run, TraceKind::Renamed);
        ++report.types;

        std::map<ContentId, ContentId> attr_for;
        for (const ContentId& col :
             detail::active_children_of_kind(graph, table, ElementKind::Column)) {
            const Element col_el = graph.element(col);
            ContentId attr = graph.add_element(ElementKind::RelationType, {type_node},
                                               col_el.payload, col_el.origin);
            graph.set_generality(attr, Generality::Data);
            prov.record_trace({col}, {attr}, "unify_types:attribute", run, TraceKind::Renamed);
            attr_for[col] = attr;
            graph.supersede(col);
            ++report.attributes;
        }

        for (const ContentId& row :
             detail::active_children_of_kind(graph, table, ElementKind::Row)) {
            const Element row_el = graph.element(row);
            ContentId instance = graph.add_element(ElementKind::InstanceNode, {type_node},
                                                   row_el.payload, row_el.origin);
            graph.set_generality(instance, Generality::Data);
            prov.record_trace({row}, {instance}, "unify_types:instance", run,
                              TraceKind::Renamed);
            graph.add_triple(wellknown::instance_of(), instance, type_node);
            ++report.instances;

            for (const auto& [col, attr] : attr_for) {
                auto cell = detail::active_cell(graph, row, col);
                if (!cell) continue;
                const Element cell_el = graph.element(*cell);
                ContentId value = graph.add_element(ElementKind::Value, {}, cell_el.payload);
                graph.set_generality(value, Generality::Data);
                prov.record_trace({*cell}, {value}, "unify_types:value", run,
                                  TraceKind::Derived);
                ContentId tid = graph.add_triple(attr, instance, value);
                prov.record_trace({*cell}, {tid}, "unify_types:cell", run, TraceKind::Renamed);
                graph.supersede(*cell);
                ++report.value_triples;
            }
            graph.supersede(row);
        }
        graph.supersede(table);
    }
    return report;
}

}  // namespace bclearer

#endif
