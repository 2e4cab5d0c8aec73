#ifndef BCLEARER_ASSIMILATE_HPP
#define BCLEARER_ASSIMILATE_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "collect.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "query.hpp"

namespace bclearer {

// The common cross-project model: a unified graph plus the equivalence
// registry mapping every assimilated slice element onto its model element.
// Content-addressed identity makes assimilation equality-by-id, so the
// registry is always a function.
struct AssimilatedModel {
    UnifiedGraph graph;
    std::map<ContentId, ContentId> registry;
};

struct AssimilateReport {
    std::size_t elements_added = 0;
    std::size_t elements_reused = 0;
    std::size_t triples_added = 0;
};

namespace detail {

inline std::optional<ContentId> classification_of(const UnifiedGraph& graph,
                                                  const ContentId& id) {
    for (const ContentId& tid : graph.triples_with_subject(id)) {
        if (!graph.is_active(tid)) continue;
        const Triple& t = graph.triple(tid);
        if (t.predicate != wellknown::instance_of()) continue;
        if (!graph.has_element(t.object)) continue;
        if (graph.element(t.object).kind == ElementKind::SeedCategory) return t.object;
    }
    return std::nullopt;
}

}  // namespace detail

// Folds an evolved slice graph into the model. Elements already present are
// reused, new ones inserted; idempotent, and order-insensitive for slices
// that share only seed elements.
inline AssimilateReport assimilate(AssimilatedModel& model, const UnifiedGraph& slice) {
    // Two slices must not have evolved the same item under different seed
    // categories; surface the conflict rather than merging it away.
    for (const auto& [id, e] : slice.elements()) {
        if (!slice.is_active(id)) continue;
        auto incoming = detail::classification_of(slice, id);
        if (!incoming || !model.graph.has_element(id)) continue;
        auto existing = detail::classification_of(model.graph, id);
        if (existing && *existing != *incoming)
            raise(ErrorCode::CategoryClash,
                  "element " + id.short_hex() + " is classified as " +
                      model.graph.element(*existing).payload + " in the model but " +
                      slice.element(*incoming).payload + " in the slice");
    }

    AssimilateReport report;
    std::function<void(const ContentId&)> insert = [&](const ContentId& id) {
        if (model.graph.has_element(id)) return;
        const Element& e = slice.element(id);
        for (const ContentId& p : e.parents) insert(p);
        model.graph.add_element(e.kind, e.parents, e.payload, e.origin);
        ++report.elements_added;
    };
    for (const auto& [id, e] : slice.elements()) {
        if (model.graph.has_element(id)) ++report.elements_reused;
        else insert(id);
        model.registry[id] = id;
        auto g = slice.generality(id);
        if (g && !model.graph.generality(id)) model.graph.set_generality(id, *g);
    }
    for (const auto& [id, t] : slice.triples()) {
        if (!model.graph.has_triple(id)) {
            model.graph.add_triple(t.predicate, t.subject, t.object);
            ++report.triples_added;
        }
        model.registry[id] = id;
    }
    for (const ContentId& id : slice.superseded()) {
        if (model.graph.has(id)) model.graph.supersede(id);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Reuse: translating the model back into formats target systems consume.

enum class ReuseFormat { CsvTables, Triples, Dot };

inline std::optional<ReuseFormat> reuse_format_from_name(std::string_view s) {
    if (s == "csv-tables") return ReuseFormat::CsvTables;
    if (s == "triples") return ReuseFormat::Triples;
    if (s == "dot") return ReuseFormat::Dot;
    return std::nullopt;
}

struct ExportedTable {
    std::filesystem::path path;
    std::string system;
    std::string table;
    std::vector<std::string> columns;        // sorted attribute labels
    std::vector<ContentId> instance_order;   // model instance per emitted row
};

struct ReuseExport {
    std::vector<std::filesystem::path> files;
    std::vector<ExportedTable> tables;  // csv-tables format only
};

namespace detail {

// Instances sort by numeric payload first so that re-loading an unmerged
// model reproduces the original row ordinals bit-exactly.
inline bool instance_order_less(const UnifiedGraph& graph, const ContentId& a,
                                const ContentId& b) {
    const std::string& pa = graph.element(a).payload;
    const std::string& pb = graph.element(b).payload;
    auto numeric = [](const std::string& s) -> std::optional<long long> {
        if (s.empty() || s.size() > 18) return std::nullopt;
        long long v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        return v;
    };
    auto na = numeric(pa), nb = numeric(pb);
    if (na && nb) return *na != *nb ? *na < *nb : a < b;
    if (na != nb) return na.has_value();  // numeric payloads first
    if (pa != pb) return pa < pb;
    return a < b;
}

inline std::string sanitize_filename(std::string_view s) {
    std::string out;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

}  // namespace detail

inline ReuseExport reuse_export(const UnifiedGraph& graph, ReuseFormat format,
                                const std::filesystem::path& destination) {
    ReuseExport out;
    fs::create_directories(destination);

    if (format == ReuseFormat::Triples) {
        fs::path path = destination / "triples.tsv";
        write_file_bytes(path, graph.export_triples());
        out.files.push_back(path);
        return out;
    }
    if (format == ReuseFormat::Dot) {
        fs::path path = destination / "model.dot";
        write_file_bytes(path, graph.export_dot());
        out.files.push_back(path);
        return out;
    }

    // csv-tables: one CSV per active TypeNode, columns = sorted attribute
    // labels, instances in reload-stable order.
    std::vector<std::pair<std::string, ContentId>> types;
    for (const auto& [id, e] : graph.elements()) {
        if (e.kind != ElementKind::TypeNode || !graph.is_active(id)) continue;
        std::string system;
        if (!e.parents.empty()) {
            const Element& parent = graph.element(e.parents[0]);
            if (parent.kind == ElementKind::Dataset) system = parent.payload;
        }
        types.emplace_back(system + "." + e.payload, id);
    }
    std::sort(types.begin(), types.end());

    for (const auto& [qualified, type_node] : types) {
        const Element& type_el = graph.element(type_node);
        ExportedTable table;
        table.table = type_el.payload;
        if (!type_el.parents.empty() &&
            graph.element(type_el.parents[0]).kind == ElementKind::Dataset)
            table.system = graph.element(type_el.parents[0]).payload;

        std::map<std::string, ContentId> attrs;
        for (const ContentId& child : graph.children_of(type_node)) {
            if (!graph.is_active(child)) continue;
            const Element& e = graph.element(child);
            if (e.kind == ElementKind::RelationType) attrs[e.payload] = child;
        }
        for (const auto& [label, attr] : attrs) table.columns.push_back(label);

        std::vector<ContentId> instances = view::extent(graph, type_node);
        std::sort(instances.begin(), instances.end(),
                  [&](const ContentId& a, const ContentId& b) {
                      return detail::instance_order_less(graph, a, b);
                  });
        table.instance_order = instances;

        std::vector<std::vector<std::string>> records;
        records.push_back(table.columns);
        for (const ContentId& inst : instances) {
            std::vector<std::string> row;
            for (const auto& [label, attr] : attrs) {
                auto v = view::single_value(graph, inst, attr);
                row.push_back(v ? *v : std::string());
            }
            records.push_back(std::move(row));
        }

        table.path = destination / (detail::sanitize_filename(qualified) + ".csv");
        write_file_bytes(table.path, csv::write(records));
        out.files.push_back(table.path);
        out.tables.push_back(std::move(table));
    }
    return out;
}

}  // namespace bclearer

#endif
