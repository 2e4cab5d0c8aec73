#ifndef BCLEARER_LOAD_HPP
#define BCLEARER_LOAD_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "collect.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "provenance.hpp"
#include "unicode.hpp"

namespace bclearer {

enum class TableFormat { Csv, Tsv, Delimited };
enum class ColumnType { Text, Decimal, Date };

inline const char* column_type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Text: return "text";
        case ColumnType::Decimal: return "decimal";
        case ColumnType::Date: return "date";
    }
    return "?";
}

struct TableSpec {
    std::string name;
    TableFormat format = TableFormat::Csv;
    char delimiter = ',';  // effective delimiter; fixed for csv/tsv
    bool has_header = true;
    std::map<std::string, ColumnType> columns;  // typing hints by column name

    char effective_delimiter() const {
        switch (format) {
            case TableFormat::Csv: return ',';
            case TableFormat::Tsv: return '\t';
            case TableFormat::Delimited: return delimiter;
        }
        return ',';
    }

    static TableSpec from_json(const nlohmann::json& j) {
        TableSpec spec;
        spec.name = j.at("name").get<std::string>();
        std::string fmt = j.at("format").get<std::string>();
        if (fmt == "csv") spec.format = TableFormat::Csv;
        else if (fmt == "tsv") spec.format = TableFormat::Tsv;
        else if (fmt == "delimited") spec.format = TableFormat::Delimited;
        else raise(ErrorCode::SchemaViolation, "unknown table format: " + fmt);
        if (spec.format == TableFormat::Delimited) {
            std::string d = j.at("delimiter").get<std::string>();
            if (d.size() != 1)
                raise(ErrorCode::SchemaViolation, "delimiter must be a single byte");
            spec.delimiter = d[0];
        }
        spec.has_header = j.value("has_header", true);
        if (j.contains("columns")) {
            for (const auto& [name, type] : j.at("columns").items()) {
                std::string t = type.get<std::string>();
                if (t == "text") spec.columns[name] = ColumnType::Text;
                else if (t == "decimal") spec.columns[name] = ColumnType::Decimal;
                else if (t == "date") spec.columns[name] = ColumnType::Date;
                else raise(ErrorCode::SchemaViolation, "unknown column type: " + t);
            }
        }
        return spec;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["name"] = name;
        j["format"] = format == TableFormat::Csv ? "csv"
                      : format == TableFormat::Tsv ? "tsv" : "delimited";
        if (format == TableFormat::Delimited) j["delimiter"] = std::string(1, delimiter);
        j["has_header"] = has_header;
        nlohmann::ordered_json cols = nlohmann::ordered_json::object();
        for (const auto& [name_, type] : columns) cols[name_] = column_type_name(type);
        j["columns"] = cols;
        return j;
    }
};

struct LoadedSource {
    ContentId dataset;
    ContentId table;
    std::vector<ContentId> columns;              // file order
    std::vector<ContentId> rows;                 // ordinal order
    std::vector<std::vector<ContentId>> cells;   // cells[row][col]
    std::string system;
    std::map<ContentId, ColumnType> column_types;
};

namespace detail {

inline LoadedSource build_table(UnifiedGraph& graph, ProvenanceStore& prov,
                                const Snapshot& snapshot, const TableSpec& spec,
                                const std::string& system, const RunId& run,
                                std::vector<std::string> column_names,
                                const std::vector<std::vector<std::string>>& data_rows,
                                const std::vector<std::pair<std::size_t, std::size_t>>& padded) {
    LoadedSource out;
    out.system = system;
    out.dataset = graph.add_element(ElementKind::Dataset, {}, system, "system:" + system);
    graph.set_generality(out.dataset, Generality::Metadata);
    out.table = graph.add_element(ElementKind::Table, {out.dataset}, spec.name,
                                  "snapshot:" + snapshot.source);
    graph.set_generality(out.table, Generality::Schema);

    for (const std::string& name : column_names) {
        ContentId col = graph.add_element(ElementKind::Column, {out.table}, name);
        graph.set_generality(col, Generality::Schema);
        out.columns.push_back(col);
        auto hint = spec.columns.find(name);
        out.column_types[col] =
            hint == spec.columns.end() ? ColumnType::Text : hint->second;
    }

    std::set<std::pair<std::size_t, std::size_t>> padded_set(padded.begin(), padded.end());
    std::vector<ContentId> main_targets{out.dataset, out.table};
    main_targets.insert(main_targets.end(), out.columns.begin(), out.columns.end());
    std::vector<std::pair<std::string, ContentId>> pad_edges;

    for (std::size_t i = 0; i < data_rows.size(); ++i) {
        ContentId row = graph.add_element(ElementKind::Row, {out.table}, std::to_string(i));
        graph.set_generality(row, Generality::Data);
        out.rows.push_back(row);
        main_targets.push_back(row);
        std::vector<ContentId> row_cells;
        for (std::size_t j = 0; j < column_names.size(); ++j) {
            ContentId cell = graph.add_element(ElementKind::Cell, {row, out.columns[j]},
                                               data_rows[i][j]);
            graph.set_generality(cell, Generality::Data);
            row_cells.push_back(cell);
            if (padded_set.count({i, j})) {
                pad_edges.emplace_back(
                    "load:" + system + "." + spec.name + ":pad:r" + std::to_string(i) + "c" +
                        std::to_string(j),
                    cell);
            } else {
                main_targets.push_back(cell);
            }
        }
        out.cells.push_back(std::move(row_cells));
    }

    std::vector<ContentId> chunk_ids;
    for (const SnapshotChunk& c : snapshot.chunks) chunk_ids.push_back(c.hash);
    prov.record_trace(chunk_ids, main_targets, "load:" + system + "." + spec.name, run,
                      TraceKind::Derived);
    for (const auto& [transform, cell] : pad_edges) {
        prov.record_trace(chunk_ids, {cell}, transform, run, TraceKind::Derived);
    }
    return out;
}

}  // namespace detail

// Surface-*computerization of one table: parse the snapshot bytes, give the
// dataset, table, columns, rows and cells content-derived identities, and
// root them all in the snapshot via provenance.
inline LoadedSource load_table(UnifiedGraph& graph, ProvenanceStore& prov,
                               const Snapshot& snapshot, const std::string& bytes,
                               const TableSpec& spec, const std::string& system,
                               const RunId& run) {
    if (!unicode::is_valid_utf8(bytes))
        raise(ErrorCode::EncodingError, "snapshot " + snapshot.source + " is not valid UTF-8");
    auto records = csv::parse(bytes, spec.effective_delimiter());

    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> data_rows;
    std::size_t first_data = 0;
    if (spec.has_header && !records.empty()) {
        column_names = records[0];
        first_data = 1;
    } else if (!records.empty()) {
        for (std::size_t j = 0; j < records[0].size(); ++j)
            column_names.push_back("c" + std::to_string(j));
    }
    for (std::size_t r = first_data; r < records.size(); ++r) {
        if (records[r].size() != column_names.size()) {
            // Ordinal counts file records, header included.
            raise(ErrorCode::RaggedRow,
                  "row " + std::to_string(r) + " of " + spec.name + " has " +
                      std::to_string(records[r].size()) + " fields, expected " +
                      std::to_string(column_names.size()));
        }
        data_rows.push_back(records[r]);
    }
    return detail::build_table(graph, prov, snapshot, spec, system, run, column_names,
                               data_rows, {});
}

// Minimal-transformation load for headerless delimited text: synthetic column
// names c0..cN, short lines padded to the widest line with empty cells (each
// padding recorded as its own derived edge).
inline LoadedSource load_delimited_text(UnifiedGraph& graph, ProvenanceStore& prov,
                                        const Snapshot& snapshot, const std::string& bytes,
                                        char delimiter, const std::string& system,
                                        const RunId& run, const std::string& table_name) {
    if (!unicode::is_valid_utf8(bytes))
        raise(ErrorCode::EncodingError, "snapshot " + snapshot.source + " is not valid UTF-8");
    auto records = csv::parse(bytes, delimiter);

    std::size_t width = 0;
    for (const auto& r : records) width = std::max(width, r.size());

    std::vector<std::string> column_names;
    for (std::size_t j = 0; j < width; ++j) column_names.push_back("c" + std::to_string(j));

    std::vector<std::vector<std::string>> data_rows;
    std::vector<std::pair<std::size_t, std::size_t>> padded;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<std::string> row = records[i];
        while (row.size() < width) {
            padded.emplace_back(i, row.size());
            row.emplace_back();
        }
        data_rows.push_back(std::move(row));
    }

    TableSpec spec;
    spec.name = table_name;
    spec.format = TableFormat::Delimited;
    spec.delimiter = delimiter;
    spec.has_header = false;
    return detail::build_table(graph, prov, snapshot, spec, system, run, column_names,
                               data_rows, padded);
}

}  // namespace bclearer

#endif
