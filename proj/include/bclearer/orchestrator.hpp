#ifndef BCLEARER_ORCHESTRATOR_HPP
#define BCLEARER_ORCHESTRATOR_HPP

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "assimilate.hpp"
#include "collect.hpp"
#include "errors.hpp"
#include "evolve_deep.hpp"
#include "evolve_onto.hpp"
#include "fixtures.hpp"
#include "graph_io.hpp"
#include "load.hpp"
#include "provenance.hpp"
#include "query.hpp"
#include "report_registry.hpp"

namespace bclearer {

// A failed check during a run: verification and gate failures are outcomes
// distinct from configuration or I/O errors.
struct GateFailure {
    std::string what;
};

enum class StageType { Collect, Load, Evolve, Assimilate, Reuse };

inline int stage_rank(StageType t) { return static_cast<int>(t); }

inline const char* stage_type_name(StageType t) {
    switch (t) {
        case StageType::Collect: return "collect";
        case StageType::Load: return "load";
        case StageType::Evolve: return "evolve";
        case StageType::Assimilate: return "assimilate";
        case StageType::Reuse: return "reuse";
    }
    return "?";
}

inline std::optional<StageType> stage_type_from_name(std::string_view s) {
    if (s == "collect") return StageType::Collect;
    if (s == "load") return StageType::Load;
    if (s == "evolve") return StageType::Evolve;
    if (s == "assimilate") return StageType::Assimilate;
    if (s == "reuse") return StageType::Reuse;
    return std::nullopt;
}

struct BUnitConfig {
    std::string kind;
    nlohmann::json params;  // parameter file refs and scalars
};

struct StageConfig {
    StageType type = StageType::Collect;
    std::vector<BUnitConfig> bunits;
};

struct GateAction {
    std::string action;  // stats | dot-export | report-check | trial-balance
};

struct GateConfig {
    int after_stage = 0;
    std::vector<std::string> actions;
};

struct SliceTableConfig {
    std::string file;
    std::string spec;
    std::string system;
};

struct SliceConfig {
    std::string name;
    std::vector<std::string> sources;  // file globs relative to the config dir
    std::vector<SliceTableConfig> tables;
};

struct PipelineConfig {
    std::string name;
    std::string semantics_file;  // optional
    std::vector<SliceConfig> slices;
    std::vector<StageConfig> stages;
    std::vector<GateConfig> gates;
};

namespace detail {

inline const std::map<std::string, StageType>& bunit_stage_map() {
    static const std::map<std::string, StageType> kinds = {
        {"collect", StageType::Collect},
        {"load_table", StageType::Load},
        {"load_delimited_text", StageType::Load},
        {"register_report", StageType::Load},
        {"snapshot_report", StageType::Load},
        {"clean_pass", StageType::Evolve},
        {"infer_foreign_keys", StageType::Evolve},
        {"integrate_sources", StageType::Evolve},
        {"unify_types", StageType::Evolve},
        {"apply_seed", StageType::Evolve},
        {"identity_merge", StageType::Evolve},
        {"dere_transform", StageType::Evolve},
        {"extract_definitions", StageType::Evolve},
        {"assimilate", StageType::Assimilate},
        {"reuse_export", StageType::Reuse},
    };
    return kinds;
}

}  // namespace detail

// Parses and invariant-checks a pipeline config: schema errors are collected
// with their JSON paths, bUnit kinds must be known and live in their stage
// type, and stage types must respect the C, L, E, A, R order.
inline PipelineConfig validate_config(const std::string& config_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::SchemaViolation, std::string("config is not valid JSON: ") + e.what());
    }

    std::vector<std::string> errors;
    auto need = [&](const nlohmann::json& node, const char* key, const std::string& path) {
        if (!node.is_object() || !node.contains(key)) {
            errors.push_back(path + "/" + key + " is missing");
            return false;
        }
        return true;
    };

    PipelineConfig config;
    if (need(j, "name", "")) config.name = j["name"].get<std::string>();
    config.semantics_file = j.value("semantics", "");

    if (need(j, "slices", "")) {
        std::size_t i = 0;
        for (const auto& s : j["slices"]) {
            std::string path = "/slices/" + std::to_string(i);
            SliceConfig slice;
            if (need(s, "name", path)) slice.name = s["name"].get<std::string>();
            if (s.contains("sources"))
                for (const auto& g : s["sources"]) slice.sources.push_back(g.get<std::string>());
            if (s.contains("tables")) {
                std::size_t t = 0;
                for (const auto& table : s["tables"]) {
                    std::string tpath = path + "/tables/" + std::to_string(t);
                    SliceTableConfig tc;
                    if (need(table, "file", tpath)) tc.file = table["file"].get<std::string>();
                    if (need(table, "spec", tpath)) tc.spec = table["spec"].get<std::string>();
                    if (need(table, "system", tpath))
                        tc.system = table["system"].get<std::string>();
                    slice.tables.push_back(tc);
                    ++t;
                }
            }
            config.slices.push_back(std::move(slice));
            ++i;
        }
        std::set<std::string> names;
        for (const SliceConfig& s : config.slices) {
            if (!names.insert(s.name).second)
                errors.push_back("/slices: duplicate slice name '" + s.name + "'");
        }
    }

    if (need(j, "stages", "")) {
        std::size_t i = 0;
        for (const auto& s : j["stages"]) {
            std::string path = "/stages/" + std::to_string(i);
            StageConfig stage;
            if (need(s, "type", path)) {
                auto type = stage_type_from_name(s["type"].get<std::string>());
                if (!type) errors.push_back(path + "/type is not a bCLEARer stage type");
                else stage.type = *type;
            }
            if (need(s, "bunits", path)) {
                std::size_t b = 0;
                for (const auto& unit : s["bunits"]) {
                    std::string bpath = path + "/bunits/" + std::to_string(b);
                    BUnitConfig bc;
                    if (need(unit, "kind", bpath)) bc.kind = unit["kind"].get<std::string>();
                    bc.params = unit.value("params", nlohmann::json::object());
                    stage.bunits.push_back(bc);
                    ++b;
                }
            }
            config.stages.push_back(std::move(stage));
            ++i;
        }
    }

    if (j.contains("gates")) {
        std::size_t i = 0;
        for (const auto& g : j["gates"]) {
            std::string path = "/gates/" + std::to_string(i);
            GateConfig gate;
            if (need(g, "after_stage", path)) gate.after_stage = g["after_stage"].get<int>();
            if (need(g, "actions", path)) {
                for (const auto& a : g["actions"]) {
                    std::string action = a.get<std::string>();
                    if (action != "stats" && action != "dot-export" &&
                        action != "report-check" && action != "trial-balance")
                        errors.push_back(path + "/actions: unknown action '" + action + "'");
                    gate.actions.push_back(action);
                }
            }
            if (gate.after_stage < 0 ||
                gate.after_stage >= static_cast<int>(config.stages.size()))
                errors.push_back(path + "/after_stage is out of range");
            config.gates.push_back(std::move(gate));
            ++i;
        }
    }

    if (!errors.empty()) {
        std::string joined;
        for (const std::string& e : errors) {
            if (!joined.empty()) joined += "; ";
            joined += e;
        }
        raise(ErrorCode::SchemaViolation, joined);
    }

    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        for (const BUnitConfig& unit : config.stages[i].bunits) {
            auto it = detail::bunit_stage_map().find(unit.kind);
            if (it == detail::bunit_stage_map().end())
                raise(ErrorCode::UnknownBUnit, "bUnit kind '" + unit.kind + "' at /stages/" +
                                                   std::to_string(i));
            if (it->second != config.stages[i].type)
                raise(ErrorCode::SchemaViolation,
                      "bUnit '" + unit.kind + "' cannot run in a " +
                          stage_type_name(config.stages[i].type) + " stage (/stages/" +
                          std::to_string(i) + ")");
        }
    }

    int rank = 0;
    bool saw_assimilate = false;
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        int r = stage_rank(config.stages[i].type);
        if (r < rank)
            raise(ErrorCode::StageOrderViolation,
                  std::string("stage /stages/") + std::to_string(i) + " of type " +
                      stage_type_name(config.stages[i].type) +
                      " cannot follow a later-typed stage");
        rank = r;
        if (config.stages[i].type == StageType::Assimilate) saw_assimilate = true;
        if (config.stages[i].type == StageType::Reuse && !saw_assimilate)
            raise(ErrorCode::StageOrderViolation,
                  "reuse stage /stages/" + std::to_string(i) + " needs an assimilate stage");
    }
    return config;
}

// ---------------------------------------------------------------------------
// Workspace layout

struct Workspace {
    fs::path root;

    fs::path snapshots() const { return root / "snapshots"; }
    fs::path graphs() const { return root / "graphs"; }
    fs::path provenance_log() const { return root / "provenance.log"; }
    fs::path reports() const { return root / "reports"; }
    fs::path runs() const { return root / "runs"; }
    fs::path lock_file() const { return root / ".lock"; }
};

class WorkspaceLock {
public:
    explicit WorkspaceLock(const Workspace& ws) : path_(ws.lock_file()) {
        fs::create_directories(path_.parent_path());
        if (fs::exists(path_))
            raise(ErrorCode::IoFailure,
                  "workspace is locked (" + path_.string() + " exists)");
        write_file_bytes(path_, "locked\n");
    }
    ~WorkspaceLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;

private:
    fs::path path_;
};

// ---------------------------------------------------------------------------
// Run state and report

struct BUnitRecord {
    std::string slice;
    int stage = 0;
    std::string kind;
    ContentId input_graph;
    ContentId output_graph;
    long long elements_delta = 0;
    long long triples_delta = 0;
    long long edges_added = 0;
    bool no_change = false;
    double duration_ms = 0;  // annotation only, never hashed
};

struct GateOutcome {
    int after_stage = 0;
    std::string action;
    std::string scope;  // slice name or "model"
    bool pass = true;
    std::string detail;
};

struct RunReport {
    RunId run;
    ContentId config_hash;
    std::string name;
    std::vector<BUnitRecord> bunits;
    std::vector<GateOutcome> gates;
    ContentId run_root;

    bool all_gates_passed() const {
        for (const GateOutcome& g : gates)
            if (!g.pass) return false;
        return true;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json bunits_json = nlohmann::ordered_json::array();
        for (const BUnitRecord& b : bunits) {
            bunits_json.push_back({{"slice", b.slice},
                                   {"stage", b.stage},
                                   {"kind", b.kind},
                                   {"input_graph", b.input_graph.hex()},
                                   {"output_graph", b.output_graph.hex()},
                                   {"elements_delta", b.elements_delta},
                                   {"triples_delta", b.triples_delta},
                                   {"edges_added", b.edges_added},
                                   {"no_change", b.no_change},
                                   {"duration_ms", b.duration_ms}});
        }
        nlohmann::ordered_json gates_json = nlohmann::ordered_json::array();
        for (const GateOutcome& g : gates) {
            gates_json.push_back({{"after_stage", g.after_stage},
                                  {"action", g.action},
                                  {"scope", g.scope},
                                  {"pass", g.pass},
                                  {"detail", g.detail}});
        }
        return nlohmann::ordered_json{{"run", run.hex()},
                                      {"config_hash", config_hash.hex()},
                                      {"name", name},
                                      {"bunits", bunits_json},
                                      {"gates", gates_json},
                                      {"run_root", run_root.hex()}};
    }
};

namespace detail {

struct SliceState {
    std::string name;
    const SliceConfig* config = nullptr;
    UnifiedGraph graph;
    ProvenanceStore store;
    ReportRegistry registry;
    std::map<std::string, Snapshot> snapshots;  // keyed by source path
};

struct RunState {
    fs::path config_dir;
    Workspace workspace;
    Semantics semantics;
    bool have_semantics = false;
    std::vector<SliceState> slices;
    std::optional<AssimilatedModel> model;
    ProvenanceStore model_store;
    ReportRegistry model_registry;
    RunId run;
    bool run_frozen = false;
};

inline bool glob_match(std::string_view pattern, std::string_view text) {
    // * matches any run of characters except '/'; ? matches one such char.
    if (pattern.empty()) return text.empty();
    if (pattern[0] == '*') {
        for (std::size_t skip = 0; skip <= text.size(); ++skip) {
            if (glob_match(pattern.substr(1), text.substr(skip))) return true;
            if (skip < text.size() && text[skip] == '/') break;
        }
        return false;
    }
    if (text.empty()) return false;
    if (pattern[0] == '?' && text[0] != '/') return glob_match(pattern.substr(1), text.substr(1));
    if (pattern[0] != text[0]) return false;
    return glob_match(pattern.substr(1), text.substr(1));
}

inline std::vector<std::string> expand_glob(const fs::path& base, const std::string& pattern) {
    std::vector<std::string> out;
    if (pattern.find('*') == std::string::npos && pattern.find('?') == std::string::npos) {
        if (fs::exists(base / pattern)) out.push_back(pattern);
        return out;
    }
    if (!fs::exists(base)) return out;
    for (const auto& entry : fs::recursive_directory_iterator(base)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), base).generic_string();
        if (glob_match(pattern, rel)) out.push_back(rel);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string stage_label(int stage_index) { return "s" + std::to_string(stage_index); }

inline TrialBalanceScope scope_for_system(const Semantics::System& sys) {
    ContentId dataset = element_id(ElementKind::Dataset, {}, sys.system);
    ContentId table = element_id(ElementKind::Table, {dataset}, sys.postings_table);
    TrialBalanceScope scope;
    scope.company = sys.company;
    scope.target = table;
    scope.drcr_attr = element_id(ElementKind::Column, {table}, sys.drcr_column);
    scope.amount_attr = element_id(ElementKind::Column, {table}, sys.amount_column);
    scope.debit_codes = sys.debit_codes;
    scope.credit_codes = sys.credit_codes;
    return scope;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gate execution (read-only)

inline std::vector<GateOutcome> run_gate(const GateConfig& gate, detail::RunState& state) {
    std::vector<GateOutcome> outcomes;

    struct View {
        std::string scope;
        const UnifiedGraph* graph;
        const ProvenanceStore* store;
        ReportRegistry* registry;
    };
    std::vector<View> views;
    if (state.model) {
        views.push_back(View{"model", &state.model->graph, &state.model_store,
                             &state.model_registry});
    } else {
        for (detail::SliceState& slice : state.slices)
            views.push_back(View{slice.name, &slice.graph, &slice.store, &slice.registry});
    }

    for (const std::string& action : gate.actions) {
        for (View& view : views) {
            GateOutcome outcome;
            outcome.after_stage = gate.after_stage;
            outcome.action = action;
            outcome.scope = view.scope;

            if (action == "stats") {
                std::map<std::string, std::size_t> by_kind;
                std::map<std::string, std::size_t> by_generality;
                std::size_t active_triples = 0;
                for (const auto& [id, e] : view.graph->elements()) {
                    if (!view.graph->is_active(id)) continue;
                    ++by_kind[kind_name(e.kind)];
                    auto g = view.graph->generality(id);
                    if (g) ++by_generality[generality_name(*g)];
                }
                for (const auto& [id, t] : view.graph->triples()) {
                    if (view.graph->is_active(id)) ++active_triples;
                }
                std::string detail_text;
                for (const auto& [k, n] : by_kind)
                    detail_text += k + "=" + std::to_string(n) + " ";
                for (const auto& [g, n] : by_generality)
                    detail_text += g + "=" + std::to_string(n) + " ";
                detail_text += "triples=" + std::to_string(active_triples);
                outcome.detail = detail_text;
            } else if (action == "dot-export") {
                fs::path dir = state.workspace.reports() / "dot";
                fs::path file = dir / (detail::stage_label(gate.after_stage) + "__" +
                                       view.scope + ".dot");
                write_file_bytes(file, view.graph->export_dot());
                outcome.detail =
                    fs::relative(file, state.workspace.root).generic_string();
            } else if (action == "report-check") {
                try {
                    std::size_t checked = 0;
                    std::vector<std::string> failures;
                    std::vector<ContentId> roots;
                    for (const auto& [root, entry] : view.registry->entries())
                        roots.push_back(root);
                    for (const ContentId& root : roots) {
                        const auto* baseline = view.registry->signature(root, "baseline");
                        if (!baseline) {
                            failures.push_back("query " + root.short_hex() +
                                               " has no baseline");
                            continue;
                        }
                        ReportSignature now = view.registry->snapshot_report(
                            *view.graph, root, detail::stage_label(gate.after_stage),
                            view.store);
                        const auto* stored = view.registry->signature(
                            root, detail::stage_label(gate.after_stage));
                        SignatureComparison cmp = compare_signatures(
                            baseline->signature, now, baseline->figures,
                            stored ? stored->figures : std::string());
                        ++checked;
                        if (!cmp.match) {
                            std::string diff;
                            for (const std::string& line : cmp.diff) diff += " " + line;
                            failures.push_back("query " + root.short_hex() +
                                               " diverged:" + diff);
                        }
                    }
                    if (failures.empty()) {
                        outcome.detail = std::to_string(checked) + " signature(s) preserved";
                    } else {
                        outcome.pass = false;
                        for (std::size_t i = 0; i < failures.size(); ++i) {
                            if (i) outcome.detail += "; ";
                            outcome.detail += failures[i];
                        }
                    }
                } catch (const Error& e) {
                    outcome.pass = false;
                    outcome.detail = e.what();
                }
            } else if (action == "trial-balance") {
                if (!state.have_semantics) {
                    outcome.pass = false;
                    outcome.detail = "no semantics configured for trial balance";
                } else {
                    try {
                        std::vector<std::string> parts;
                        bool all_ok = true;
                        for (const Semantics::System& sys : state.semantics.systems) {
                            TrialBalanceScope scope = detail::scope_for_system(sys);
                            ContentId target =
                                view::resolve_in(*view.graph, view.store, scope.target);
                            if (!view.graph->has_element(target)) continue;  // not in slice
                            TrialBalanceTotals totals =
                                trial_balance(*view.graph, scope, view.store);
                            bool ok = totals.balanced();
                            all_ok = all_ok && ok;
                            parts.push_back(sys.company + ": debit=" +
                                            format_minor_units(totals.debit()) + " credit=" +
                                            format_minor_units(totals.credit()) +
                                            (ok ? "" : " UNBALANCED"));
                        }
                        std::string detail_text;
                        for (std::size_t i = 0; i < parts.size(); ++i) {
                            if (i) detail_text += "; ";
                            detail_text += parts[i];
                        }
                        outcome.pass = all_ok;
                        outcome.detail = detail_text;
                    } catch (const Error& e) {
                        outcome.pass = false;
                        outcome.detail = e.what();
                    }
                }
            }
            outcomes.push_back(std::move(outcome));
        }
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// Pipeline execution

namespace detail {

inline nlohmann::json read_json_file(const fs::path& path) {
    return nlohmann::json::parse(read_file_bytes(path));
}

inline ReportRegistry merge_registries(const ReportRegistry& a, const ReportRegistry& b) {
    nlohmann::json ja = a.to_json();
    nlohmann::json jb = b.to_json();
    for (const auto& q : jb.at("queries")) ja["queries"].push_back(q);
    for (const auto& s : jb.at("signatures")) ja["signatures"].push_back(s);
    return ReportRegistry::from_json(ja);
}

inline void execute_slice_bunit(RunState& state, SliceState& slice, const BUnitConfig& unit,
                                int stage_index) {
    const fs::path& config_dir = state.config_dir;
    if (unit.kind == "collect") {
        std::uint64_t chunk_size = unit.params.value("chunk_size", std::uint64_t(4) << 20);
        for (const std::string& pattern : slice.config->sources) {
            std::vector<std::string> matches = expand_glob(config_dir, pattern);
            if (matches.empty())
                raise(ErrorCode::IoFailure, "slice " + slice.name + ": source '" + pattern +
                                                "' matches no file");
            for (const std::string& rel : matches) {
                Snapshot snap = collect(config_dir / rel, chunk_size,
                                        state.workspace.snapshots(), rel);
                SnapshotVerification check =
                    verify_snapshot(state.workspace.snapshots(), snap);
                if (!check.ok) {
                    std::string detail = "collect: snapshot of " + rel + " failed verification";
                    for (const std::string& f : check.failures) detail += "; " + f;
                    throw GateFailure{detail};
                }
                slice.snapshots[rel] = snap;
            }
        }
        return;
    }
    if (unit.kind == "load_table" || unit.kind == "load_delimited_text") {
        for (const SliceTableConfig& table : slice.config->tables) {
            auto snap_it = slice.snapshots.find(table.file);
            if (snap_it == slice.snapshots.end())
                raise(ErrorCode::IoFailure, "slice " + slice.name + ": no snapshot for " +
                                                table.file + " (collect it first)");
            SnapshotVerification check =
                verify_snapshot(state.workspace.snapshots(), snap_it->second);
            if (!check.ok) {
                std::string detail = "load: snapshot of " + table.file + " failed verification";
                for (const std::string& f : check.failures) detail += "; " + f;
                throw GateFailure{detail};
            }
            std::string bytes =
                read_snapshot_bytes(state.workspace.snapshots(), snap_it->second);
            if (unit.kind == "load_table") {
                TableSpec spec = TableSpec::from_json(read_json_file(config_dir / table.spec));
                load_table(slice.graph, slice.store, snap_it->second, bytes, spec,
                           table.system, state.run);
            } else {
                std::string delim = unit.params.value("delimiter", "|");
                load_delimited_text(slice.graph, slice.store, snap_it->second, bytes,
                                    delim.empty() ? '|' : delim[0], table.system, state.run,
                                    fs::path(table.file).stem().string());
            }
        }
        return;
    }
    if (unit.kind == "register_report") {
        std::string dir = unit.params.value("queries", "queries");
        fs::path queries_dir = config_dir / dir;
        if (!fs::exists(queries_dir))
            raise(ErrorCode::IoFailure, "query directory " + queries_dir.string() + " missing");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(queries_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            ReportQuery q = ReportQuery::from_json(read_json_file(f));
            slice.registry.register_report(slice.graph, &slice.store, q, slice.name);
        }
        return;
    }
    if (unit.kind == "snapshot_report") {
        std::vector<ContentId> roots;
        for (const auto& [root, entry] : slice.registry.entries()) roots.push_back(root);
        for (const ContentId& root : roots)
            slice.registry.snapshot_report(slice.graph, root, "baseline", &slice.store);
        return;
    }
    if (unit.kind == "clean_pass") {
        clean_pass(slice.graph, slice.store, state.run);
        return;
    }
    if (unit.kind == "infer_foreign_keys") {
        double min_inclusion = unit.params.value("min_inclusion", 1.0);
        bool require_unique = unit.params.value("require_unique", true);
        infer_foreign_keys(slice.graph, slice.store, state.run, min_inclusion, require_unique);
        return;
    }
    if (unit.kind == "integrate_sources") {
        std::string file = unit.params.value("mapping", "");
        if (file.empty())
            raise(ErrorCode::SchemaViolation, "integrate_sources needs a mapping param");
        IntegrationMapping mapping =
            IntegrationMapping::from_json(read_json_file(config_dir / file));
        integrate_sources(slice.graph, slice.store, state.run, mapping, &slice.registry);
        return;
    }
    if (unit.kind == "unify_types") {
        unify_types(slice.graph, slice.store, state.run);
        return;
    }
    if (unit.kind == "apply_seed") {
        apply_seed(slice.graph, slice.store, state.run);
        return;
    }
    if (unit.kind == "identity_merge") {
        std::string file = unit.params.value("criterion", "");
        if (file.empty())
            raise(ErrorCode::SchemaViolation, "identity_merge needs a criterion param");
        IdentityCriterion criterion =
            IdentityCriterion::from_json(read_json_file(config_dir / file));
        if (!state.have_semantics)
            raise(ErrorCode::SchemaViolation, "identity_merge needs config-level semantics");
        identity_merge(slice.graph, slice.store, state.run, criterion, state.semantics);
        return;
    }
    if (unit.kind == "dere_transform") {
        std::string file = unit.params.value("criterion", "");
        std::vector<std::string> scope;
        if (!file.empty()) {
            IdentityCriterion criterion =
                IdentityCriterion::from_json(read_json_file(config_dir / file));
            scope = criterion.scope;
        }
        if (!state.have_semantics)
            raise(ErrorCode::SchemaViolation, "dere_transform needs config-level semantics");
        dere_transform(slice.graph, slice.store, state.run, scope, state.semantics,
                       &slice.registry);
        return;
    }
    if (unit.kind == "extract_definitions") {
        std::vector<Definition> defs = extract_definitions(slice.graph);
        write_file_bytes(state.workspace.reports() / ("definitions__" + slice.name + ".txt"),
                         definitions_text(defs));
        return;
    }
    raise(ErrorCode::UnknownBUnit, "bUnit kind '" + unit.kind + "' is not executable here");
    (void)stage_index;
}

inline void execute_model_bunit(RunState& state, const BUnitConfig& unit) {
    if (unit.kind == "assimilate") {
        if (!state.model) {
            state.model.emplace();
            // Rebuild the run-level store deterministically: slice logs in
            // sorted slice order.
            for (const SliceState& slice : state.slices) {
                for (const TraceEdge& e : slice.store.edges()) {
                    state.model_store.record_trace(e.sources, e.targets, e.transform, e.run,
                                                   e.kind);
                }
                state.model_registry = merge_registries(state.model_registry, slice.registry);
            }
        }
        for (const SliceState& slice : state.slices) {
            assimilate(*state.model, slice.graph);
        }
        return;
    }
    if (unit.kind == "reuse_export") {
        if (!state.model)
            raise(ErrorCode::SchemaViolation, "reuse_export needs an assimilated model");
        std::string format_name = unit.params.value("format", "triples");
        auto format = reuse_format_from_name(format_name);
        if (!format)
            raise(ErrorCode::SchemaViolation, "unknown reuse format '" + format_name + "'");
        std::string dest = unit.params.value("dest", "export");
        reuse_export(state.model->graph, *format, state.workspace.root / dest);
        return;
    }
    raise(ErrorCode::UnknownBUnit, "bUnit kind '" + unit.kind + "' is not executable here");
}

}  // namespace detail

// Executes stages in order per slice, records provenance, runs the gates,
// persists the workspace, and reports a run-root hash that is a pure
// function of the config and the collected inputs.
inline RunReport run_pipeline(const std::string& config_text, const fs::path& config_dir,
                              const fs::path& workspace_root, bool parallel_slices = false) {
    PipelineConfig config = validate_config(config_text);

    detail::RunState state;
    state.config_dir = config_dir;
    state.workspace.root = workspace_root;
    fs::create_directories(workspace_root);

    if (!config.semantics_file.empty()) {
        state.semantics =
            Semantics::from_json(detail::read_json_file(config_dir / config.semantics_file));
        state.have_semantics = true;
    }

    for (const SliceConfig& slice : config.slices) {
        detail::SliceState s;
        s.name = slice.name;
        s.config = &slice;
        state.slices.push_back(std::move(s));
    }
    std::sort(state.slices.begin(), state.slices.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });

    RunReport report;
    report.name = config.name;
    report.config_hash = ContentId::of(config_text);

    std::vector<ContentId> output_graphs;

    auto freeze_run_id = [&] {
        if (state.run_frozen) return;
        std::vector<ContentId> snapshot_ids;
        for (const detail::SliceState& slice : state.slices)
            for (const auto& [src, snap] : slice.snapshots) snapshot_ids.push_back(snap.id);
        state.run = make_run_id(report.config_hash, snapshot_ids);
        state.run_frozen = true;
        report.run = state.run;
    };

    for (int stage_index = 0; stage_index < static_cast<int>(config.stages.size());
         ++stage_index) {
        const StageConfig& stage = config.stages[stage_index];
        if (stage.type != StageType::Collect) freeze_run_id();

        if (stage.type == StageType::Assimilate || stage.type == StageType::Reuse) {
            for (const BUnitConfig& unit : stage.bunits) {
                auto t0 = std::chrono::steady_clock::now();
                ContentId before = state.model ? state.model->graph.content_hash()
                                               : UnifiedGraph().content_hash();
                std::size_t edges_before = state.model_store.size();
                std::size_t elements_before =
                    state.model ? state.model->graph.elements().size() : 0;
                std::size_t triples_before =
                    state.model ? state.model->graph.triples().size() : 0;
                try {
                    detail::execute_model_bunit(state, unit);
                } catch (Error& e) {
                    raise(e.code(), std::string(e.what()) + " [stage " +
                                        std::to_string(stage_index) + " bUnit " + unit.kind +
                                        "]");
                }
                BUnitRecord rec;
                rec.slice = "model";
                rec.stage = stage_index;
                rec.kind = unit.kind;
                rec.input_graph = before;
                rec.output_graph = state.model ? state.model->graph.content_hash()
                                               : UnifiedGraph().content_hash();
                rec.elements_delta = static_cast<long long>(
                                         state.model ? state.model->graph.elements().size() : 0) -
                                     static_cast<long long>(elements_before);
                rec.triples_delta = static_cast<long long>(
                                        state.model ? state.model->graph.triples().size() : 0) -
                                    static_cast<long long>(triples_before);
                rec.edges_added =
                    static_cast<long long>(state.model_store.size() - edges_before);
                rec.no_change = rec.elements_delta == 0 && rec.triples_delta == 0 &&
                                rec.edges_added == 0;
                rec.duration_ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
                output_graphs.push_back(rec.output_graph);
                report.bunits.push_back(std::move(rec));
            }
        } else {
            auto run_slice_stage = [&](detail::SliceState& slice,
                                       std::vector<BUnitRecord>& records) {
                for (const BUnitConfig& unit : stage.bunits) {
                    auto t0 = std::chrono::steady_clock::now();
                    BUnitRecord rec;
                    rec.slice = slice.name;
                    rec.stage = stage_index;
                    rec.kind = unit.kind;
                    rec.input_graph = slice.graph.content_hash();
                    std::size_t edges_before = slice.store.size();
                    std::size_t elements_before = slice.graph.elements().size();
                    std::size_t triples_before = slice.graph.triples().size();
                    try {
                        detail::execute_slice_bunit(state, slice, unit, stage_index);
                    } catch (Error& e) {
                        raise(e.code(), std::string(e.what()) + " [slice " + slice.name +
                                            " stage " + std::to_string(stage_index) +
                                            " bUnit " + unit.kind + "]");
                    }
                    rec.output_graph = slice.graph.content_hash();
                    rec.elements_delta =
                        static_cast<long long>(slice.graph.elements().size()) -
                        static_cast<long long>(elements_before);
                    rec.triples_delta = static_cast<long long>(slice.graph.triples().size()) -
                                        static_cast<long long>(triples_before);
                    rec.edges_added =
                        static_cast<long long>(slice.store.size() - edges_before);
                    rec.no_change = rec.elements_delta == 0 && rec.triples_delta == 0 &&
                                    rec.edges_added == 0;
                    rec.duration_ms = std::chrono::duration<double, std::milli>(
                                          std::chrono::steady_clock::now() - t0)
                                          .count();
                    records.push_back(std::move(rec));
                }
            };

            std::vector<std::vector<BUnitRecord>> per_slice(state.slices.size());
            if (parallel_slices && state.slices.size() > 1) {
                std::vector<std::thread> threads;
                std::vector<std::exception_ptr> errors(state.slices.size());
                for (std::size_t i = 0; i < state.slices.size(); ++i) {
                    threads.emplace_back([&, i] {
                        try {
                            run_slice_stage(state.slices[i], per_slice[i]);
                        } catch (...) {
                            errors[i] = std::current_exception();
                        }
                    });
                }
                for (std::thread& t : threads) t.join();
                for (const std::exception_ptr& e : errors)
                    if (e) std::rethrow_exception(e);
            } else {
                for (std::size_t i = 0; i < state.slices.size(); ++i)
                    run_slice_stage(state.slices[i], per_slice[i]);
            }
            for (std::vector<BUnitRecord>& records : per_slice) {
                for (BUnitRecord& rec : records) {
                    output_graphs.push_back(rec.output_graph);
                    report.bunits.push_back(std::move(rec));
                }
            }
        }

        // Persist the graphs this stage produced, then run its gates.
        for (const detail::SliceState& slice : state.slices) {
            write_file_bytes(state.workspace.graphs() /
                                 (slice.name + "__" + detail::stage_label(stage_index) +
                                  ".json"),
                             graph_to_json(slice.graph).dump(2) + "\n");
        }
        if (state.model) {
            write_file_bytes(state.workspace.graphs() /
                                 ("model__" + detail::stage_label(stage_index) + ".json"),
                             graph_to_json(state.model->graph).dump(2) + "\n");
        }

        for (const GateConfig& gate : config.gates) {
            if (gate.after_stage != stage_index) continue;
            std::vector<GateOutcome> outcomes = run_gate(gate, state);
            report.gates.insert(report.gates.end(), outcomes.begin(), outcomes.end());
        }
    }
    freeze_run_id();

    // Run root: pure function of the ordered bUnit outputs.
    {
        Sha256 h;
        h.update(std::string_view("root1|"));
        for (const ContentId& g : output_graphs) {
            h.update(g.hex());
            h.update(std::string_view(","));
        }
        report.run_root = ContentId(h.finish());
    }

    // Final workspace persistence.
    if (state.model) {
        write_file_bytes(state.workspace.graphs() / "model.json",
                         graph_to_json(state.model->graph).dump(2) + "\n");
        write_file_bytes(state.workspace.provenance_log(), state.model_store.serialize_log());
        write_file_bytes(state.workspace.reports() / "registry.json",
                         state.model_registry.to_json().dump(2) + "\n");
    } else {
        ProvenanceStore merged;
        ReportRegistry merged_registry;
        for (const detail::SliceState& slice : state.slices) {
            for (const TraceEdge& e : slice.store.edges())
                merged.record_trace(e.sources, e.targets, e.transform, e.run, e.kind);
            merged_registry = detail::merge_registries(merged_registry, slice.registry);
        }
        write_file_bytes(state.workspace.provenance_log(), merged.serialize_log());
        write_file_bytes(state.workspace.reports() / "registry.json",
                         merged_registry.to_json().dump(2) + "\n");
    }
    write_file_bytes(state.workspace.runs() / report.run.hex() / "report.json",
                     report.to_json().dump(2) + "\n");
    return report;
}

}  // namespace bclearer

#endif
