// bclearer: operator entry point for the ontologization pipeline engine.
//
// Machine output (run-root hashes, DOT, trace listings, definitions) goes to
// standard output or --out files; human diagnostics go to standard error.
// Exit status: 0 success, 1 validation/verification failure, 2 I/O or
// configuration error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <bclearer/assimilate.hpp>
#include <bclearer/collect.hpp>
#include <bclearer/errors.hpp>
#include <bclearer/evolve_onto.hpp>
#include <bclearer/fixtures.hpp>
#include <bclearer/graph_io.hpp>
#include <bclearer/orchestrator.hpp>
#include <bclearer/provenance.hpp>

namespace {

using namespace bclearer;

constexpr int kOk = 0;
constexpr int kVerificationFailure = 1;
constexpr int kConfigError = 2;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::SchemaViolation:
        case ErrorCode::StageOrderViolation:
        case ErrorCode::UnknownBUnit:
        case ErrorCode::IoFailure:
        case ErrorCode::ZeroChunkSize:
        case ErrorCode::EncodingError:
            return kConfigError;
        default:
            return kVerificationFailure;
    }
}

std::string default_workspace() {
    const char* env = std::getenv("BCLEARER_WORKSPACE");
    return env ? env : "";
}

fs::path require_workspace(const std::string& value) {
    if (value.empty())
        raise(ErrorCode::IoFailure,
              "no workspace given (use --workspace or BCLEARER_WORKSPACE)");
    return fs::path(value);
}

int cmd_run(const std::string& config_path, const std::string& workspace,
            bool parallel_slices) {
    fs::path config_file(config_path);
    if (!fs::exists(config_file))
        raise(ErrorCode::IoFailure, "config " + config_file.string() + " does not exist");
    Workspace ws{require_workspace(workspace)};
    WorkspaceLock lock(ws);
    std::string config_text = read_file_bytes(config_file);
    try {
        RunReport report = run_pipeline(config_text, config_file.parent_path(), ws.root,
                                        parallel_slices);
        for (const GateOutcome& g : report.gates) {
            if (!g.pass)
                std::cerr << "gate s" << g.after_stage << " " << g.action << " [" << g.scope
                          << "] FAILED: " << g.detail << "\n";
        }
        if (!report.all_gates_passed()) {
            std::cerr << "run " << report.run.hex() << " completed with failing gates\n";
            return kVerificationFailure;
        }
        std::cerr << "run " << report.run.hex() << " completed; all gates passed\n";
        std::cout << report.run_root.hex() << "\n";
        return kOk;
    } catch (const GateFailure& f) {
        std::cerr << f.what << "\n";
        return kVerificationFailure;
    }
}

int cmd_collect(const std::string& workspace, std::uint64_t chunk_size,
                const std::vector<std::string>& files) {
    Workspace ws{require_workspace(workspace)};
    WorkspaceLock lock(ws);
    for (const std::string& file : files) {
        Snapshot snap = collect(file, chunk_size, ws.snapshots());
        std::cout << snap.id.hex() << "\t" << snap.source << "\n";
    }
    return kOk;
}

int cmd_verify(const std::string& workspace, std::optional<int> gate) {
    Workspace ws{require_workspace(workspace)};
    if (!fs::exists(ws.root) || !fs::exists(ws.snapshots()))
        raise(ErrorCode::IoFailure, "workspace " + ws.root.string() + " holds no run data");
    WorkspaceLock lock(ws);

    std::vector<std::string> failures;

    // Snapshot immutability.
    std::vector<fs::path> manifest_dirs;
    for (const auto& entry : fs::directory_iterator(ws.snapshots())) {
        if (entry.is_directory()) manifest_dirs.push_back(entry.path());
    }
    std::sort(manifest_dirs.begin(), manifest_dirs.end());
    std::size_t snapshots_checked = 0;
    for (const fs::path& dir : manifest_dirs) {
        fs::path manifest = dir / "manifest.json";
        if (!fs::exists(manifest)) continue;
        try {
            Snapshot snap =
                snapshot_from_manifest(nlohmann::json::parse(read_file_bytes(manifest)));
            ++snapshots_checked;
            SnapshotVerification check = verify_snapshot(ws.snapshots(), snap);
            if (!check.ok)
                for (const std::string& f : check.failures)
                    failures.push_back("snapshot " + snap.id.hex() + ": " + f);
        } catch (const Error& e) {
            ++snapshots_checked;
            failures.push_back("snapshot at " + dir.string() + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            ++snapshots_checked;
            failures.push_back("snapshot manifest at " + dir.string() +
                               " is unreadable: " + e.what());
        }
    }

    // Report checks against the baseline signatures.
    fs::path registry_file = ws.reports() / "registry.json";
    std::size_t signatures_checked = 0;
    if (fs::exists(registry_file)) {
        ReportRegistry registry =
            ReportRegistry::from_json(nlohmann::json::parse(read_file_bytes(registry_file)));
        for (const auto& [key, stored] : registry.signatures()) {
            const auto& [root, stage] = key;
            if (ContentId::of(stored.figures) != stored.signature.figures_hash) {
                failures.push_back("stored figures for query " + root.short_hex() +
                                   " at stage " + stage + " do not match their hash");
                continue;
            }
            if (stage == "baseline") continue;
            if (gate && stage != "s" + std::to_string(*gate)) continue;
            const auto* baseline = registry.signature(root, "baseline");
            if (!baseline) {
                failures.push_back("query " + root.short_hex() + " has no baseline");
                continue;
            }
            SignatureComparison cmp =
                compare_signatures(baseline->signature, stored.signature, baseline->figures,
                                   stored.figures);
            ++signatures_checked;
            if (!cmp.match) {
                std::string diff;
                for (const std::string& line : cmp.diff) diff += " " + line;
                failures.push_back("query " + root.short_hex() + " at stage " + stage +
                                   " diverged from baseline:" + diff);
            }
        }

        // Recompute the final-stage figures from the persisted model graph.
        // Loading re-derives every stored id, so a tampered graph file is a
        // verification failure, not a configuration error.
        fs::path model_file = ws.graphs() / "model.json";
        if (fs::exists(model_file) && fs::exists(ws.provenance_log()) && !gate) {
            try {
                UnifiedGraph model =
                    graph_from_json(nlohmann::json::parse(read_file_bytes(model_file)));
                ProvenanceStore store =
                    ProvenanceStore::parse_log(read_file_bytes(ws.provenance_log()));
                for (const auto& [root, entry] : registry.entries()) {
                    std::string last_stage;
                    for (const auto& [key, stored] : registry.signatures()) {
                        if (key.first == root && key.second != "baseline" &&
                            key.second > last_stage)
                            last_stage = key.second;
                    }
                    if (last_stage.empty()) continue;
                    const auto* stored = registry.signature(root, last_stage);
                    try {
                        Figures figures = run_query(model, entry.current, &store);
                        if (ContentId::of(figures_text(figures)) !=
                            stored->signature.figures_hash)
                            failures.push_back(
                                "query " + root.short_hex() +
                                " recomputed on the model diverges from stage " + last_stage);
                    } catch (const Error& e) {
                        failures.push_back("query " + root.short_hex() +
                                           " failed on the model: " + e.what());
                    }
                }
            } catch (const Error& e) {
                failures.push_back(std::string("model graph: ") + e.what());
            }
        }
    }

    std::cerr << "verified " << snapshots_checked << " snapshot(s), " << signatures_checked
              << " report signature(s)\n";
    if (!failures.empty()) {
        for (const std::string& f : failures) std::cerr << "FAIL " << f << "\n";
        return kVerificationFailure;
    }
    std::cerr << "all checks passed\n";
    return kOk;
}

int cmd_trace(const std::string& workspace, const std::string& id_hex,
              const std::string& direction, const std::string& format) {
    Workspace ws{require_workspace(workspace)};
    WorkspaceLock lock(ws);
    ContentId id = ContentId::parse_hex(id_hex);  // EncodingError -> exit 2

    if (!fs::exists(ws.provenance_log()))
        raise(ErrorCode::IoFailure, "workspace has no provenance.log (run a pipeline first)");
    ProvenanceStore store = ProvenanceStore::parse_log(read_file_bytes(ws.provenance_log()));

    UnifiedGraph model;
    bool have_model = false;
    fs::path model_file = ws.graphs() / "model.json";
    if (fs::exists(model_file)) {
        model = graph_from_json(nlohmann::json::parse(read_file_bytes(model_file)));
        have_model = true;
    }

    auto dir = direction == "forward" ? ProvenanceStore::Direction::Forward
                                      : ProvenanceStore::Direction::Backward;
    std::vector<std::size_t> edges =
        dir == ProvenanceStore::Direction::Backward ? store.trace_back(id)
                                                    : store.track_forward(id);
    bool known = !edges.empty() || (have_model && model.has(id));
    if (!known) {
        for (const TraceEdge& e : store.edges()) {
            for (const ContentId& s : e.sources)
                if (s == id) known = true;
            for (const ContentId& t : e.targets)
                if (t == id) known = true;
        }
    }
    if (!known) {
        std::cerr << "id " << id_hex << " is unknown to this workspace\n";
        return kVerificationFailure;
    }

    if (format == "dot") {
        ProvenanceStore::LabelFn label{have_model ? &model : nullptr};
        std::cout << store.export_ontogenic_tree(id, dir, label);
    } else {
        std::vector<std::size_t> sorted(edges);
        std::sort(sorted.begin(), sorted.end());
        std::cout << "item " << id.hex() << " ("
                  << (dir == ProvenanceStore::Direction::Backward ? "ancestry" : "descendants")
                  << ", " << sorted.size() << " edge(s))\n";
        for (std::size_t i : sorted) {
            const TraceEdge& e = store.edge(i);
            std::cout << "  [" << i << "] " << trace_kind_name(e.kind) << " " << e.transform
                      << ":";
            for (const ContentId& s : e.sources) std::cout << " " << s.short_hex();
            std::cout << " ->";
            for (const ContentId& t : e.targets) std::cout << " " << t.short_hex();
            std::cout << "\n";
        }
    }
    return kOk;
}

int cmd_definitions(const std::string& workspace) {
    Workspace ws{require_workspace(workspace)};
    WorkspaceLock lock(ws);
    fs::path model_file = ws.graphs() / "model.json";
    if (!fs::exists(model_file))
        raise(ErrorCode::IoFailure, "workspace has no assimilated model");
    UnifiedGraph model = graph_from_json(nlohmann::json::parse(read_file_bytes(model_file)));
    if (!is_seeded(model)) {
        std::cerr << "the model is not seeded: run a pipeline with an apply_seed bUnit "
                     "before extracting definitions\n";
        return kVerificationFailure;
    }
    std::cout << definitions_text(extract_definitions(model));
    return kOk;
}

int cmd_export(const std::string& workspace, const std::string& format_name,
               const std::string& out_dir) {
    Workspace ws{require_workspace(workspace)};
    WorkspaceLock lock(ws);
    fs::path model_file = ws.graphs() / "model.json";
    if (!fs::exists(model_file))
        raise(ErrorCode::IoFailure, "workspace has no assimilated model");
    UnifiedGraph model = graph_from_json(nlohmann::json::parse(read_file_bytes(model_file)));
    auto format = reuse_format_from_name(format_name);
    if (!format)
        raise(ErrorCode::SchemaViolation, "unknown export format '" + format_name + "'");
    ReuseExport result = reuse_export(model, *format, out_dir);
    for (const fs::path& f : result.files) std::cout << f.string() << "\n";
    return kOk;
}

int cmd_fixture(const std::string& out_dir, std::size_t pairs, std::size_t internal,
                std::uint64_t chunk_size) {
    FixtureSpec spec;
    spec.intercompany_pairs = pairs;
    spec.internal_transactions = internal;
    spec.chunk_size = chunk_size;
    FixtureInfo info = generate_fixture(spec, out_dir);
    std::cerr << "fixture written to " << out_dir << " (" << info.files.size()
              << " files, " << info.expected_merges << " intercompany pair(s))\n";
    std::cout << (fs::path(out_dir) / "pipeline.json").string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bCLEARer ontologization pipeline engine"};
    app.require_subcommand(1);

    std::string workspace = default_workspace();

    auto* run = app.add_subcommand("run", "Run a pipeline config against a workspace");
    std::string run_config;
    bool parallel = false;
    run->add_option("--config", run_config, "Pipeline config JSON")->required();
    run->add_option("--workspace", workspace, "Workspace directory");
    run->add_flag("--parallel-slices", parallel, "Evolve slices concurrently");

    auto* collect_cmd = app.add_subcommand("collect", "Snapshot source files");
    std::vector<std::string> collect_files;
    std::uint64_t chunk_size = std::uint64_t(4) << 20;
    collect_cmd->add_option("--workspace", workspace, "Workspace directory");
    collect_cmd->add_option("--chunk-size", chunk_size, "Chunk size in bytes");
    collect_cmd->add_option("files", collect_files, "Files to snapshot")->required();

    auto* verify = app.add_subcommand("verify", "Re-verify snapshots and report signatures");
    int gate_index = -1;
    verify->add_option("--workspace", workspace, "Workspace directory");
    verify->add_option("--gate", gate_index, "Check a single gate (stage index)");

    auto* trace = app.add_subcommand("trace", "Emit an item's ontogenic tree");
    std::string trace_id, trace_direction = "back", trace_format = "dot";
    trace->add_option("--workspace", workspace, "Workspace directory");
    trace->add_option("id", trace_id, "Content id (64 hex chars)")->required();
    trace->add_option("--direction", trace_direction, "back | forward")
        ->check(CLI::IsMember({"back", "forward"}));
    trace->add_option("--format", trace_format, "dot | text")
        ->check(CLI::IsMember({"dot", "text"}));

    auto* definitions = app.add_subcommand("definitions", "Extract type definitions");
    definitions->add_option("--workspace", workspace, "Workspace directory");

    auto* export_cmd = app.add_subcommand("export", "Export the assimilated model");
    std::string export_format = "triples", export_out;
    export_cmd->add_option("--workspace", workspace, "Workspace directory");
    export_cmd->add_option("--format", export_format, "csv-tables | triples | dot")
        ->check(CLI::IsMember({"csv-tables", "triples", "dot"}));
    export_cmd->add_option("--out", export_out, "Output directory")->required();

    auto* fixture = app.add_subcommand("fixture", "Generate the intercompany accounting corpus");
    std::string fixture_out;
    std::size_t fixture_pairs = 2, fixture_internal = 1;
    std::uint64_t fixture_chunk = 64;
    fixture->add_option("--out", fixture_out, "Destination directory")->required();
    fixture->add_option("--pairs", fixture_pairs, "Intercompany transaction pairs");
    fixture->add_option("--internal", fixture_internal, "Internal PHAS transactions");
    fixture->add_option("--chunk-size", fixture_chunk, "Collect chunk size for the config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, workspace, parallel);
        if (collect_cmd->parsed()) return cmd_collect(workspace, chunk_size, collect_files);
        if (verify->parsed())
            return cmd_verify(workspace, gate_index >= 0 ? std::optional<int>(gate_index)
                                                         : std::nullopt);
        if (trace->parsed()) return cmd_trace(workspace, trace_id, trace_direction, trace_format);
        if (definitions->parsed()) return cmd_definitions(workspace);
        if (export_cmd->parsed()) return cmd_export(workspace, export_format, export_out);
        if (fixture->parsed())
            return cmd_fixture(fixture_out, fixture_pairs, fixture_internal, fixture_chunk);
    } catch (const bclearer::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e);
    } catch (const bclearer::GateFailure& f) {
        std::cerr << f.what << "\n";
        return kVerificationFailure;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
