#ifndef BCLEARER_EVOLVE_ONTO_HPP
#define BCLEARER_EVOLVE_ONTO_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "evolve_deep.hpp"
#include "graph.hpp"
#include "provenance.hpp"
#include "query.hpp"
#include "report_registry.hpp"

namespace bclearer {

// Shared accounting vocabulary: which harmonized attribute labels carry the
// debit/credit mark, the owning company and the counterparty, plus the raw
// per-system names the trial-balance scopes are anchored to.
struct Semantics {
    struct System {
        std::string system;
        std::string company;
        std::string postings_table;
        std::string drcr_column;
        std::string amount_column;
        std::vector<std::string> debit_codes;
        std::vector<std::string> credit_codes;
    };

    std::string drcr_label = "dr_cr";
    std::string company_label = "company";
    std::string counterparty_label = "counterparty";
    std::string amount_label = "amount";
    std::string debit_value = "debit";
    std::string credit_value = "credit";
    std::vector<System> systems;

    static Semantics from_json(const nlohmann::json& j) {
        Semantics s;
        if (j.contains("harmonized")) {
            const auto& h = j.at("harmonized");
            s.drcr_label = h.value("dr_cr", s.drcr_label);
            s.company_label = h.value("company", s.company_label);
            s.counterparty_label = h.value("counterparty", s.counterparty_label);
            s.amount_label = h.value("amount", s.amount_label);
        }
        s.debit_value = j.value("debit", s.debit_value);
        s.credit_value = j.value("credit", s.credit_value);
        if (j.contains("systems")) {
            for (const auto& sys : j.at("systems")) {
                System out;
                out.system = sys.at("system").get<std::string>();
                out.company = sys.at("company").get<std::string>();
                out.postings_table = sys.at("postings_table").get<std::string>();
                out.drcr_column = sys.at("drcr_column").get<std::string>();
                out.amount_column = sys.at("amount_column").get<std::string>();
                for (const auto& c : sys.at("debit_codes"))
                    out.debit_codes.push_back(c.get<std::string>());
                for (const auto& c : sys.at("credit_codes"))
                    out.credit_codes.push_back(c.get<std::string>());
                s.systems.push_back(std::move(out));
            }
        }
        return s;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json systems_json = nlohmann::ordered_json::array();
        for (const System& sys : systems) {
            systems_json.push_back({{"system", sys.system},
                                    {"company", sys.company},
                                    {"postings_table", sys.postings_table},
                                    {"drcr_column", sys.drcr_column},
                                    {"amount_column", sys.amount_column},
                                    {"debit_codes", sys.debit_codes},
                                    {"credit_codes", sys.credit_codes}});
        }
        return nlohmann::ordered_json{
            {"harmonized",
             {{"dr_cr", drcr_label},
              {"company", company_label},
              {"counterparty", counterparty_label},
              {"amount", amount_label}}},
            {"debit", debit_value},
            {"credit", credit_value},
            {"systems", systems_json}};
    }

    const System* system_named(const std::string& name) const {
        for (const System& s : systems)
            if (s.system == name) return &s;
        return nullptr;
    }
};

namespace detail {

inline std::optional<ContentId> attribute_by_label(const UnifiedGraph& graph,
                                                   const ContentId& type_node,
                                                   const std::string& label) {
    for (const ContentId& child : graph.children_of(type_node)) {
        if (!graph.is_active(child)) continue;
        const Element& e = graph.element(child);
        if (e.kind == ElementKind::RelationType && e.payload == label) return child;
    }
    return std::nullopt;
}

inline std::vector<ContentId> active_type_nodes(const UnifiedGraph& graph) {
    std::vector<ContentId> out;
    for (const auto& [id, e] : graph.elements()) {
        if (e.kind == ElementKind::TypeNode && graph.is_active(id)) out.push_back(id);
    }
    return out;
}

inline std::vector<ContentId> types_with_label(const UnifiedGraph& graph,
                                               const std::string& label) {
    std::vector<ContentId> out;
    for (const ContentId& t : active_type_nodes(graph)) {
        if (graph.element(t).payload == label) out.push_back(t);
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BORO seed

struct SeedReport {
    std::size_t classified = 0;
};

inline ContentId seed_category_for(ElementKind kind) {
    switch (kind) {
        case ElementKind::InstanceNode: return wellknown::individual_category();
        case ElementKind::TypeNode: return wellknown::type_category();
        case ElementKind::RelationType: return wellknown::tuple_category();
        default:
            raise(ErrorCode::SchemaViolation,
                  std::string(kind_name(kind)) + " has no seed category");
    }
}

// Inserts the minimal top level (Individual, Type, Tuple plus the reserved
// relations) and classifies every active unified element under exactly one
// category. Rejects a second application rather than re-applying.
inline SeedReport apply_seed(UnifiedGraph& graph, ProvenanceStore& prov, const RunId& run) {
    if (graph.has_element(wellknown::individual_category()) ||
        graph.has_element(wellknown::type_category()) ||
        graph.has_element(wellknown::tuple_category()))
        raise(ErrorCode::AlreadySeeded, "seed categories are already present");

    auto seed_element = [&](ElementKind kind, const std::string& payload) {
        ContentId id = graph.add_element(kind, {}, payload, "boro-seed");
        graph.set_generality(id, Generality::Metadata);
        prov.record_trace({}, {id}, "apply_seed", run, TraceKind::Seeded);
        return id;
    };

    seed_element(ElementKind::SeedCategory, "boro:Individual");
    seed_element(ElementKind::SeedCategory, "boro:Type");
    seed_element(ElementKind::SeedCategory, "boro:Tuple");
    if (!graph.has_element(wellknown::instance_of()))
        seed_element(ElementKind::RelationType, "boro:instanceOf");
    seed_element(ElementKind::RelationType, "boro:subtypeOf");
    seed_element(ElementKind::RelationType, "boro:wholePart");
    seed_element(ElementKind::RelationType, "boro:debitRel");
    seed_element(ElementKind::RelationType, "boro:creditRel");

    SeedReport report;
    std::vector<std::pair<ContentId, ContentId>> classifications;
    for (const auto& [id, e] : graph.elements()) {
        if (!graph.is_active(id)) continue;
        if (e.kind != ElementKind::InstanceNode && e.kind != ElementKind::TypeNode &&
            e.kind != ElementKind::RelationType)
            continue;
        classifications.emplace_back(id, seed_category_for(e.kind));
    }
    for (const auto& [id, category] : classifications) {
        graph.add_triple(wellknown::instance_of(), id, category);
        ++report.classified;
    }
    return report;
}

// Every active InstanceNode/TypeNode/RelationType must carry exactly one
// active classification triple to a seed category.
inline bool seed_classification_total(const UnifiedGraph& graph) {
    for (const auto& [id, e] : graph.elements()) {
        if (!graph.is_active(id)) continue;
        if (e.kind != ElementKind::InstanceNode && e.kind != ElementKind::TypeNode &&
            e.kind != ElementKind::RelationType)
            continue;
        std::size_t count = 0;
        for (const ContentId& tid : graph.triples_with_subject(id)) {
            if (!graph.is_active(tid)) continue;
            const Triple& t = graph.triple(tid);
            if (t.predicate != wellknown::instance_of()) continue;
            if (graph.element(t.object).kind == ElementKind::SeedCategory) ++count;
        }
        if (count != 1) return false;
    }
    return true;
}

inline bool is_seeded(const UnifiedGraph& graph) {
    return graph.has_element(wellknown::individual_category());
}

// ---------------------------------------------------------------------------
// Identity criteria and merging

struct IdentityCriterion {
    std::vector<std::string> scope;             // type labels the criterion applies to
    std::vector<std::string> equal_attributes;  // e.g. amount, date
    bool counterparty_swap = false;
    bool drcr_opposed = false;

    static IdentityCriterion from_json(const nlohmann::json& j) {
        IdentityCriterion c;
        for (const auto& s : j.at("scope")) c.scope.push_back(s.get<std::string>());
        for (const auto& a : j.at("equal_attributes"))
            c.equal_attributes.push_back(a.get<std::string>());
        if (j.contains("mirror")) {
            c.counterparty_swap = j.at("mirror").value("counterparty_swap", false);
            c.drcr_opposed = j.at("mirror").value("drcr_opposed", false);
        }
        return c;
    }

    nlohmann::ordered_json to_json() const {
        return nlohmann::ordered_json{
            {"scope", scope},
            {"equal_attributes", equal_attributes},
            {"mirror",
             {{"counterparty_swap", counterparty_swap}, {"drcr_opposed", drcr_opposed}}}};
    }
};

struct MergeResult {
    ContentId merged;
    std::vector<ContentId> sources;
};

namespace detail {

struct ScopedInstance {
    ContentId id;
    ContentId type_node;
    std::map<std::string, std::string> key_values;  // equal_attributes by label
    std::string drcr;
    std::string company;
    std::string counterparty;
};

// The pairwise symmetric matcher the criterion declares.
inline bool criterion_match(const IdentityCriterion& criterion, const Semantics& semantics,
                            const ScopedInstance& a, const ScopedInstance& b) {
    if (a.id == b.id) return false;
    for (const std::string& label : criterion.equal_attributes) {
        auto ia = a.key_values.find(label);
        auto ib = b.key_values.find(label);
        if (ia == a.key_values.end() || ib == b.key_values.end()) return false;
        if (ia->second.empty() || ia->second != ib->second) return false;
    }
    if (criterion.counterparty_swap) {
        if (a.counterparty.empty() || b.counterparty.empty()) return false;
        if (a.company != b.counterparty || b.company != a.counterparty) return false;
    }
    if (criterion.drcr_opposed) {
        bool a_debit = a.drcr == semantics.debit_value;
        bool a_credit = a.drcr == semantics.credit_value;
        bool b_debit = b.drcr == semantics.debit_value;
        bool b_credit = b.drcr == semantics.credit_value;
        if (!((a_debit && b_credit) || (a_credit && b_debit))) return false;
    }
    return true;
}

}  // namespace detail

// Applies an identity criterion to the scoped types and merges each matched
// pair into one InstanceNode that carries every source attribute (the
// per-system attribute elements keep the perspectives apart). The merged id
// derives from the sorted source ids, so input order cannot matter.
inline std::vector<MergeResult> identity_merge(UnifiedGraph& graph, ProvenanceStore& prov,
                                               const RunId& run,
                                               const IdentityCriterion& criterion,
                                               const Semantics& semantics) {
    std::vector<detail::ScopedInstance> instances;
    for (const std::string& label : criterion.scope) {
        std::vector<ContentId> types = detail::types_with_label(graph, label);
        if (types.empty())
            raise(ErrorCode::DanglingReference,
                  "criterion scope '" + label + "' matches no active type");
        for (const ContentId& type_node : types) {
            std::map<std::string, ContentId> attrs;
            for (const std::string& attr_label : criterion.equal_attributes) {
                auto attr = detail::attribute_by_label(graph, type_node, attr_label);
                if (!attr)
                    raise(ErrorCode::DanglingReference,
                          "criterion attribute '" + attr_label + "' missing on type '" +
                              label + "'");
                attrs[attr_label] = *attr;
            }
            auto drcr = detail::attribute_by_label(graph, type_node, semantics.drcr_label);
            auto company = detail::attribute_by_label(graph, type_node, semantics.company_label);
            auto counterparty =
                detail::attribute_by_label(graph, type_node, semantics.counterparty_label);
            if (criterion.drcr_opposed && !drcr)
                raise(ErrorCode::DanglingReference,
                      "mirror needs attribute '" + semantics.drcr_label + "' on type '" +
                          label + "'");
            if (criterion.counterparty_swap && (!company || !counterparty))
                raise(ErrorCode::DanglingReference,
                      "mirror needs company/counterparty attributes on type '" + label + "'");

            for (const ContentId& inst : view::extent(graph, type_node)) {
                detail::ScopedInstance s;
                s.id = inst;
                s.type_node = type_node;
                for (const auto& [attr_label, attr] : attrs) {
                    auto v = view::single_value(graph, inst, attr);
                    if (v) s.key_values[attr_label] = unicode::trim_whitespace(*v);
                }
                auto read = [&](const std::optional<ContentId>& attr) {
                    if (!attr) return std::string();
                    auto v = view::single_value(graph, inst, *attr);
                    return v ? unicode::trim_whitespace(*v) : std::string();
                };
                s.drcr = read(drcr);
                s.company = read(company);
                s.counterparty = read(counterparty);
                instances.push_back(std::move(s));
            }
        }
    }
    std::sort(instances.begin(), instances.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    // Maximal match groups = connected components of the pairwise relation.
    std::map<ContentId, std::size_t> index;
    for (std::size_t i = 0; i < instances.size(); ++i) index[instances[i].id] = i;
    std::vector<std::size_t> component(instances.size());
    for (std::size_t i = 0; i < component.size(); ++i) component[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (component[x] != x) x = component[x] = component[component[x]];
        return x;
    };
    bool any_match = false;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        for (std::size_t j = i + 1; j < instances.size(); ++j) {
            if (detail::criterion_match(criterion, semantics, instances[i], instances[j])) {
                component[find(i)] = find(j);
                any_match = true;
            }
        }
    }
    (void)any_match;

    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < instances.size(); ++i) groups[find(i)].push_back(i);

    std::vector<MergeResult> results;
    for (const auto& [root, members] : groups) {
        if (members.size() < 2) continue;
        if (members.size() > 2) {
            std::string ids;
            for (std::size_t m : members) ids += " " + instances[m].id.short_hex();
            raise(ErrorCode::OverloadedMatch,
                  "criterion matched a group of " + std::to_string(members.size()) +
                      " items:" + ids);
        }

        std::vector<ContentId> sources{instances[members[0]].id, instances[members[1]].id};
        std::sort(sources.begin(), sources.end());
        std::string payload = "merged:" + sources[0].hex() + "," + sources[1].hex();
        ContentId merged =
            graph.add_element(ElementKind::InstanceNode, {}, payload, "identity_merge");
        graph.set_generality(merged, Generality::Data);
        prov.record_trace(sources, {merged}, "identity_merge", run, TraceKind::Merged);

        // The merged item inherits every active triple of both sources; the
        // per-source attribute elements keep de se perspectives distinct, so
        // a clash on one attribute element is a genuine conflict.
        for (const ContentId& src : sources) {
            for (const ContentId& tid : graph.triples_with_subject(src)) {
                if (!graph.is_active(tid)) continue;
                const Triple t = graph.triple(tid);
                graph.add_triple(t.predicate, merged, t.object);
                graph.supersede(tid);
            }
            graph.supersede(src);
        }
        for (const ContentId& tid : graph.triples_with_subject(merged)) {
            if (!graph.is_active(tid)) continue;
            const Triple& t = graph.triple(tid);
            if (t.predicate == wellknown::instance_of()) continue;
            view::single_value(graph, merged, t.predicate);  // ConflictingAttributes on clash
        }

        results.push_back(MergeResult{merged, sources});
    }
    return results;
}

// ---------------------------------------------------------------------------
// De se -> de re transformation

struct DereReport {
    std::size_t relational_triples = 0;
    std::size_t instances_transformed = 0;
    std::size_t attributes_superseded = 0;
    std::size_t queries_rewritten = 0;
    std::vector<std::string> companies;
};

// Rewrites perspective-bound debit/credit marks into relational facts: for a
// posting marked debit in company X's books, (debitRel, posting, X). Merged
// intercompany postings end up with exactly one debitRel and one creditRel.
// The change propagates into the schema: the scoped dr/cr attributes are
// superseded by the two seed relations and the registered queries filtering
// on them are rewritten and re-verified by the report checks.
inline DereReport dere_transform(UnifiedGraph& graph, ProvenanceStore& prov, const RunId& run,
                                 const std::vector<std::string>& scope,
                                 const Semantics& semantics,
                                 ReportRegistry* registry = nullptr) {
    DereReport report;

    std::set<ContentId> merged_targets;
    for (const TraceEdge& e : prov.edges()) {
        if (e.kind != TraceKind::Merged) continue;
        merged_targets.insert(e.targets.begin(), e.targets.end());
    }

    struct TypeContext {
        ContentId type_node;
        ContentId drcr_attr;
        std::optional<ContentId> company_attr;
        std::optional<ContentId> counterparty_attr;
        std::string company_name;  // from semantics, keyed by owning dataset
    };
    std::vector<TypeContext> contexts;
    for (const std::string& label : scope) {
        for (const ContentId& type_node : detail::types_with_label(graph, label)) {
            auto drcr = detail::attribute_by_label(graph, type_node, semantics.drcr_label);
            if (!drcr) continue;  // nothing de se on this type
            TypeContext ctx;
            ctx.type_node = type_node;
            ctx.drcr_attr = *drcr;
            ctx.company_attr =
                detail::attribute_by_label(graph, type_node, semantics.company_label);
            ctx.counterparty_attr =
                detail::attribute_by_label(graph, type_node, semantics.counterparty_label);
            const Element& type_el = graph.element(type_node);
            if (!type_el.parents.empty()) {
                const Element& ds = graph.element(type_el.parents[0]);
                if (const Semantics::System* sys = semantics.system_named(ds.payload))
                    ctx.company_name = sys->company;
            }
            contexts.push_back(std::move(ctx));
        }
    }

    // Intercompany items must have found their merge partner first.
    for (const TypeContext& ctx : contexts) {
        if (!ctx.counterparty_attr) continue;
        for (const ContentId& inst : view::extent(graph, ctx.type_node)) {
            if (merged_targets.count(inst)) continue;
            auto cp = view::single_value(graph, inst, *ctx.counterparty_attr);
            if (cp && !unicode::trim_whitespace(*cp).empty())
                raise(ErrorCode::MissingMerge,
                      "intercompany posting " + inst.short_hex() +
                          " reached de re without a merge partner");
        }
    }

    // The adaptation emerges from the data: a type shifts to the relational
    // form only once it holds a merged intercompany transaction. Types with
    // purely internal postings keep their intrinsic marks, and a graph with
    // no merges at all passes through unchanged.
    {
        std::vector<TypeContext> touched;
        for (TypeContext& ctx : contexts) {
            bool has_merged = false;
            for (const ContentId& inst : view::extent(graph, ctx.type_node)) {
                if (merged_targets.count(inst)) has_merged = true;
            }
            if (has_merged) touched.push_back(std::move(ctx));
        }
        contexts = std::move(touched);
    }
    if (contexts.empty()) return report;

    bool seeded = is_seeded(graph);
    if (!graph.has_element(wellknown::debit_rel()) ||
        !graph.has_element(wellknown::credit_rel()))
        raise(ErrorCode::DanglingReference,
              "debitRel/creditRel are not present; apply the seed first");

    auto company_instance = [&](const std::string& name) {
        ContentId id = element_id(ElementKind::InstanceNode, {}, name);
        if (!graph.has_element(id)) {
            ContentId value_el = element_id(ElementKind::Value, {}, name);
            graph.add_element(ElementKind::InstanceNode, {}, name, "dere:company");
            graph.set_generality(id, Generality::Data);
            std::vector<ContentId> sources;
            if (graph.has_element(value_el)) sources.push_back(value_el);
            if (sources.empty())
                prov.record_trace({}, {id}, "dere_transform:company", run, TraceKind::Seeded);
            else
                prov.record_trace(sources, {id}, "dere_transform:company", run,
                                  TraceKind::Derived);
            if (seeded)
                graph.add_triple(wellknown::instance_of(), id, wellknown::individual_category());
            report.companies.push_back(name);
        }
        return id;
    };

    std::set<ContentId> superseded_drcr_attrs;
    for (const TypeContext& ctx : contexts) {
        for (const ContentId& inst : view::extent(graph, ctx.type_node)) {
            std::vector<ContentId> mark_triples;
            for (const ContentId& tid : graph.triples_with_subject(inst)) {
                if (!graph.is_active(tid)) continue;
                if (graph.triple(tid).predicate == ctx.drcr_attr) mark_triples.push_back(tid);
            }
            if (mark_triples.empty()) continue;
            auto mark = view::single_value(graph, inst, ctx.drcr_attr);
            std::string m = unicode::trim_whitespace(*mark);
            bool debit = m == semantics.debit_value;
            bool credit = m == semantics.credit_value;
            if (!debit && !credit)
                raise(ErrorCode::UnknownRepresentation,
                      "posting " + inst.short_hex() + " carries unharmonized mark '" + m + "'");

            std::string company = ctx.company_name;
            if (ctx.company_attr) {
                auto v = view::single_value(graph, inst, *ctx.company_attr);
                if (v && !unicode::trim_whitespace(*v).empty())
                    company = unicode::trim_whitespace(*v);
            }
            if (company.empty())
                raise(ErrorCode::UnknownRepresentation,
                      "posting " + inst.short_hex() + " has no owning company");

            ContentId comp = company_instance(company);
            graph.add_triple(debit ? wellknown::debit_rel() : wellknown::credit_rel(), inst,
                             comp);
            ++report.relational_triples;
            for (const ContentId& tid : mark_triples) graph.supersede(tid);
            ++report.instances_transformed;
        }
        // Data first, then schema: the dr/cr attribute itself is now
        // superseded by the two seed relations.
        if (graph.is_active(ctx.drcr_attr)) {
            graph.supersede(ctx.drcr_attr);
            superseded_drcr_attrs.insert(ctx.drcr_attr);
            ++report.attributes_superseded;
        }
    }

    // Query co-evolution: a filter on a superseded dr/cr attribute becomes a
    // relational filter against the owning company.
    if (registry && !superseded_drcr_attrs.empty()) {
        std::map<ContentId, std::string> company_of_type;
        for (const TypeContext& ctx : contexts) {
            std::string name = ctx.company_name;
            if (name.empty() && ctx.company_attr) {
                std::set<std::string> values;
                for (const ContentId& inst : view::extent(graph, ctx.type_node)) {
                    auto v = view::single_value(graph, inst, *ctx.company_attr);
                    if (v) values.insert(unicode::trim_whitespace(*v));
                }
                if (values.size() == 1) name = *values.begin();
            }
            company_of_type[ctx.type_node] = name;
        }

        std::vector<ContentId> roots;
        for (const auto& [root, e] : registry->entries()) roots.push_back(root);
        for (const ContentId& root : roots) {
            ReportQuery next = registry->entry(root).current;
            ContentId target = prov.resolve_alias(next.target);
            auto company_it = company_of_type.find(target);
            bool changed = false;
            for (auto& [attr, value] : next.filters) {
                ContentId resolved = prov.resolve_alias(attr);
                if (!superseded_drcr_attrs.count(resolved)) continue;
                if (company_it == company_of_type.end() || company_it->second.empty())
                    raise(ErrorCode::UnknownRepresentation,
                          "cannot rewrite dr/cr query " + root.short_hex() +
                              ": owning company unknown");
                if (value == semantics.debit_value) {
                    attr = wellknown::debit_rel();
                } else if (value == semantics.credit_value) {
                    attr = wellknown::credit_rel();
                } else {
                    raise(ErrorCode::UnknownRepresentation,
                          "dr/cr filter value '" + value + "' is not harmonized");
                }
                value = company_it->second;
                changed = true;
            }
            if (changed) {
                registry->rewrite(root, next, prov, run, "dere_transform:rewrite-query");
                ++report.queries_rewritten;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Algorithmic definition extraction

struct Definition {
    std::string label;  // dataset-qualified type label
    std::string text;
};

// Derives a natural-language definition for every active TypeNode straight
// from how the graph uses it: supertype (or seed category), attributes, and
// the relations its instances participate in.
inline std::vector<Definition> extract_definitions(const UnifiedGraph& graph) {
    if (!is_seeded(graph))
        raise(ErrorCode::SchemaViolation, "graph is not seeded; definitions need the seed");

    auto strip_prefix = [](const std::string& payload) {
        auto pos = payload.find(':');
        return pos == std::string::npos ? payload : payload.substr(pos + 1);
    };

    auto qualified_label = [&](const ContentId& type_node) {
        const Element& e = graph.element(type_node);
        if (!e.parents.empty()) {
            const Element& parent = graph.element(e.parents[0]);
            if (parent.kind == ElementKind::Dataset) return parent.payload + "." + e.payload;
        }
        return e.payload;
    };

    std::vector<Definition> out;
    for (const ContentId& type_node : detail::active_type_nodes(graph)) {
        std::string label = qualified_label(type_node);

        // Supertype via subtypeOf if present, else the seed category.
        std::string super;
        for (const ContentId& tid : graph.triples_with_subject(type_node)) {
            if (!graph.is_active(tid)) continue;
            const Triple& t = graph.triple(tid);
            if (t.predicate == wellknown::subtype_of()) {
                const Element& st = graph.element(t.object);
                super = st.kind == ElementKind::TypeNode ? qualified_label(t.object)
                                                         : strip_prefix(st.payload);
                break;
            }
        }
        if (super.empty()) {
            for (const ContentId& tid : graph.triples_with_subject(type_node)) {
                if (!graph.is_active(tid)) continue;
                const Triple& t = graph.triple(tid);
                if (t.predicate != wellknown::instance_of()) continue;
                const Element& cat = graph.element(t.object);
                if (cat.kind == ElementKind::SeedCategory) {
                    super = strip_prefix(cat.payload);
                    break;
                }
            }
        }
        if (super.empty()) super = "Type";

        std::set<std::string> attributes;
        for (const ContentId& child : graph.children_of(type_node)) {
            if (!graph.is_active(child)) continue;
            const Element& e = graph.element(child);
            if (e.kind == ElementKind::RelationType) attributes.insert(e.payload);
        }

        // Relations the instances participate in, beyond their own attributes.
        std::set<std::string> relations;
        for (const ContentId& inst : view::extent(graph, type_node)) {
            for (const ContentId& tid : graph.triples_with_subject(inst)) {
                if (!graph.is_active(tid)) continue;
                const Triple& t = graph.triple(tid);
                if (t.predicate == wellknown::instance_of()) continue;
                const Element& pred = graph.element(t.predicate);
                if (!pred.parents.empty()) continue;  // another type's attribute
                relations.insert(strip_prefix(pred.payload));
            }
        }

        std::string text = "A " + label + " is a " + super + " that has ";
        if (attributes.empty()) {
            text += "no recorded attributes";
        } else {
            bool first = true;
            for (const std::string& a : attributes) {
                if (!first) text += ", ";
                text += a;
                first = false;
            }
        }
        if (!relations.empty()) {
            text += " and participates in ";
            bool first = true;
            for (const std::string& r : relations) {
                if (!first) text += ", ";
                text += r;
                first = false;
            }
        }
        text += ".";
        out.push_back(Definition{label, text});
    }

    std::sort(out.begin(), out.end(), [](const Definition& a, const Definition& b) {
        return a.label != b.label ? a.label < b.label : a.text < b.text;
    });
    return out;
}

// Export form: one `<type-label>\t<definition>` per line, sorted, LF.
inline std::string definitions_text(const std::vector<Definition>& defs) {
    std::string out;
    for (const Definition& d : defs) {
        out += d.label;
        out += '\t';
        out += d.text;
        out += '\n';
    }
    return out;
}

}  // namespace bclearer

#endif
