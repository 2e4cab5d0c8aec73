#ifndef BCLEARER_QUERY_HPP
#define BCLEARER_QUERY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "content_id.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "provenance.hpp"
#include "unicode.hpp"

namespace bclearer {

// Exact fixed-point money arithmetic: amounts live as integer minor units
// (two decimal places). Hash-based report comparison forbids floating point.
inline std::optional<std::int64_t> parse_minor_units(std::string_view raw) {
    std::string s = unicode::trim_whitespace(raw);
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        i = 1;
    }
    std::int64_t units = 0;
    std::size_t digits = 0;
    for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i, ++digits)
        units = units * 10 + (s[i] - '0');
    if (digits == 0) return std::nullopt;
    std::int64_t minor = units * 100;
    if (i < s.size()) {
        if (s[i] != '.') return std::nullopt;
        ++i;
        std::size_t frac_digits = s.size() - i;
        if (frac_digits < 1 || frac_digits > 2) return std::nullopt;
        std::int64_t frac = 0;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            frac = frac * 10 + (s[i] - '0');
        }
        if (frac_digits == 1) frac *= 10;
        minor += frac;
    }
    return negative ? -minor : minor;
}

inline std::string format_minor_units(std::int64_t minor) {
    std::int64_t abs = minor < 0 ? -minor : minor;
    std::string out = std::to_string(abs / 100);
    std::int64_t frac = abs % 100;
    out += '.';
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
    return minor < 0 ? "-" + out : out;
}

// Alias-aware read helpers shared by the query engine and the evolve passes.
namespace view {

inline ContentId resolve(const ProvenanceStore* aliases, const ContentId& id) {
    return aliases ? aliases->resolve_alias(id) : id;
}

// Follows the rename/merge chain to the newest id this graph holds. During a
// run that is the chain's end; replayed against an earlier persisted graph it
// stops at that graph's stage.
inline ContentId resolve_in(const UnifiedGraph& graph, const ProvenanceStore* aliases,
                            const ContentId& id) {
    if (!aliases) return id;
    ContentId last_present = id;
    ContentId cur = id;
    std::set<ContentId> seen;
    while (seen.insert(cur).second) {
        ContentId next = aliases->resolve_alias_step(cur);
        if (next == cur) break;
        cur = next;
        if (graph.has(cur)) last_present = cur;
    }
    return graph.has(last_present) || !graph.has(id) ? last_present : id;
}

// Active rows of a Table, or active instances of a TypeNode.
inline std::vector<ContentId> extent(const UnifiedGraph& graph, const ContentId& target) {
    const Element& el = graph.element(target);
    std::vector<ContentId> out;
    if (el.kind == ElementKind::Table) {
        for (const ContentId& child : graph.children_of(target)) {
            if (!graph.is_active(child)) continue;
            if (graph.element(child).kind == ElementKind::Row) out.push_back(child);
        }
        return out;
    }
    if (el.kind == ElementKind::TypeNode) {
        for (const ContentId& tid : graph.triples_with_object(target)) {
            if (!graph.is_active(tid)) continue;
            const Triple& t = graph.triple(tid);
            if (t.predicate != wellknown::instance_of()) continue;
            if (graph.is_active(t.subject)) out.push_back(t.subject);
        }
        return out;
    }
    raise(ErrorCode::DanglingReference,
          "query target " + target.short_hex() + " is neither a Table nor a TypeNode");
}

// Active values `item` carries for `attr`: cell payloads in table form,
// object payloads of (attr, item, o) triples in unified form.
inline std::vector<std::string> values(const UnifiedGraph& graph, const ContentId& item,
                                       const ContentId& attr) {
    std::vector<std::string> out;
    const Element& el = graph.element(item);
    if (el.kind == ElementKind::Row) {
        for (const ContentId& child : graph.children_of(item)) {
            if (!graph.is_active(child)) continue;
            const Element& cell = graph.element(child);
            if (cell.kind != ElementKind::Cell) continue;
            if (cell.parents.size() == 2 && cell.parents[1] == attr)
                out.push_back(cell.payload);
        }
        return out;
    }
    for (const ContentId& tid : graph.triples_with_subject(item)) {
        if (!graph.is_active(tid)) continue;
        const Triple& t = graph.triple(tid);
        if (t.predicate != attr) continue;
        out.push_back(graph.element(t.object).payload);
    }
    return out;
}

inline std::optional<std::string> single_value(const UnifiedGraph& graph,
                                               const ContentId& item, const ContentId& attr) {
    std::vector<std::string> vals = values(graph, item, attr);
    if (vals.empty()) return std::nullopt;
    std::set<std::string> distinct(vals.begin(), vals.end());
    if (distinct.size() > 1)
        raise(ErrorCode::ConflictingAttributes,
              "item " + item.short_hex() + " carries " + std::to_string(distinct.size()) +
                  " distinct values for one attribute");
    return *distinct.begin();
}

}  // namespace view

// A deliberately tiny query language: filter, optional group, exact sum.
struct ReportQuery {
    ContentId target;
    std::vector<std::pair<ContentId, std::string>> filters;
    std::optional<ContentId> group_by;
    ContentId aggregate;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["target"] = target.hex();
        nlohmann::json fs = nlohmann::json::array();
        auto sorted = filters;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            std::string ah = a.first.hex(), bh = b.first.hex();
            return ah != bh ? ah < bh : a.second < b.second;
        });
        for (const auto& [id, v] : sorted) fs.push_back({id.hex(), v});
        j["filters"] = fs;
        if (group_by) j["group_by"] = group_by->hex();
        else j["group_by"] = nullptr;
        j["aggregate"] = aggregate.hex();
        return j;
    }

    // Sorted keys, no whitespace; the query id hashes these bytes.
    std::string canonical_json() const { return to_json().dump(); }
    ContentId id() const { return ContentId::of(canonical_json()); }

    static ReportQuery from_json(const nlohmann::json& j) {
        ReportQuery q;
        q.target = ContentId::parse_hex(j.at("target").get<std::string>());
        for (const auto& f : j.at("filters")) {
            q.filters.emplace_back(ContentId::parse_hex(f.at(0).get<std::string>()),
                                   f.at(1).get<std::string>());
        }
        if (j.contains("group_by") && !j.at("group_by").is_null())
            q.group_by = ContentId::parse_hex(j.at("group_by").get<std::string>());
        q.aggregate = ContentId::parse_hex(j.at("aggregate").get<std::string>());
        return q;
    }
};

// Grouped sums, sorted by group key, keys unique.
using Figures = std::vector<std::pair<std::string, std::int64_t>>;

inline std::string figures_text(const Figures& figures) {
    std::string out;
    for (const auto& [key, amount] : figures) {
        out += key;
        out += ',';
        out += std::to_string(amount);
        out += '\n';
    }
    return out;
}

struct ReportSignature {
    ContentId query;  // root (as-registered) query id
    std::string stage;
    ContentId figures_hash;
};

inline ReportSignature sign_figures(const ContentId& root_query, const std::string& stage,
                                    const Figures& figures) {
    return ReportSignature{root_query, stage, ContentId::of(figures_text(figures))};
}

inline Figures run_query(const UnifiedGraph& graph, const ReportQuery& query,
                         const ProvenanceStore* aliases = nullptr) {
    ContentId target = view::resolve_in(graph, aliases, query.target);
    if (!graph.has_element(target))
        raise(ErrorCode::DanglingReference, "query target " + query.target.hex() + " unknown");

    std::vector<std::pair<ContentId, std::string>> filters;
    for (const auto& [attr, value] : query.filters)
        filters.emplace_back(view::resolve_in(graph, aliases, attr), value);
    std::optional<ContentId> group;
    if (query.group_by) group = view::resolve_in(graph, aliases, *query.group_by);
    ContentId aggregate = view::resolve_in(graph, aliases, query.aggregate);

    std::map<std::string, std::int64_t> sums;
    for (const ContentId& item : view::extent(graph, target)) {
        bool pass = true;
        for (const auto& [attr, expected] : filters) {
            std::vector<std::string> vals = view::values(graph, item, attr);
            bool hit = false;
            for (const std::string& v : vals) {
                if (v == expected) {
                    hit = true;
                    break;
                }
            }
            if (!hit) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;

        std::string key;
        if (group) {
            auto v = view::single_value(graph, item, *group);
            key = v ? unicode::trim_whitespace(*v) : std::string();
        }
        auto raw = view::single_value(graph, item, aggregate);
        if (!raw)
            raise(ErrorCode::NonDecimalAggregate,
                  "item " + item.short_hex() + " has no value for the aggregate attribute");
        auto minor = parse_minor_units(*raw);
        if (!minor)
            raise(ErrorCode::NonDecimalAggregate,
                  "value '" + *raw + "' is not a fixed-point decimal");
        sums[key] += *minor;
    }

    Figures out(sums.begin(), sums.end());
    return out;
}

inline std::set<std::string> split_lines(const std::string& text) {
    std::set<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (eol > pos) out.insert(text.substr(pos, eol - pos));
        pos = eol + 1;
    }
    return out;
}

struct SignatureComparison {
    bool match = false;
    std::vector<std::string> diff;  // empty unless figure texts were supplied
};

inline SignatureComparison compare_signatures(const ReportSignature& before,
                                              const ReportSignature& after,
                                              const std::string& before_figures = {},
                                              const std::string& after_figures = {}) {
    if (before.query != after.query)
        raise(ErrorCode::QueryMismatch, "signatures belong to different queries: " +
                                            before.query.short_hex() + " vs " +
                                            after.query.short_hex());
    SignatureComparison result;
    result.match = before.figures_hash == after.figures_hash;
    if (!result.match) {
        std::set<std::string> b = split_lines(before_figures);
        std::set<std::string> a = split_lines(after_figures);
        for (const std::string& line : b)
            if (!a.count(line)) result.diff.push_back("- " + line);
        for (const std::string& line : a)
            if (!b.count(line)) result.diff.push_back("+ " + line);
    }
    return result;
}

// Where a company's debit/credit marks live: the intrinsic mark column plus
// the amount column, both alias-resolvable from their as-loaded identities.
struct TrialBalanceScope {
    std::string company;
    ContentId target;
    ContentId drcr_attr;
    ContentId amount_attr;
    std::vector<std::string> debit_codes;
    std::vector<std::string> credit_codes;
};

struct TrialBalanceTotals {
    std::int64_t intrinsic_debit = 0;
    std::int64_t intrinsic_credit = 0;
    std::int64_t relational_debit = 0;
    std::int64_t relational_credit = 0;

    std::int64_t debit() const { return intrinsic_debit + relational_debit; }
    std::int64_t credit() const { return intrinsic_credit + relational_credit; }
    bool balanced() const {
        return debit() == credit() && intrinsic_debit == intrinsic_credit &&
               relational_debit == relational_credit;
    }
};

// Exact per-company totals, readable both before the de re transform (marks
// intrinsic to each posting) and after it (debit/credit as relations).
inline TrialBalanceTotals trial_balance(const UnifiedGraph& graph,
                                        const TrialBalanceScope& scope,
                                        const ProvenanceStore* aliases = nullptr) {
    ContentId target = view::resolve_in(graph, aliases, scope.target);
    ContentId drcr = view::resolve_in(graph, aliases, scope.drcr_attr);
    ContentId amount_attr = view::resolve_in(graph, aliases, scope.amount_attr);

    auto is_code = [](const std::vector<std::string>& codes, const std::string& v) {
        for (const std::string& c : codes)
            if (c == v) return true;
        return false;
    };

    TrialBalanceTotals totals;
    for (const ContentId& item : view::extent(graph, target)) {
        auto raw_amount = view::single_value(graph, item, amount_attr);
        if (!raw_amount)
            raise(ErrorCode::UnknownRepresentation,
                  "posting " + item.short_hex() + " has no amount");
        auto minor = parse_minor_units(*raw_amount);
        if (!minor)
            raise(ErrorCode::NonDecimalAggregate,
                  "amount '" + *raw_amount + "' is not a fixed-point decimal");

        auto mark = view::single_value(graph, item, drcr);
        if (mark) {
            std::string m = unicode::trim_whitespace(*mark);
            if (is_code(scope.debit_codes, m)) {
                totals.intrinsic_debit += *minor;
                continue;
            }
            if (is_code(scope.credit_codes, m)) {
                totals.intrinsic_credit += *minor;
                continue;
            }
            raise(ErrorCode::UnknownRepresentation,
                  "posting " + item.short_hex() + " carries unrecognized mark '" + m + "'");
        }

        bool relational = false;
        for (const ContentId& tid : graph.triples_with_subject(item)) {
            if (!graph.is_active(tid)) continue;
            const Triple& t = graph.triple(tid);
            if (t.predicate != wellknown::debit_rel() && t.predicate != wellknown::credit_rel())
                continue;
            if (graph.element(t.object).payload != scope.company) continue;
            relational = true;
            if (t.predicate == wellknown::debit_rel()) totals.relational_debit += *minor;
            else totals.relational_credit += *minor;
        }
        if (!relational)
            raise(ErrorCode::UnknownRepresentation,
                  "posting " + item.short_hex() +
                      " has neither an intrinsic mark nor a debit/credit relation for " +
                      scope.company);
    }
    return totals;
}

}  // namespace bclearer

#endif
