#ifndef BCLEARER_GRAPH_HPP
#define BCLEARER_GRAPH_HPP

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "content_id.hpp"
#include "errors.hpp"
#include "unicode.hpp"

namespace bclearer {

enum class ElementKind {
    Dataset,
    Table,
    Column,
    Row,
    Cell,
    Value,
    TypeNode,
    InstanceNode,
    RelationType,
    SeedCategory,
};

inline const char* kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::Dataset: return "Dataset";
        case ElementKind::Table: return "Table";
        case ElementKind::Column: return "Column";
        case ElementKind::Row: return "Row";
        case ElementKind::Cell: return "Cell";
        case ElementKind::Value: return "Value";
        case ElementKind::TypeNode: return "TypeNode";
        case ElementKind::InstanceNode: return "InstanceNode";
        case ElementKind::RelationType: return "RelationType";
        case ElementKind::SeedCategory: return "SeedCategory";
    }
    return "?";
}

inline std::optional<ElementKind> kind_from_name(std::string_view s) {
    static const std::pair<std::string_view, ElementKind> table[] = {
        {"Dataset", ElementKind::Dataset},       {"Table", ElementKind::Table},
        {"Column", ElementKind::Column},         {"Row", ElementKind::Row},
        {"Cell", ElementKind::Cell},             {"Value", ElementKind::Value},
        {"TypeNode", ElementKind::TypeNode},     {"InstanceNode", ElementKind::InstanceNode},
        {"RelationType", ElementKind::RelationType},
        {"SeedCategory", ElementKind::SeedCategory},
    };
    for (const auto& [name, k] : table)
        if (name == s) return k;
    return std::nullopt;
}

// Syntactic level of generality an element belongs to, kept for reporting.
enum class Generality { Metadata, Schema, Data };

inline const char* generality_name(Generality g) {
    switch (g) {
        case Generality::Metadata: return "metadata";
        case Generality::Schema: return "schema";
        case Generality::Data: return "data";
    }
    return "?";
}

struct Element {
    ContentId id;
    ElementKind kind = ElementKind::Value;
    std::vector<ContentId> parents;
    std::string payload;
    std::string origin;
};

struct Triple {
    ContentId id;
    ContentId predicate;
    ContentId subject;
    ContentId object;
};

// Canonical byte form an element's identity is hashed over. `|` only occurs
// unescaped after the third separator (parents are fixed-width hex), so the
// encoding is injective for distinct (kind, parents, payload).
inline std::string canonical_serialize(ElementKind kind,
                                       const std::vector<ContentId>& parents,
                                       std::string_view payload) {
    if (!unicode::is_valid_utf8(payload))
        raise(ErrorCode::EncodingError, "payload is not valid UTF-8");
    std::string out = "v1|";
    out += kind_name(kind);
    out += '|';
    for (std::size_t i = 0; i < parents.size(); ++i) {
        if (i) out += ',';
        out += parents[i].hex();
    }
    out += '|';
    out += payload;
    return out;
}

inline ContentId content_id(std::string_view data) { return ContentId::of(data); }

inline ContentId element_id(ElementKind kind, const std::vector<ContentId>& parents,
                            std::string_view payload) {
    return ContentId::of(canonical_serialize(kind, parents, payload));
}

inline std::string triple_canonical(const ContentId& predicate, const ContentId& subject,
                                    const ContentId& object) {
    return "t1|" + predicate.hex() + "|" + subject.hex() + "|" + object.hex();
}

inline ContentId triple_id(const ContentId& predicate, const ContentId& subject,
                           const ContentId& object) {
    return ContentId::of(triple_canonical(predicate, subject, object));
}

// Reserved elements: fixed well-known payloads hashed like any other element.
namespace wellknown {

inline ContentId relation(std::string_view payload) {
    return element_id(ElementKind::RelationType, {}, payload);
}
inline ContentId category(std::string_view payload) {
    return element_id(ElementKind::SeedCategory, {}, payload);
}

inline const ContentId& instance_of() {
    static const ContentId id = relation("boro:instanceOf");
    return id;
}
inline const ContentId& subtype_of() {
    static const ContentId id = relation("boro:subtypeOf");
    return id;
}
inline const ContentId& whole_part() {
    static const ContentId id = relation("boro:wholePart");
    return id;
}
inline const ContentId& debit_rel() {
    static const ContentId id = relation("boro:debitRel");
    return id;
}
inline const ContentId& credit_rel() {
    static const ContentId id = relation("boro:creditRel");
    return id;
}
inline const ContentId& foreign_key_rel() {
    static const ContentId id = relation("bclearer:foreignKey");
    return id;
}
inline const ContentId& individual_category() {
    static const ContentId id = category("boro:Individual");
    return id;
}
inline const ContentId& type_category() {
    static const ContentId id = category("boro:Type");
    return id;
}
inline const ContentId& tuple_category() {
    static const ContentId id = category("boro:Tuple");
    return id;
}

}  // namespace wellknown

// The unified data model all levels of generality fold into. Values are
// immutable once inserted; passes build successor state and mark what they
// replaced as superseded rather than deleting it.
class UnifiedGraph {
public:
    ContentId add_element(ElementKind kind, const std::vector<ContentId>& parents,
                          std::string_view payload, std::string_view origin = {}) {
        for (const ContentId& p : parents) {
            if (!elements_.count(p))
                raise(ErrorCode::DanglingReference,
                      "parent " + p.hex() + " not in graph");
        }
        ContentId id = element_id(kind, parents, payload);
        auto [it, inserted] = elements_.try_emplace(id);
        if (inserted) {
            it->second = Element{id, kind, parents, std::string(payload), std::string(origin)};
            for (const ContentId& p : parents) children_[p].insert(id);
        }
        return id;
    }

    ContentId add_triple(const ContentId& predicate, const ContentId& subject,
                         const ContentId& object) {
        auto pred_it = elements_.find(predicate);
        if (pred_it == elements_.end())
            raise(ErrorCode::DanglingReference, "predicate " + predicate.hex() + " not in graph");
        if (pred_it->second.kind != ElementKind::RelationType)
            raise(ErrorCode::DanglingReference,
                  "predicate " + predicate.hex() + " is not a RelationType");
        if (!elements_.count(subject))
            raise(ErrorCode::DanglingReference, "subject " + subject.hex() + " not in graph");
        if (!elements_.count(object))
            raise(ErrorCode::DanglingReference, "object " + object.hex() + " not in graph");

        ContentId id = triple_id(predicate, subject, object);
        if (triples_.count(id)) return id;

        if (predicate == wellknown::subtype_of() && subject != object &&
            subtype_reaches(object, subject)) {
            raise(ErrorCode::SubtypeCycle,
                  "subtypeOf " + subject.short_hex() + " -> " + object.short_hex() +
                      " would close a cycle");
        }
        if (predicate == wellknown::subtype_of() && subject == object)
            raise(ErrorCode::SubtypeCycle, "subtypeOf self-loop on " + subject.short_hex());

        triples_.emplace(id, Triple{id, predicate, subject, object});
        by_subject_[subject].insert(id);
        by_predicate_[predicate].insert(id);
        by_object_[object].insert(id);
        return id;
    }

    bool has_element(const ContentId& id) const { return elements_.count(id) != 0; }
    bool has_triple(const ContentId& id) const { return triples_.count(id) != 0; }
    bool has(const ContentId& id) const { return has_element(id) || has_triple(id); }

    const Element& element(const ContentId& id) const {
        auto it = elements_.find(id);
        if (it == elements_.end())
            raise(ErrorCode::DanglingReference, "element " + id.hex() + " not in graph");
        return it->second;
    }

    const Triple& triple(const ContentId& id) const {
        auto it = triples_.find(id);
        if (it == triples_.end())
            raise(ErrorCode::DanglingReference, "triple " + id.hex() + " not in graph");
        return it->second;
    }

    const std::map<ContentId, Element>& elements() const { return elements_; }
    const std::map<ContentId, Triple>& triples() const { return triples_; }

    // Superseding keeps an item in the graph (so provenance stays complete)
    // while removing it from the active view that passes and queries see.
    void supersede(const ContentId& id) {
        if (!has(id)) raise(ErrorCode::DanglingReference, id.hex() + " not in graph");
        superseded_.insert(id);
    }
    bool is_superseded(const ContentId& id) const { return superseded_.count(id) != 0; }
    bool is_active(const ContentId& id) const { return has(id) && !is_superseded(id); }
    const std::set<ContentId>& superseded() const { return superseded_; }

    void set_generality(const ContentId& id, Generality g) { generality_[id] = g; }
    std::optional<Generality> generality(const ContentId& id) const {
        auto it = generality_.find(id);
        if (it == generality_.end()) return std::nullopt;
        return it->second;
    }
    const std::map<ContentId, Generality>& generality_tags() const { return generality_; }

    std::vector<ContentId> children_of(const ContentId& parent) const {
        auto it = children_.find(parent);
        if (it == children_.end()) return {};
        return {it->second.begin(), it->second.end()};
    }

    std::vector<ContentId> triples_with_subject(const ContentId& s) const {
        return index_lookup(by_subject_, s);
    }
    std::vector<ContentId> triples_with_predicate(const ContentId& p) const {
        return index_lookup(by_predicate_, p);
    }
    std::vector<ContentId> triples_with_object(const ContentId& o) const {
        return index_lookup(by_object_, o);
    }

    // Recomputes every stored id from canonical bytes; returns ids that fail.
    std::vector<ContentId> audit_identities() const {
        std::vector<ContentId> bad;
        for (const auto& [id, e] : elements_) {
            if (element_id(e.kind, e.parents, e.payload) != id) bad.push_back(id);
        }
        for (const auto& [id, t] : triples_) {
            if (triple_id(t.predicate, t.subject, t.object) != id) bad.push_back(id);
        }
        return bad;
    }

    // Graph identity: hash of the sorted element and triple id sets.
    ContentId content_hash() const {
        Sha256 h;
        h.update(std::string_view("g1\n"));
        for (const auto& [id, e] : elements_) {
            h.update(std::string_view("e "));
            h.update(id.hex());
            h.update(std::string_view("\n"));
        }
        for (const auto& [id, t] : triples_) {
            h.update(std::string_view("t "));
            h.update(id.hex());
            h.update(std::string_view("\n"));
        }
        return ContentId(h.finish());
    }

    struct DotScope {
        // Empty set means all kinds pass.
        std::set<ElementKind> kinds;
        bool include_superseded = false;
    };

    std::string export_dot() const { return export_dot(DotScope{}); }

    std::string export_dot(const DotScope& scope) const {
        auto passes = [&](const ContentId& id) {
            auto it = elements_.find(id);
            if (it == elements_.end()) return false;
            if (!scope.include_superseded && is_superseded(id)) return false;
            if (!scope.kinds.empty() && !scope.kinds.count(it->second.kind)) return false;
            return true;
        };

        std::set<ContentId> nodes;
        std::vector<const Triple*> edges;
        for (const auto& [id, t] : triples_) {
            if (!scope.include_superseded && is_superseded(id)) continue;
            if (!passes(t.subject) || !passes(t.object)) continue;
            nodes.insert(t.subject);
            nodes.insert(t.object);
            edges.push_back(&t);
        }
        std::vector<std::pair<ContentId, ContentId>> containment;
        for (const auto& [id, e] : elements_) {
            if (!passes(id)) continue;
            for (const ContentId& p : e.parents) {
                if (!passes(p)) continue;
                containment.emplace_back(id, p);
                nodes.insert(id);
                nodes.insert(p);
            }
        }

        std::ostringstream out;
        out << "digraph g {\n";
        for (const ContentId& id : nodes) {
            out << "  \"" << id.hex() << "\" [label=\"" << dot_escape(node_label(id))
                << "\"];\n";
        }
        for (const Triple* t : edges) {
            out << "  \"" << t->subject.hex() << "\" -> \"" << t->object.hex()
                << "\" [label=\"" << dot_escape(predicate_label(t->predicate)) << "\"];\n";
        }
        for (const auto& [child, parent] : containment) {
            out << "  \"" << child.hex() << "\" -> \"" << parent.hex()
                << "\" [style=dashed];\n";
        }
        out << "}\n";
        return out.str();
    }

    // One active triple per line, tab separated, sorted, trailing LF.
    std::string export_triples() const {
        std::vector<std::string> lines;
        for (const auto& [id, t] : triples_) {
            if (is_superseded(id)) continue;
            lines.push_back(t.predicate.hex() + "\t" + t.subject.hex() + "\t" + t.object.hex());
        }
        std::sort(lines.begin(), lines.end());
        std::string out;
        for (const std::string& l : lines) {
            out += l;
            out += '\n';
        }
        return out;
    }

private:
    static std::vector<ContentId> index_lookup(const std::map<ContentId, std::set<ContentId>>& idx,
                                               const ContentId& key) {
        auto it = idx.find(key);
        if (it == idx.end()) return {};
        return {it->second.begin(), it->second.end()};
    }

    bool subtype_reaches(const ContentId& from, const ContentId& to) const {
        std::set<ContentId> seen;
        std::vector<ContentId> stack{from};
        while (!stack.empty()) {
            ContentId cur = stack.back();
            stack.pop_back();
            if (cur == to) return true;
            if (!seen.insert(cur).second) continue;
            auto it = by_subject_.find(cur);
            if (it == by_subject_.end()) continue;
            for (const ContentId& tid : it->second) {
                const Triple& t = triples_.at(tid);
                if (t.predicate == wellknown::subtype_of()) stack.push_back(t.object);
            }
        }
        return false;
    }

    std::string node_label(const ContentId& id) const {
        const Element& e = elements_.at(id);
        return std::string(kind_name(e.kind)) + ":" + id.short_hex() + ":" +
               payload_prefix(e.payload);
    }

    std::string predicate_label(const ContentId& id) const {
        auto it = elements_.find(id);
        if (it == elements_.end()) return id.short_hex();
        return it->second.payload.empty() ? it->second.id.short_hex()
                                          : payload_prefix(it->second.payload);
    }

    // First 16 code points of the payload, UTF-8 safe.
    static std::string payload_prefix(std::string_view payload) {
        std::size_t count = 0, i = 0;
        while (i < payload.size() && count < 16) {
            unsigned char c = static_cast<unsigned char>(payload[i]);
            std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
            i += len;
            ++count;
        }
        return std::string(payload.substr(0, std::min(i, payload.size())));
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

    std::map<ContentId, Element> elements_;
    std::map<ContentId, Triple> triples_;
    std::map<ContentId, Generality> generality_;
    std::set<ContentId> superseded_;
    std::map<ContentId, std::set<ContentId>> children_;
    std::map<ContentId, std::set<ContentId>> by_subject_;
    std::map<ContentId, std::set<ContentId>> by_predicate_;
    std::map<ContentId, std::set<ContentId>> by_object_;
};

}  // namespace bclearer

#endif
