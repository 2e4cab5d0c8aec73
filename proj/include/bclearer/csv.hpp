#ifndef BCLEARER_CSV_HPP
#define BCLEARER_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace bclearer {
namespace csv {

// RFC-4180-style reader: double-quote quoting, "" escapes, LF or CRLF record
// ends, quoted fields may span lines.
inline std::vector<std::vector<std::string>> parse(std::string_view text, char delimiter = ',') {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool record_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
        record_started = false;
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
            record_started = true;
            ++i;
            continue;
        }
        if (c == delimiter) {
            end_field();
            record_started = true;
            ++i;
            continue;
        }
        if (c == '\n' || (c == '\r' && i + 1 < n && text[i + 1] == '\n')) {
            if (record_started || field_started || !field.empty() || !record.empty()) {
                end_record();
            } else {
                records.push_back({std::string()});
            }
            i += (c == '\r') ? 2 : 1;
            continue;
        }
        field += c;
        field_started = true;
        record_started = true;
        ++i;
    }
    if (record_started || field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

inline bool needs_quoting(std::string_view field, char delimiter) {
    for (char c : field) {
        if (c == delimiter || c == '"' || c == '\n' || c == '\r') return true;
    }
    return false;
}

inline std::string escape_field(std::string_view field, char delimiter = ',') {
    if (!needs_quoting(field, delimiter)) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// LF line endings, trailing LF.
inline std::string write(const std::vector<std::vector<std::string>>& records,
                         char delimiter = ',') {
    std::string out;
    for (const auto& record : records) {
        for (std::size_t i = 0; i < record.size(); ++i) {
            if (i) out += delimiter;
            out += escape_field(record[i], delimiter);
        }
        out += '\n';
    }
    return out;
}

}  // namespace csv
}  // namespace bclearer

#endif
