#ifndef BCLEARER_FIXTURES_HPP
#define BCLEARER_FIXTURES_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "collect.hpp"
#include "csv.hpp"
#include "evolve_deep.hpp"
#include "evolve_onto.hpp"
#include "graph.hpp"
#include "load.hpp"
#include "query.hpp"

namespace bclearer {

// Deterministic generator for the three-system intercompany accounting
// corpus: PHAS (Peak Holdings), AAS (Acme) and ZAS (Zenith), where Acme and
// Zenith are owned by Peak Holdings. Every intercompany transaction booked as
// a debit in one subsidiary's ledger appears as the mirroring credit in the
// other's. Column vocabularies deliberately differ per system and foreign
// keys are left undeclared, so integration and FK inference have real work.
struct FixtureSpec {
    std::size_t intercompany_pairs = 2;
    std::size_t internal_transactions = 1;  // internal PHAS transactions
    std::uint64_t chunk_size = 64;
};

struct FixtureInfo {
    std::vector<std::filesystem::path> files;
    std::size_t planted_foreign_keys = 0;
    std::size_t expected_merges = 0;
    std::int64_t intercompany_total_minor = 0;  // per-direction sum, e.g. AAS due account
};

namespace fixture_detail {

// 100.00, 250.00, 400.00, ... all multiples of 0.25 so no rounding path exists.
inline std::int64_t pair_amount_minor(std::size_t i) {
    return 10000 + static_cast<std::int64_t>(i) * 15000;
}

// 75.25, 125.25, ... for internal PHAS transactions.
inline std::int64_t internal_amount_minor(std::size_t j) {
    return 7525 + static_cast<std::int64_t>(j) * 5000;
}

inline std::string iso_date(int year, int month, int day_of_month) {
    static const int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int days = days_in_month[month - 1];
    if (month == 2 && year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)) days = 29;
    while (day_of_month > days) {
        day_of_month -= days;
        month += 1;
        if (month > 12) {
            month = 1;
            year += 1;
        }
        days = days_in_month[month - 1];
        if (month == 2 && year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)) days = 29;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day_of_month);
    return std::string(buf);
}

inline std::string pair_date(std::size_t i) {
    return iso_date(2024, 3, 1 + static_cast<int>(4 * i));
}

inline std::string internal_date(std::size_t j) {
    return iso_date(2024, 2, 14 + static_cast<int>(j));
}

}  // namespace fixture_detail

inline FixtureInfo generate_fixture(const FixtureSpec& spec,
                                    const std::filesystem::path& destination) {
    namespace fd = fixture_detail;
    FixtureInfo info;
    fs::create_directories(destination);

    auto emit = [&](const fs::path& relative, const std::string& bytes) {
        fs::path full = destination / relative;
        write_file_bytes(full, bytes);
        info.files.push_back(relative);
    };

    // --- accounts tables ----------------------------------------------------
    emit("phas/accounts.csv",
         csv::write({{"account_number", "name", "company", "counterparty"},
                     {"1000", "Cash", "Peak Holdings", ""},
                     {"1600", "Office Expense", "Peak Holdings", ""},
                     {"1900", "Retained Earnings", "Peak Holdings", ""}}));
    emit("aas/accounts.csv",
         csv::write({{"acct_no", "name", "company", "counterparty"},
                     {"2000", "Cash", "Acme", ""},
                     {"2100", "Due from Zenith", "Acme", "Zenith"},
                     {"2400", "Sales", "Acme", ""}}));
    emit("zas/accounts.csv",
         csv::write({{"accountNumber", "name", "company", "counterparty"},
                     {"3000", "Cash", "Zenith", ""},
                     {"3200", "Due to Acme", "Zenith", "Acme"},
                     {"3600", "Purchases", "Zenith", ""}}));

    // --- postings tables ----------------------------------------------------
    // PHAS: internal double entries, deliberately dirty memo text (stray
    // whitespace, a decomposed accent) for the cleansing pass to earn its keep.
    std::vector<std::vector<std::string>> phas{
        {"acct", "dr_cr", "amount", "date", "company", "counterparty", "memo"}};
    for (std::size_t j = 0; j < spec.internal_transactions; ++j) {
        std::string amount = format_minor_units(fd::internal_amount_minor(j));
        std::string date = fd::internal_date(j);
        phas.push_back({"1600", "D", amount, date, "Peak Holdings", "",
                        " Office supplies " + std::to_string(j) + " "});
        phas.push_back({"1000", "C", amount, date, "Peak Holdings", "",
                        "Cafe\xCC\x81 payment " + std::to_string(j)});  // e + U+0301
    }
    emit("phas/postings.csv", csv::write(phas));

    std::vector<std::vector<std::string>> aas{
        {"account", "drcr", "amt", "txn_date", "company", "counterparty", "memo"}};
    std::vector<std::vector<std::string>> zas{
        {"acctRef", "direction", "value", "date", "company", "counterparty", "memo"}};
    for (std::size_t i = 0; i < spec.intercompany_pairs; ++i) {
        std::string amount = format_minor_units(fd::pair_amount_minor(i));
        std::string date = fd::pair_date(i);
        std::string invoice = std::to_string(1001 + i);
        aas.push_back({"2100", "DR", amount, date, "Acme", "Zenith", "Invoice " + invoice});
        aas.push_back({"2400", "CR", amount, date, "Acme", "", "Invoice " + invoice +
                                                                   " revenue"});
        zas.push_back({"3600", "debit", amount, date, "Zenith", "",
                       "Acme invoice " + invoice});
        zas.push_back({"3200", "credit", amount, date, "Zenith", "Acme",
                       "Acme invoice " + invoice + " payable"});
        info.intercompany_total_minor += fd::pair_amount_minor(i);
    }
    emit("aas/postings.csv", csv::write(aas));
    emit("zas/postings.csv", csv::write(zas));

    info.expected_merges = spec.intercompany_pairs;
    info.planted_foreign_keys = (spec.internal_transactions > 0 ? 1 : 0) +
                                (spec.intercompany_pairs > 0 ? 2 : 0);

    // --- table specs ----------------------------------------------------------
    auto table_spec = [&](const std::string& name, const std::string& amount_col,
                          const std::string& date_col) {
        TableSpec ts;
        ts.name = name;
        ts.format = TableFormat::Csv;
        ts.has_header = true;
        if (!amount_col.empty()) ts.columns[amount_col] = ColumnType::Decimal;
        if (!date_col.empty()) ts.columns[date_col] = ColumnType::Date;
        return ts;
    };
    emit("specs/phas_accounts.spec.json",
         table_spec("phas_accounts", "", "").to_json().dump(2) + "\n");
    emit("specs/aas_accounts.spec.json",
         table_spec("aas_accounts", "", "").to_json().dump(2) + "\n");
    emit("specs/zas_accounts.spec.json",
         table_spec("zas_accounts", "", "").to_json().dump(2) + "\n");
    emit("specs/phas_postings.spec.json",
         table_spec("phas_postings", "amount", "date").to_json().dump(2) + "\n");
    emit("specs/aas_postings.spec.json",
         table_spec("aas_postings", "amt", "txn_date").to_json().dump(2) + "\n");
    emit("specs/zas_postings.spec.json",
         table_spec("zas_postings", "value", "date").to_json().dump(2) + "\n");

    // --- inherited report queries ---------------------------------------------
    // Queries reference the as-loaded element ids; alias chains carry them
    // through every later rename.
    struct SystemIds {
        std::string system, postings, account_col, drcr_col, amount_col;
        std::string debit_code, credit_code, revenue_account;
    };
    const SystemIds systems[] = {
        {"PHAS", "phas_postings", "acct", "dr_cr", "amount", "D", "C", "1600"},
        {"AAS", "aas_postings", "account", "drcr", "amt", "DR", "CR", "2400"},
        {"ZAS", "zas_postings", "acctRef", "direction", "value", "debit", "credit", "3600"},
    };
    for (const SystemIds& s : systems) {
        ContentId dataset = element_id(ElementKind::Dataset, {}, s.system);
        ContentId table = element_id(ElementKind::Table, {dataset}, s.postings);
        ContentId account = element_id(ElementKind::Column, {table}, s.account_col);
        ContentId drcr = element_id(ElementKind::Column, {table}, s.drcr_col);
        ContentId amount = element_id(ElementKind::Column, {table}, s.amount_col);
        std::string lower = s.system;
        for (char& c : lower) c = static_cast<char>(std::tolower(c));

        ReportQuery ledger;
        ledger.target = table;
        ledger.group_by = account;
        ledger.aggregate = amount;
        emit("queries/" + lower + "_ledger.query.json", ledger.canonical_json() + "\n");

        ReportQuery debits;
        debits.target = table;
        debits.filters = {{drcr, s.debit_code}};
        debits.aggregate = amount;
        emit("queries/" + lower + "_balance_debits.query.json",
             debits.canonical_json() + "\n");

        ReportQuery credits;
        credits.target = table;
        credits.filters = {{drcr, s.credit_code}};
        credits.aggregate = amount;
        emit("queries/" + lower + "_balance_credits.query.json",
             credits.canonical_json() + "\n");

        ReportQuery pnl;
        pnl.target = table;
        pnl.filters = {{account, s.revenue_account}};
        pnl.aggregate = amount;
        emit("queries/" + lower + "_pnl.query.json", pnl.canonical_json() + "\n");
    }

    // --- integration mapping ----------------------------------------------------
    IntegrationMapping mapping;
    mapping.renames = {
        {"PHAS", "phas_accounts", "accounts"}, {"PHAS", "phas_postings", "postings"},
        {"PHAS", "acct", "account_number"},
        {"AAS", "aas_accounts", "accounts"},   {"AAS", "aas_postings", "postings"},
        {"AAS", "acct_no", "account_number"},  {"AAS", "account", "account_number"},
        {"AAS", "drcr", "dr_cr"},              {"AAS", "amt", "amount"},
        {"AAS", "txn_date", "date"},
        {"ZAS", "zas_accounts", "accounts"},   {"ZAS", "zas_postings", "postings"},
        {"ZAS", "accountNumber", "account_number"},
        {"ZAS", "acctRef", "account_number"},  {"ZAS", "direction", "dr_cr"},
        {"ZAS", "value", "amount"},
    };
    mapping.recodings = {
        {"dr_cr", {{"D", "debit"}, {"C", "credit"}}},
        {"drcr", {{"DR", "debit"}, {"CR", "credit"}}},
    };
    emit("mappings/integration.json", mapping.to_json().dump(2) + "\n");

    // --- identity criterion -------------------------------------------------------
    IdentityCriterion criterion;
    criterion.scope = {"postings"};
    criterion.equal_attributes = {"amount", "date"};
    criterion.counterparty_swap = true;
    criterion.drcr_opposed = true;
    emit("criteria/intercompany_transactions.json", criterion.to_json().dump(2) + "\n");

    // --- semantics ------------------------------------------------------------------
    Semantics semantics;
    semantics.systems = {
        {"PHAS", "Peak Holdings", "phas_postings", "dr_cr", "amount",
         {"D", "debit"}, {"C", "credit"}},
        {"AAS", "Acme", "aas_postings", "drcr", "amt", {"DR", "debit"}, {"CR", "credit"}},
        {"ZAS", "Zenith", "zas_postings", "direction", "value", {"debit"}, {"credit"}},
    };
    emit("semantics.json", semantics.to_json().dump(2) + "\n");

    // --- pipeline config ---------------------------------------------------------------
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    auto table_entry = [&](const std::string& file, const std::string& spec_file,
                           const std::string& system) {
        tables.push_back({{"file", file}, {"spec", spec_file}, {"system", system}});
    };
    table_entry("phas/accounts.csv", "specs/phas_accounts.spec.json", "PHAS");
    table_entry("phas/postings.csv", "specs/phas_postings.spec.json", "PHAS");
    table_entry("aas/accounts.csv", "specs/aas_accounts.spec.json", "AAS");
    table_entry("aas/postings.csv", "specs/aas_postings.spec.json", "AAS");
    table_entry("zas/accounts.csv", "specs/zas_accounts.spec.json", "ZAS");
    table_entry("zas/postings.csv", "specs/zas_postings.spec.json", "ZAS");

    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    auto stage = [&](const std::string& type, nlohmann::ordered_json bunits) {
        stages.push_back({{"type", type}, {"bunits", std::move(bunits)}});
    };
    stage("collect", nlohmann::ordered_json::array(
                         {{{"kind", "collect"},
                           {"params", {{"chunk_size", spec.chunk_size}}}}}));
    stage("load", nlohmann::ordered_json::array(
                      {{{"kind", "load_table"}},
                       {{"kind", "register_report"}, {"params", {{"queries", "queries"}}}},
                       {{"kind", "snapshot_report"}}}));
    stage("evolve", nlohmann::ordered_json::array({{{"kind", "clean_pass"}}}));
    stage("evolve", nlohmann::ordered_json::array(
                        {{{"kind", "infer_foreign_keys"},
                          {"params",
                           {{"min_inclusion", 1.0}, {"require_unique", true}}}}}));
    stage("evolve", nlohmann::ordered_json::array(
                        {{{"kind", "integrate_sources"},
                          {"params", {{"mapping", "mappings/integration.json"}}}}}));
    stage("evolve", nlohmann::ordered_json::array({{{"kind", "unify_types"}}}));
    stage("evolve", nlohmann::ordered_json::array({{{"kind", "apply_seed"}}}));
    stage("evolve",
          nlohmann::ordered_json::array(
              {{{"kind", "identity_merge"},
                {"params", {{"criterion", "criteria/intercompany_transactions.json"}}}}}));
    stage("evolve",
          nlohmann::ordered_json::array(
              {{{"kind", "dere_transform"},
                {"params", {{"criterion", "criteria/intercompany_transactions.json"}}}}}));
    stage("assimilate", nlohmann::ordered_json::array({{{"kind", "assimilate"}}}));
    stage("reuse", nlohmann::ordered_json::array(
                       {{{"kind", "reuse_export"},
                         {"params", {{"format", "csv-tables"}, {"dest", "export/csv"}}}},
                        {{"kind", "reuse_export"},
                         {"params", {{"format", "triples"}, {"dest", "export"}}}},
                        {{"kind", "reuse_export"},
                         {"params", {{"format", "dot"}, {"dest", "export"}}}}}));

    nlohmann::ordered_json gates = nlohmann::ordered_json::array();
    auto gate = [&](int after, std::vector<std::string> actions) {
        gates.push_back({{"after_stage", after}, {"actions", actions}});
    };
    gate(1, {"stats", "trial-balance"});
    gate(2, {"stats", "report-check", "trial-balance"});
    gate(3, {"report-check", "trial-balance"});
    gate(4, {"report-check", "trial-balance"});
    gate(5, {"stats", "report-check", "trial-balance", "dot-export"});
    gate(6, {"report-check", "trial-balance"});
    gate(7, {"report-check", "trial-balance"});
    gate(8, {"stats", "report-check", "trial-balance", "dot-export"});
    gate(9, {"report-check", "trial-balance"});

    nlohmann::ordered_json config{
        {"name", "intercompany-accounting"},
        {"semantics", "semantics.json"},
        {"slices", nlohmann::ordered_json::array(
                       {{{"name", "ledgers"},
                         {"sources",
                          {"phas/accounts.csv", "phas/postings.csv", "aas/accounts.csv",
                           "aas/postings.csv", "zas/accounts.csv", "zas/postings.csv"}},
                         {"tables", tables}}})},
        {"stages", stages},
        {"gates", gates}};
    emit("pipeline.json", config.dump(2) + "\n");

    // --- manifest -------------------------------------------------------------------------
    std::sort(info.files.begin(), info.files.end());
    nlohmann::ordered_json manifest_files = nlohmann::ordered_json::array();
    for (const fs::path& rel : info.files) {
        std::string bytes = read_file_bytes(destination / rel);
        manifest_files.push_back(
            {{"path", rel.generic_string()}, {"sha256", ContentId::of(bytes).hex()}});
    }
    nlohmann::ordered_json manifest{{"files", manifest_files}};
    write_file_bytes(destination / "MANIFEST.json", manifest.dump(2) + "\n");
    info.files.push_back("MANIFEST.json");
    return info;
}

}  // namespace bclearer

#endif
