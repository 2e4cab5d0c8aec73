#include <doctest.h>

#include <bclearer/csv.hpp>
#include <bclearer/fixtures.hpp>

#include <map>
#include <set>

#include "temp_dir.hpp"

using namespace bclearer;

namespace {

// Independent summation oracle over the raw CSV text: parse fields by hand
// and total debit/credit minor units per system.
struct OracleTotals {
    long long debit = 0;
    long long credit = 0;
};

long long oracle_minor(const std::string& s) {
    std::string t;
    for (char c : s)
        if (c != ' ') t += c;
    auto dot = t.find('.');
    long long whole = std::stoll(t.substr(0, dot));
    long long frac = std::stoll(t.substr(dot + 1));
    return whole * 100 + frac;
}

OracleTotals oracle_postings(const fs::path& csv_file, std::size_t drcr_col,
                             std::size_t amount_col, const std::set<std::string>& debit_codes) {
    OracleTotals totals;
    auto rows = csv::parse(read_file_bytes(csv_file));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        long long minor = oracle_minor(rows[i][amount_col]);
        if (debit_codes.count(rows[i][drcr_col])) totals.debit += minor;
        else totals.credit += minor;
    }
    return totals;
}

}  // namespace

TEST_CASE("fixture generation is byte-deterministic") {
    TempDir a("fixture_a"), b("fixture_b");
    FixtureSpec spec;
    FixtureInfo ia = generate_fixture(spec, a.path());
    FixtureInfo ib = generate_fixture(spec, b.path());
    REQUIRE(ia.files == ib.files);
    for (const fs::path& rel : ia.files) {
        CHECK(read_file_bytes(a.path() / rel) == read_file_bytes(b.path() / rel));
    }
}

TEST_CASE("generated ledgers balance per company") {
    TempDir dir("fixture_balance");
    generate_fixture(FixtureSpec{}, dir.path());

    // PHAS: dr_cr at column 1, amount at column 2, debit code D.
    OracleTotals phas = oracle_postings(dir.path() / "phas/postings.csv", 1, 2, {"D"});
    CHECK(phas.debit == phas.credit);
    CHECK(phas.debit == 7525);  // one internal transaction of 75.25

    OracleTotals aas = oracle_postings(dir.path() / "aas/postings.csv", 1, 2, {"DR"});
    CHECK(aas.debit == aas.credit);
    CHECK(aas.debit == 35000);  // 100.00 + 250.00

    OracleTotals zas = oracle_postings(dir.path() / "zas/postings.csv", 1, 2, {"debit"});
    CHECK(zas.debit == zas.credit);
    CHECK(zas.debit == 35000);
}

TEST_CASE("intercompany mirroring by construction") {
    TempDir dir("fixture_mirror");
    FixtureInfo info = generate_fixture(FixtureSpec{}, dir.path());
    CHECK(info.expected_merges == 2);
    CHECK(info.intercompany_total_minor == 35000);

    auto aas = csv::parse(read_file_bytes(dir.path() / "aas/postings.csv"));
    auto zas = csv::parse(read_file_bytes(dir.path() / "zas/postings.csv"));
    // Every AAS intercompany leg (counterparty Zenith) has exactly one ZAS
    // mirror with the amount and date equal and the dr/cr mark opposed.
    std::size_t mirrors = 0;
    for (std::size_t i = 1; i < aas.size(); ++i) {
        if (aas[i][5] != "Zenith") continue;
        std::size_t hits = 0;
        for (std::size_t j = 1; j < zas.size(); ++j) {
            if (zas[j][5] != "Acme") continue;
            if (zas[j][2] == aas[i][2] && zas[j][3] == aas[i][3] &&
                aas[i][1] == "DR" && zas[j][1] == "credit")
                ++hits;
        }
        CHECK(hits == 1);
        ++mirrors;
    }
    CHECK(mirrors == 2);
}

TEST_CASE("fixture manifest lists every file with its hash") {
    TempDir dir("fixture_manifest");
    FixtureInfo info = generate_fixture(FixtureSpec{}, dir.path());
    nlohmann::json manifest =
        nlohmann::json::parse(read_file_bytes(dir.path() / "MANIFEST.json"));
    std::set<std::string> listed;
    for (const auto& f : manifest.at("files")) {
        std::string rel = f.at("path").get<std::string>();
        listed.insert(rel);
        CHECK(ContentId::of(read_file_bytes(dir.path() / rel)).hex() ==
              f.at("sha256").get<std::string>());
    }
    for (const fs::path& rel : info.files) {
        if (rel == "MANIFEST.json") continue;
        CHECK(listed.count(rel.generic_string()) == 1);
    }
}

TEST_CASE("zero-pair spec leaves the intercompany ledgers empty") {
    TempDir dir("fixture_zero");
    FixtureSpec spec;
    spec.intercompany_pairs = 0;
    FixtureInfo info = generate_fixture(spec, dir.path());
    CHECK(info.expected_merges == 0);
    CHECK(info.intercompany_total_minor == 0);
    auto aas = csv::parse(read_file_bytes(dir.path() / "aas/postings.csv"));
    CHECK(aas.size() == 1);  // header only
}

TEST_CASE("dirty text is planted outside the queried columns") {
    TempDir dir("fixture_dirty");
    generate_fixture(FixtureSpec{}, dir.path());
    auto phas = csv::parse(read_file_bytes(dir.path() / "phas/postings.csv"));
    // The memo column carries the whitespace and the decomposed accent.
    bool dirty_ws = false, dirty_nfc = false;
    for (std::size_t i = 1; i < phas.size(); ++i) {
        const std::string& memo = phas[i][6];
        if (!memo.empty() && (memo.front() == ' ' || memo.back() == ' ')) dirty_ws = true;
        if (memo.find("\xCC\x81") != std::string::npos) dirty_nfc = true;
        // Figure-bearing columns are clean.
        for (std::size_t j : {std::size_t(0), std::size_t(1), std::size_t(2), std::size_t(3)}) {
            CHECK(phas[i][j] == unicode::trim_whitespace(phas[i][j]));
        }
    }
    CHECK(dirty_ws);
    CHECK(dirty_nfc);
}
