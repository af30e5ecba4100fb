#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddlab/relations.hpp"

#include <cstdlib>
#include <fstream>

using namespace ddlab;

TEST_CASE("template parsing reads names, slots, terms, and flags") {
    auto ts = parse_templates(R"(
template demo kind=dd
own pair P1
slot a on A
slot b on A adjacent-to a
slot c on B
slot d on C
term 1: P1+@a P1-@b P1+@c P1-@d
term -1/2: P1-@a P1+@b P1+@c P1-@d
)");
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].name == "demo");
    CHECK(ts[0].kind == Kind::dd);
    CHECK(ts[0].slots.size() == 4);
    REQUIRE(ts[0].terms.size() == 2);
    CHECK(ts[0].terms[1].coeff == Rational(-1) / Rational(2));
}

TEST_CASE("template dump and parse round-trip") {
    auto ts = builtin_templates();
    auto back = parse_templates(dump_templates(ts));
    CHECK(dump_templates(back) == dump_templates(ts));
}

TEST_CASE("merge replaces same-named templates and appends new ones") {
    auto base = parse_templates(
        "template A kind=dd\nown pair P1\npredicate isolated-pair\n"
        "template B kind=dd\nown pair P1\npredicate isolated-pair\n");
    auto overlay = parse_templates(
        "template B kind=wedge\nown wedge W1\npredicate isolated-pair\n"
        "template C kind=dd\nown pair P1\npredicate isolated-pair\n");
    auto merged = merge_templates(base, overlay);
    REQUIRE(merged.size() == 3);
    CHECK(merged[0].name == "A");
    CHECK(merged[1].name == "B");
    CHECK(merged[1].kind == Kind::wedge);  // replaced in place
    CHECK(merged[2].name == "C");
}

TEST_CASE("template hash is stable and sensitive to edits") {
    auto ts = builtin_templates();
    CHECK(templates_hash_hex(ts) == templates_hash_hex(builtin_templates()));
    auto edited = ts;
    edited[0].name = "renamed";
    CHECK(templates_hash_hex(edited) != templates_hash_hex(ts));
}

TEST_CASE("template file loading overlays the builtin set") {
    std::string path = "/tmp/ddlab_test_overlay.tpl";
    {
        std::ofstream f(path);
        f << "template extra kind=dd\nown pair P1\npredicate isolated-pair\n";
    }
    auto ts = load_templates_file(path);
    CHECK(ts.size() == builtin_templates().size() + 1);
    CHECK(ts.back().name == "extra");
    std::remove(path.c_str());
}

TEST_CASE("environment override feeds load_templates") {
    std::string path = "/tmp/ddlab_test_env.tpl";
    {
        std::ofstream f(path);
        f << "template envextra kind=wedge\nown wedge W1\npredicate isolated-pair\n";
    }
    setenv("DDLAB_TEMPLATES", path.c_str(), 1);
    auto ts = load_templates();
    unsetenv("DDLAB_TEMPLATES");
    CHECK(ts.back().name == "envextra");
    CHECK(load_templates().size() == ts.size() - 1);
    std::remove(path.c_str());
}

TEST_CASE("isolated-pair predicate kills exactly the blocked diagram at degree 1") {
    RelationSystem sys = gen_dd_relations(1, 1);
    // Of the two degree-1 one-circle diagrams, exactly one has an isolated
    // pair; a single-entry kill row for it must be present.
    int kill_rows = 0;
    for (const auto& row : sys.rows)
        if (row.size() == 1) ++kill_rows;
    CHECK(kill_rows >= 1);
    CHECK(sys.quotient_dim() == 0);
}

TEST_CASE("some degree-1 relation row equates the interleaved and blocked diagrams") {
    RelationSystem sys = gen_dd_relations(1, 1);
    REQUIRE(sys.basis.size() == 2);
    bool found = false;
    for (const auto& row : sys.rows)
        if (row.size() == 2 && row[0].second + row[1].second == 0) found = true;
    CHECK(found);
}

TEST_CASE("pair-diagram dimensions: degree 0 is one for every circle count") {
    for (int m = 1; m <= 4; ++m) CHECK(gen_dd_relations(0, m).quotient_dim() == 1);
}

TEST_CASE("pair-diagram dimensions: degree 1 vanishes for every circle count") {
    for (int m = 1; m <= 4; ++m) CHECK(gen_dd_relations(1, m).quotient_dim() == 0);
}

TEST_CASE("pair-diagram dimensions at degree 2 for one to four circles") {
    CHECK(gen_dd_relations(2, 1).quotient_dim() == 1);
    CHECK(gen_dd_relations(2, 2).quotient_dim() == 2);
    CHECK(gen_dd_relations(2, 3).quotient_dim() == 4);
    CHECK(gen_dd_relations(2, 4).quotient_dim() == 8);
}

TEST_CASE("pair-diagram dimension at degree 3 on one circle") {
    CHECK(gen_dd_relations(3, 1).quotient_dim() == 1);
}

TEST_CASE("wedge dimensions across small strata") {
    for (int m = 1; m <= 3; ++m) {
        CHECK(gen_wedge_relations(0, m).quotient_dim() == 1);
        CHECK(gen_wedge_relations(1, m).quotient_dim() == 0);
    }
    CHECK(gen_wedge_relations(2, 1).quotient_dim() == 1);
    CHECK(gen_wedge_relations(2, 2).quotient_dim() == 4);
    CHECK(gen_wedge_relations(2, 3).quotient_dim() == 12);
}

TEST_CASE("four-term quotients on one circle") {
    CHECK(gen_4T(2, 1).quotient_dim() == 2);
    CHECK(gen_4T(3, 1).quotient_dim() == 3);
}

TEST_CASE("four-term rows vanish below degree 2") {
    CHECK(gen_4T(1, 1).rows.empty());
    CHECK(gen_4T(1, 2).rows.empty());
}

TEST_CASE("framing rows kill exactly the isolated-chord diagrams") {
    auto rows = gen_framing(2, 1);
    CHECK(rows.size() == 1);  // of (1,2,1,2) and (1,1,2,2), only the latter
    auto rows3 = gen_framing(3, 1);
    int isolated = 0;
    for (const Diagram& d : enumerate_diagrams(Kind::chord, 3, 1))
        if (has_isolated_chord(d)) ++isolated;
    CHECK(static_cast<int>(rows3.size()) == isolated);
}

TEST_CASE("relation rows stay inside their stratum basis") {
    for (int m = 1; m <= 2; ++m) {
        RelationSystem sys = gen_wedge_relations(2, m);
        int n = static_cast<int>(sys.basis.size());
        for (const auto& row : sys.rows)
            for (const auto& [idx, c] : row) {
                CHECK(idx >= 0);
                CHECK(idx < n);
                CHECK(c != Rational(0));
            }
    }
}

TEST_CASE("interval skeletons ground the same templates") {
    Skeleton sk(2, CompKind::interval);
    RelationSystem sys = gen_dd_relations(1, sk, load_templates());
    CHECK(sys.basis.size() > 0);
    CHECK(sys.relation_count > 0);
}
