#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddlab/exactlin.hpp"

#include <algorithm>
#include <random>

using namespace ddlab;

namespace {

SparseVec vec(std::initializer_list<std::pair<int, int>> entries) {
    std::vector<std::pair<int, Rational>> raw;
    for (auto [i, c] : entries) raw.emplace_back(i, Rational(c));
    return normalized(std::move(raw));
}

}  // namespace

TEST_CASE("normalized merges duplicate indices and drops zeros") {
    auto v = normalized({{2, Rational(1)}, {0, Rational(3)}, {2, Rational(-1)}, {1, Rational(0)}});
    REQUIRE(v.size() == 1);
    CHECK(v[0].first == 0);
    CHECK(v[0].second == Rational(3));
}

TEST_CASE("axpy accumulates exactly with rational coefficients") {
    SparseVec a = vec({{0, 1}, {2, 2}});
    axpy(a, Rational(1) / Rational(2), vec({{0, -2}, {1, 4}, {2, 6}}));
    REQUIRE(a.size() == 2);
    CHECK(a[0] == std::pair<int, Rational>{1, Rational(2)});
    CHECK(a[1] == std::pair<int, Rational>{2, Rational(5)});
}

TEST_CASE("rank of a small dependent system") {
    std::vector<SparseVec> rows = {vec({{0, 1}, {1, 1}}), vec({{1, 1}, {2, 1}}),
                                   vec({{0, 1}, {2, -1}})};  // row0 - row1 = row2... up to sign
    CHECK(reduce(rows, 3).rank() == 2);
    CHECK(quotient_dim(3, rows) == 1);
}

TEST_CASE("echelon membership separates span members from outsiders") {
    std::vector<SparseVec> rows = {vec({{0, 1}, {1, -1}}), vec({{1, 1}, {2, -1}})};
    EchelonForm e = reduce(rows, 4);
    CHECK(in_span(vec({{0, 2}, {2, -2}}), e));       // 2*(row0 + row1)
    CHECK_FALSE(in_span(vec({{0, 1}, {1, 1}}), e));  // wrong relative sign
    CHECK_FALSE(in_span(vec({{3, 1}}), e));          // untouched coordinate
    CHECK(in_span({}, e));                           // zero vector is always inside
}

TEST_CASE("streaming reducer agrees with batch reduction") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> idx(0, 19), coef(-4, 4);
    std::vector<SparseVec> rows;
    for (int r = 0; r < 60; ++r) {
        std::vector<std::pair<int, Rational>> raw;
        for (int k = 0; k < 3; ++k) {
            int c = coef(rng);
            if (c != 0) raw.emplace_back(idx(rng), Rational(c));
        }
        rows.push_back(normalized(std::move(raw)));
    }
    EchelonForm batch = reduce(rows, 20);
    RowReducer streaming(20);
    for (const auto& r : rows) streaming.add(r);
    CHECK(streaming.rows_fed() == 60);
    EchelonForm stream = streaming.finish();
    CHECK(stream.rank() == batch.rank());
    for (const auto& r : rows) {
        CHECK(in_span(r, stream));
        CHECK(in_span(r, batch));
    }
}

TEST_CASE("span equality detects equal spans under different presentations") {
    std::vector<SparseVec> A = {vec({{0, 1}, {1, 1}}), vec({{1, 1}, {2, 1}})};
    std::vector<SparseVec> B = {vec({{0, 2}, {1, 2}}), vec({{0, 1}, {2, -1}})};  // scaled, mixed
    CHECK(span_equal(A, B, 3));
    std::vector<SparseVec> C = {vec({{0, 1}, {1, 1}})};
    CHECK_FALSE(span_equal(A, C, 3));
}

TEST_CASE("relation system computes index, rank, and quotient lazily") {
    RelationSystem sys;
    sys.basis = {"a", "b", "c"};
    sys.rows = {vec({{0, 1}, {1, -1}})};
    sys.relation_count = 1;
    CHECK(sys.index_of("b") == 1);
    CHECK(sys.index_of("missing") == -1);
    CHECK(sys.rank() == 1);
    CHECK(sys.quotient_dim() == 2);
}

TEST_CASE("combination arithmetic drops cancelled terms") {
    LinearCombo c;
    c.add("x", Rational(2));
    c.add("y", Rational(1));
    c.add("x", Rational(-2));
    CHECK(c.terms.size() == 1);
    c *= Rational(0);
    CHECK(c.empty());
}

TEST_CASE("combination serialization emits one sorted line per term") {
    LinearCombo c;
    c.add("kind: chord\nskeleton: C\ncomp 1: 1 1\n", Rational(-1));
    c.add("kind: chord\nskeleton: C\ncomp 1:\n", Rational(1) / Rational(3));
    std::string s = c.serialize();
    auto first_nl = s.find('\n');
    CHECK(s.substr(0, first_nl).rfind("1/3 * ", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}

TEST_CASE("projection onto a stratum basis rejects foreign keys") {
    LinearCombo c;
    c.add("absent", Rational(1));
    CHECK_THROWS_AS(c.to_vector({"a", "b"}), ValidityError);
}

TEST_CASE("rref rows reload as a trusted echelon form") {
    std::vector<SparseVec> rows = {vec({{0, 1}, {2, 3}}), vec({{1, 1}, {2, -1}})};
    EchelonForm e = reduce(rows, 3);
    EchelonForm reloaded = EchelonForm::from_rref(e.rref(), 3);
    CHECK(reloaded.rank() == e.rank());
    CHECK(in_span(vec({{0, 1}, {1, 3}}), reloaded) == in_span(vec({{0, 1}, {1, 3}}), e));
}
