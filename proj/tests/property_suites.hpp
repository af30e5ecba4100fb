// Four randomized property suites shared by the property test binary and the
// acceptance harness. Each suite runs `cases` seeded cases and reports the
// failure count plus a description of the first failure.
#pragma once

#include "ddlab/relations.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace ddlab::props {

struct SuiteResult {
    int cases = 0;
    int failures = 0;
    std::string first_failure;

    void fail(const std::string& what) {
        if (failures++ == 0) first_failure = what;
    }
};

struct Stratum {
    Kind kind;
    int degree;
    int components;
};

inline const std::vector<Stratum>& small_strata() {
    static const std::vector<Stratum> list = {
        {Kind::chord, 1, 1}, {Kind::chord, 1, 2}, {Kind::chord, 2, 1}, {Kind::chord, 2, 2},
        {Kind::chord, 3, 1}, {Kind::dd, 1, 1},    {Kind::dd, 1, 2},    {Kind::dd, 2, 1},
        {Kind::dd, 2, 2},    {Kind::wedge, 1, 1}, {Kind::wedge, 1, 2}, {Kind::wedge, 2, 1},
        {Kind::wedge, 2, 2}};
    return list;
}

inline const std::vector<Diagram>& stratum_diagrams(const Stratum& s) {
    static std::map<std::tuple<int, int, int>, std::vector<Diagram>> memo;
    auto key = std::make_tuple(static_cast<int>(s.kind), s.degree, s.components);
    auto it = memo.find(key);
    if (it == memo.end())
        it = memo.emplace(key, enumerate_diagrams(s.kind, s.degree, s.components)).first;
    return it->second;
}

// ---------------------------------------------------------------------------
// Suite 1: canonicalization is invariant on the symmetry orbit and idempotent
// ---------------------------------------------------------------------------

inline Diagram apply_orbit_element(const Diagram& d, std::mt19937_64& rng) {
    Diagram out = d;
    // random rotation of every circle
    for (std::size_t c = 0; c < out.comps.size(); ++c) {
        if (out.skeleton[c] != CompKind::circle || out.comps[c].size() < 2) continue;
        std::uniform_int_distribution<std::size_t> rot(0, out.comps[c].size() - 1);
        std::size_t r = rot(rng);
        std::rotate(out.comps[c].begin(), out.comps[c].begin() + r, out.comps[c].end());
    }
    // random relabeling of the dense ids 1..degree
    int deg = diagram_degree(d);
    std::vector<int> perm(deg);
    for (int i = 0; i < deg; ++i) perm[i] = i + 1;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (auto& comp : out.comps)
        for (Token& t : comp) t.id = perm[t.id - 1];
    return out;
}

inline SuiteResult suite_canonical_orbit(unsigned long seed, int cases) {
    SuiteResult res;
    std::mt19937_64 rng(seed ^ 0x0c0a0b01ull);
    for (int i = 0; i < cases; ++i) {
        ++res.cases;
        const Stratum& s = small_strata()[rng() % small_strata().size()];
        const auto& diagrams = stratum_diagrams(s);
        if (diagrams.empty()) continue;
        const Diagram& d = diagrams[rng() % diagrams.size()];
        std::string key = canonical_key(d);
        Diagram moved = apply_orbit_element(d, rng);
        if (canonical_key(moved) != key) {
            res.fail("orbit element changed the canonical key of " + to_single_line(key));
            continue;
        }
        Diagram rep = parse_diagram(key);
        if (canonical_key(rep) != key)
            res.fail("canonicalization is not idempotent on " + to_single_line(key));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Suite 2: enumeration matches brute-force generation of all arrangements
// ---------------------------------------------------------------------------

inline std::vector<Token> stratum_tokens(Kind kind, int degree) {
    std::vector<Token> toks;
    for (int id = 1; id <= degree; ++id) switch (kind) {
            case Kind::chord:
                toks.push_back({id, 0});
                toks.push_back({id, 0});
                break;
            case Kind::dd:
                for (char tag : {'+', '+', '-', '-'}) toks.push_back({id, tag});
                break;
            case Kind::wedge:
                for (char tag : {'^', '+', '-'}) toks.push_back({id, tag});
                break;
            default: break;
        }
    return toks;
}

inline const std::set<std::string>& brute_keys(const Stratum& s) {
    static std::map<std::tuple<int, int, int>, std::set<std::string>> memo;
    auto mkey = std::make_tuple(static_cast<int>(s.kind), s.degree, s.components);
    auto it = memo.find(mkey);
    if (it != memo.end()) return it->second;

    std::set<std::string> keys;
    std::vector<Token> toks = stratum_tokens(s.kind, s.degree);
    auto cmp = [](const Token& a, const Token& b) {
        return std::tie(a.id, a.tag) < std::tie(b.id, b.tag);
    };
    std::sort(toks.begin(), toks.end(), cmp);
    int n = static_cast<int>(toks.size()), m = s.components;
    do {
        // split the permutation into m ordered blocks (blocks may be empty)
        std::vector<int> cuts(m - 1, 0);
        auto emit = [&]() {
            Diagram d;
            d.kind = s.kind;
            d.skeleton = circles(m);
            d.comps.assign(m, {});
            int prev = 0;
            for (int c = 0; c < m; ++c) {
                int end = c + 1 < m ? cuts[c] : n;
                for (int p = prev; p < end; ++p) d.comps[c].push_back(toks[p]);
                prev = end;
            }
            try {
                validate_diagram(d);
            } catch (const ValidityError&) {
                return;
            }
            keys.insert(canonical_key(d));
        };
        if (m == 1) {
            emit();
        } else {
            // nondecreasing cut positions in [0, n]
            std::function<void(int, int)> rec = [&](int idx, int from) {
                if (idx == m - 1) {
                    emit();
                    return;
                }
                for (int cut = from; cut <= n; ++cut) {
                    cuts[idx] = cut;
                    rec(idx + 1, cut);
                }
            };
            rec(0, 0);
        }
    } while (std::next_permutation(toks.begin(), toks.end(), cmp));
    return memo.emplace(mkey, std::move(keys)).first->second;
}

inline SuiteResult suite_enumeration_brute(unsigned long seed, int cases) {
    SuiteResult res;
    std::mt19937_64 rng(seed ^ 0x0e0b0702ull);
    for (int i = 0; i < cases; ++i) {
        ++res.cases;
        const Stratum& s = small_strata()[rng() % small_strata().size()];
        const auto& brute = brute_keys(s);
        const auto& enumerated = stratum_diagrams(s);
        std::set<std::string> listed;
        for (const Diagram& d : enumerated) listed.insert(canonical_key(d));
        std::ostringstream where;
        where << kind_name(s.kind) << " degree " << s.degree << " components " << s.components;
        if (listed.size() != enumerated.size()) {
            res.fail("duplicate canonical keys in enumeration of " + where.str());
            continue;
        }
        if (listed != brute) {
            res.fail("enumeration of " + where.str() + " lists " +
                     std::to_string(listed.size()) + " classes, brute force finds " +
                     std::to_string(brute.size()));
            continue;
        }
        if (!enumerated.empty()) {
            const Diagram& d = enumerated[rng() % enumerated.size()];
            if (!brute.count(canonical_key(d)))
                res.fail("enumerated diagram missing from brute-force set in " + where.str());
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Suite 3: rank is invariant under row shuffling and rescaling
// ---------------------------------------------------------------------------

inline Rational random_rational(std::mt19937_64& rng, bool nonzero) {
    std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
    int p = num(rng);
    while (nonzero && p == 0) p = num(rng);
    return Rational(p) / Rational(den(rng));
}

inline std::vector<SparseVec> random_rows(std::mt19937_64& rng, int& basis_size) {
    std::uniform_int_distribution<int> nb(4, 20), nr(2, 12), supp(1, 4);
    basis_size = nb(rng);
    std::uniform_int_distribution<int> idx(0, basis_size - 1);
    std::vector<SparseVec> rows;
    int r = nr(rng);
    for (int i = 0; i < r; ++i) {
        std::vector<std::pair<int, Rational>> raw;
        int s = supp(rng);
        for (int k = 0; k < s; ++k) raw.emplace_back(idx(rng), random_rational(rng, false));
        rows.push_back(normalized(std::move(raw)));
    }
    return rows;
}

inline SuiteResult suite_rank_invariance(unsigned long seed, int cases) {
    SuiteResult res;
    std::mt19937_64 rng(seed ^ 0x0a0d0c03ull);
    for (int i = 0; i < cases; ++i) {
        ++res.cases;
        int n = 0;
        auto rows = random_rows(rng, n);
        int rank0 = reduce(rows, n).rank();
        auto shuffled = rows;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto& row : shuffled) {
            Rational c = random_rational(rng, true);
            for (auto& [j, v] : row) v *= c;
        }
        if (reduce(shuffled, n).rank() != rank0) {
            res.fail("rank changed under shuffle+scale at case " + std::to_string(i));
            continue;
        }
        auto doubled = rows;
        doubled.insert(doubled.end(), rows.begin(), rows.end());
        if (reduce(doubled, n).rank() != rank0)
            res.fail("rank changed when rows were repeated at case " + std::to_string(i));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Suite 4: span membership agrees with rank growth
// ---------------------------------------------------------------------------

inline SuiteResult suite_span_rank_consistency(unsigned long seed, int cases) {
    SuiteResult res;
    std::mt19937_64 rng(seed ^ 0x050a0404ull);
    for (int i = 0; i < cases; ++i) {
        ++res.cases;
        int n = 0;
        auto rows = random_rows(rng, n);
        EchelonForm e = reduce(rows, n);
        int rank0 = e.rank();

        // a random combination of the rows must lie in the span
        SparseVec combo;
        for (const auto& row : rows)
            if (rng() % 2) axpy(combo, random_rational(rng, false), row);
        if (!in_span(combo, e)) {
            res.fail("row combination reported outside its own span at case " + std::to_string(i));
            continue;
        }
        auto with_combo = rows;
        with_combo.push_back(combo);
        if (reduce(with_combo, n).rank() != rank0) {
            res.fail("in-span vector increased the rank at case " + std::to_string(i));
            continue;
        }

        // a random coordinate vector: membership must match rank growth
        int j = static_cast<int>(rng() % n);
        SparseVec unit = {{j, Rational(1)}};
        auto with_unit = rows;
        with_unit.push_back(unit);
        bool member = in_span(unit, e);
        bool grew = reduce(with_unit, n).rank() == rank0 + 1;
        if (member == grew)
            res.fail("membership and rank growth disagree for a coordinate vector at case " +
                     std::to_string(i));
    }
    return res;
}

}  // namespace ddlab::props
