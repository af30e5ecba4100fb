// Linear maps between diagram species: the signed chord-choice expansion of
// pair and wedge diagrams, the partner-chord section nu (adding a minus chord
// per plus chord), STU reduction of trivalent diagrams onto chord diagrams,
// strutless generator enumeration, and the triple-linking generator.
#pragma once

#include "ddlab/relations.hpp"

#include <map>
#include <string>
#include <vector>

namespace ddlab {

inline LinearCombo combo_sum(const LinearCombo& a, const LinearCombo& b,
                             const Rational& scale = Rational(1)) {
    LinearCombo out = a;
    for (const auto& [k, c] : b.terms) out.add(k, scale * c);
    return out;
}

inline nlohmann::json combo_json(const LinearCombo& combo) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, c] : combo.terms) {
        nlohmann::json t;
        t["coefficient"] = c.str();
        t["diagram"] = detail::diagram_json(parse_diagram(k));
        terms.push_back(t);
    }
    nlohmann::json out;
    out["terms"] = terms;
    return out;
}

// ---------------------------------------------------------------------------
// iota: expand each pair (or wedge) into a signed choice of one chord
// ---------------------------------------------------------------------------
//
// Every pair contributes one chord per term: either its + chord (factor +1) or
// its - chord (factor -1); the unchosen chord's endpoints are erased. For a
// wedge the chosen chord runs from the tip to the chosen leg, and the other
// leg's endpoint is erased. 2^degree terms before cancellation.

inline LinearCombo iota(const Diagram& d) {
    validate_diagram(d);
    if (d.kind != Kind::dd && d.kind != Kind::wedge)
        throw ValidityError("iota expects a pair or wedge diagram");
    std::vector<int> ids;
    for (const auto& comp : d.comps)
        for (const Token& t : comp)
            if (std::find(ids.begin(), ids.end(), t.id) == ids.end()) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    int m = static_cast<int>(ids.size());
    auto id_slot = [&](int id) {
        return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };

    LinearCombo out;
    for (int mask = 0; mask < (1 << m); ++mask) {
        Diagram ch;
        ch.kind = Kind::chord;
        ch.skeleton = d.skeleton;
        ch.comps.assign(d.comps.size(), {});
        int negs = 0;
        for (int s = 0; s < m; ++s)
            if ((mask >> s) & 1) ++negs;
        for (std::size_t c = 0; c < d.comps.size(); ++c)
            for (const Token& t : d.comps[c]) {
                char chosen = ((mask >> id_slot(t.id)) & 1) ? '-' : '+';
                if (t.tag == '^' || t.tag == chosen) ch.comps[c].push_back({t.id, 0});
            }
        out.add(canonical_key(ch), (negs % 2) ? Rational(-1) : Rational(1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// nu: add a minus partner per chord (one-circle and two-interval skeletons)
// ---------------------------------------------------------------------------

namespace detail {

// Appends the minus partners along interval strands: each strand's suffix
// repeats, per chord incident to it, one minus endpoint, stacked in chord
// order (reversed when `reverse`). Works for any interval count; only the
// one- and two-strand cases are well defined modulo relations.
inline Diagram nu_append_intervals(const Diagram& d, bool reverse) {
    Diagram out;
    out.kind = Kind::dd;
    out.skeleton = d.skeleton;
    out.comps = d.comps;
    for (auto& comp : out.comps)
        for (Token& t : comp) t.tag = '+';
    std::map<int, std::vector<int>> strands_of;  // chord id -> incident strands
    for (int c = 0; c < static_cast<int>(d.comps.size()); ++c)
        for (const Token& t : d.comps[c]) strands_of[t.id].push_back(c);
    std::vector<int> order;
    for (const auto& [id, v] : strands_of) order.push_back(id);
    std::sort(order.begin(), order.end());
    if (reverse) std::reverse(order.begin(), order.end());
    for (int id : order)
        for (int c : strands_of[id]) out.comps[c].push_back({id, '-'});
    return out;
}

}  // namespace detail

// The naive extension parameterized by stacking order; used by the
// multi-strand failure experiment.
inline Diagram nu_naive(const Diagram& d, bool reverse = false) {
    validate_diagram(d);
    if (d.kind != Kind::chord) throw ValidityError("nu expects a chord diagram");
    for (CompKind ck : d.skeleton)
        if (ck != CompKind::interval)
            throw ValidityError("nu_naive expects an all-interval skeleton");
    return detail::nu_append_intervals(d, reverse);
}

inline Diagram nu(const Diagram& d) {
    validate_diagram(d);
    if (d.kind != Kind::chord) throw ValidityError("nu expects a chord diagram");
    bool knot = d.skeleton.size() == 1 && d.skeleton[0] == CompKind::circle;
    bool two_strings =
        d.skeleton.size() == 2 && d.skeleton[0] == CompKind::interval && d.skeleton[1] == CompKind::interval;
    if (!knot && !two_strings)
        throw ValidityError(
            "nu supports exactly one circle or two intervals; with more strands "
            "the placement of the added minus chords changes the result");
    if (two_strings) return detail::nu_append_intervals(d, false);

    // Knot case: plus chords keep their positions; all minus endpoints form one
    // mutually nested block at the serialization origin, chord 1 innermost.
    Diagram out;
    out.kind = Kind::dd;
    out.skeleton = d.skeleton;
    out.comps.assign(1, {});
    std::vector<int> ids;
    for (const Token& t : d.comps[0])
        if (std::find(ids.begin(), ids.end(), t.id) == ids.end()) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    for (auto it = ids.rbegin(); it != ids.rend(); ++it) out.comps[0].push_back({*it, '-'});
    for (int id : ids) out.comps[0].push_back({id, '-'});
    for (const Token& t : d.comps[0]) out.comps[0].push_back({t.id, '+'});
    return out;
}

// ---------------------------------------------------------------------------
// STU reduction of trivalent diagrams
// ---------------------------------------------------------------------------

namespace detail {

// A resolution site: an internal vertex joined by one edge to a skeleton
// endpoint. Ordered by (vertex, endpoint component, endpoint position).
struct StuSite {
    int vertex = 0;  // 1-based internal vertex
    int edge = -1;   // edge index joining -vertex to +external
    int comp = 0, pos = 0;
};

inline std::vector<StuSite> stu_sites(const Diagram& d) {
    std::map<int, std::pair<int, int>> where;  // external id -> (comp, pos)
    for (int c = 0; c < static_cast<int>(d.comps.size()); ++c)
        for (int p = 0; p < static_cast<int>(d.comps[c].size()); ++p) where[d.comps[c][p].id] = {c, p};
    std::vector<StuSite> sites;
    for (int e = 0; e < static_cast<int>(d.edges.size()); ++e) {
        auto [a, b] = d.edges[e];
        if (a > 0 && b > 0) continue;
        if (a < 0 && b < 0) continue;
        int v = a < 0 ? -a : -b;
        int ext = a > 0 ? a : b;
        auto [c, p] = where.at(ext);
        sites.push_back({v, e, c, p});
    }
    std::sort(sites.begin(), sites.end(), [](const StuSite& x, const StuSite& y) {
        return std::tie(x.vertex, x.comp, x.pos, x.edge) < std::tie(y.vertex, y.comp, y.pos, y.edge);
    });
    return sites;
}

// Resolves one site: the vertex is deleted and its two remaining edges attach
// to the skeleton where the endpoint was, in the two possible orders. Returns
// the pair (first-then-second, second-then-first); caller subtracts.
inline std::pair<Diagram, Diagram> stu_resolve(const Diagram& d, const StuSite& site) {
    int vi = site.vertex;
    // Remaining edges of vi in cyclic orientation order starting after the
    // resolved edge.
    std::array<int, 3> tri = d.orient[vi - 1];
    int k = 0;
    while (tri[k] != site.edge) ++k;
    int e1 = tri[(k + 1) % 3], e2 = tri[(k + 2) % 3];

    int max_ext = 0;
    for (const auto& comp : d.comps)
        for (const Token& t : comp) max_ext = std::max(max_ext, t.id);
    int na = max_ext + 1, nb = max_ext + 2;

    Diagram base;
    base.kind = Kind::trivalent;
    base.skeleton = d.skeleton;
    base.internals = d.internals - 1;
    base.comps = d.comps;
    // Replace the endpoint token with the two new attachment points.
    {
        auto& comp = base.comps[site.comp];
        comp[site.pos] = Token{na, 'e'};
        comp.insert(comp.begin() + site.pos + 1, Token{nb, 'e'});
    }
    // Drop the resolved edge and renumber the higher internal vertices down.
    std::vector<int> edge_new(d.edges.size(), -1);
    auto remap_vertex = [&](int v) {
        if (v >= 0) return v;
        int i = -v;
        return i > vi ? -(i - 1) : v;
    };
    for (int e = 0; e < static_cast<int>(d.edges.size()); ++e) {
        if (e == site.edge) continue;
        auto [a, b] = d.edges[e];
        edge_new[e] = static_cast<int>(base.edges.size());
        base.edges.push_back({remap_vertex(a), remap_vertex(b)});
    }
    base.orient.clear();
    for (int i = 1; i <= d.internals; ++i) {
        if (i == vi) continue;
        std::array<int, 3> t = d.orient[i - 1];
        for (int& x : t) x = edge_new[x];
        base.orient.push_back(t);
    }
    // The two remaining edges lose their vertex endpoint and gain the new
    // skeleton attachments, in both orders.
    auto attach = [&](Diagram& out, int edge_old, int ext_id) {
        auto& e = out.edges[edge_new[edge_old]];
        if (e.first == -vi) e.first = ext_id;
        else e.second = ext_id;
    };
    Diagram t = base, u = base;
    if (e1 == e2) {
        // Both remaining stubs belong to a single doubled edge at the vertex.
        t.edges[edge_new[e1]] = {na, nb};
        u.edges[edge_new[e1]] = {nb, na};
    } else {
        attach(t, e1, na);
        attach(t, e2, nb);
        attach(u, e1, nb);
        attach(u, e2, na);
    }
    return {t, u};
}

}  // namespace detail

inline bool has_strut(const Diagram& d) {
    for (auto [a, b] : d.edges)
        if (a > 0 && b > 0) return true;
    return false;
}

// Rewrites internal vertices one STU step at a time, always at the least
// eligible (vertex, skeleton position) site, until only chords remain.
inline LinearCombo stu_reduce(const Diagram& d) {
    validate_diagram(d);
    if (d.kind != Kind::trivalent) throw ValidityError("stu_reduce expects a trivalent diagram");
    if (d.internals == 0) {
        // Chord-only: each edge joins two skeleton endpoints.
        Diagram ch;
        ch.kind = Kind::chord;
        ch.skeleton = d.skeleton;
        ch.comps.assign(d.comps.size(), {});
        std::map<int, int> chord_of;  // external id -> chord id
        int next = 1;
        for (auto [a, b] : d.edges) {
            chord_of[a] = next;
            chord_of[b] = next;
            ++next;
        }
        for (std::size_t c = 0; c < d.comps.size(); ++c)
            for (const Token& t : d.comps[c]) ch.comps[c].push_back({chord_of.at(t.id), 0});
        LinearCombo out;
        out.add(canonical_key(ch), Rational(1));
        return out;
    }
    auto sites = detail::stu_sites(d);
    if (sites.empty())
        throw ValidityError("no reducible vertex: an internal vertex must neighbor the skeleton");
    auto [t, u] = detail::stu_resolve(d, sites.front());
    return combo_sum(stu_reduce(t), stu_reduce(u), Rational(-1));
}

// Every complete reduction of `d` obtained by choosing eligible sites freely;
// used to check that the reduced class does not depend on the order.
inline std::vector<LinearCombo> stu_reduce_all_orders(const Diagram& d) {
    validate_diagram(d);
    if (d.internals == 0) return {stu_reduce(d)};
    std::vector<LinearCombo> out;
    for (const auto& site : detail::stu_sites(d)) {
        auto [t, u] = detail::stu_resolve(d, site);
        for (const auto& ct : stu_reduce_all_orders(t))
            for (const auto& cu : stu_reduce_all_orders(u)) out.push_back(combo_sum(ct, cu, Rational(-1)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strutless generators and the image span of iota
// ---------------------------------------------------------------------------

// Trivalent diagrams of the stratum in which every edge meets an internal
// vertex (equivalently: every dashed component carries one).
inline std::vector<Diagram> strutless_generators(int degree, int components,
                                                 double budget = kDefaultBudget) {
    std::vector<Diagram> out;
    for (Diagram& d : enumerate_diagrams(Kind::trivalent, degree, components, budget))
        if (!has_strut(d)) out.push_back(std::move(d));
    return out;
}

// Rows { iota(D) : D in the (kind, degree, components) stratum }, expressed in
// the chord stratum basis.
inline RelationSystem iota_image_span(Kind kind, int degree, int components,
                                      double budget = kDefaultBudget) {
    if (kind != Kind::dd && kind != Kind::wedge)
        throw ValidityError("iota_image_span expects kind dd or wedge");
    RelationSystem sys;
    for (const Diagram& c : enumerate_diagrams(Kind::chord, degree, components, budget))
        sys.basis.push_back(canonical_key(c));
    std::sort(sys.basis.begin(), sys.basis.end());
    for (const Diagram& d : enumerate_diagrams(kind, degree, components, budget)) {
        SparseVec row = iota(d).to_vector(sys.basis);
        if (!row.empty()) sys.rows.push_back(std::move(row));
        ++sys.relation_count;
    }
    return sys;
}

// ---------------------------------------------------------------------------
// The triple-linking generator
// ---------------------------------------------------------------------------

// Degree-2 diagram on three circles: pair 1 joins circles 1-2, pair 2 joins
// circles 2-3, and the four endpoints on circle 2 alternate between the
// pairs, so neither pair is isolated. Its class spans the degree-2,
// three-circle quotient and is normalized with coefficient 1.
inline Diagram mu_generator() {
    Diagram d;
    d.kind = Kind::dd;
    d.skeleton = circles(3);
    d.comps = {{{1, '+'}, {1, '-'}},
               {{1, '+'}, {2, '+'}, {1, '-'}, {2, '-'}},
               {{2, '+'}, {2, '-'}}};
    return d;
}

}  // namespace ddlab
