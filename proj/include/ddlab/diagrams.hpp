// Diagram data model: chord, double-dating (DD), wedge, and trivalent diagrams
// on skeletons of ordered oriented circles/intervals, with
//   - structural validation,
//   - canonical forms under per-circle rotation x id relabeling (and, for
//     trivalent diagrams, vertex-orientation normalization with a tracked sign),
//   - text/JSON (de)serialization,
//   - exhaustive per-stratum enumeration guarded by a size budget,
//   - the local predicates used by the relation generators.
#pragma once

#include "ddlab/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace ddlab {

enum class Kind { dd, chord, wedge, trivalent };
enum class CompKind { circle, interval };

inline std::string kind_name(Kind k) {
    switch (k) {
        case Kind::dd: return "dd";
        case Kind::chord: return "chord";
        case Kind::wedge: return "wedge";
        case Kind::trivalent: return "trivalent";
    }
    return "?";
}

inline Kind kind_from_name(const std::string& s) {
    if (s == "dd") return Kind::dd;
    if (s == "chord") return Kind::chord;
    if (s == "wedge") return Kind::wedge;
    if (s == "trivalent") return Kind::trivalent;
    throw UsageError("unknown diagram kind: " + s);
}

using Skeleton = std::vector<CompKind>;

inline Skeleton circles(int l) { return Skeleton(l, CompKind::circle); }

// One endpoint token on a component.
//   dd:        id = pair id,  tag '+' or '-'   (which chord of the pair)
//   chord:     id = chord id, tag 0
//   wedge:     id = wedge id, tag '^' (tip), '+' / '-' (legs)
//   trivalent: id = external-vertex id, tag 'e'
struct Token {
    int id = 0;
    char tag = 0;
    bool operator==(const Token&) const = default;
};

// Rank used inside canonical-form comparisons; lower sorts first.
inline int tag_rank(char tag) {
    switch (tag) {
        case 0: return 0;
        case 'e': return 0;
        case '^': return 0;
        case '+': return 1;
        case '-': return 2;
    }
    return 9;
}

struct Diagram {
    Kind kind = Kind::dd;
    Skeleton skeleton;
    std::vector<std::vector<Token>> comps;  // one token sequence per component

    // Trivalent extras. Vertex codes: external j -> +j, internal i -> -i.
    int internals = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::array<int, 3>> orient;  // per internal vertex: 0-based edge indices
};

inline int total_tokens(const Diagram& d) {
    int n = 0;
    for (const auto& c : d.comps) n += static_cast<int>(c.size());
    return n;
}

inline int diagram_degree(const Diagram& d) {
    int n = total_tokens(d);
    switch (d.kind) {
        case Kind::dd: return n / 4;
        case Kind::chord: return n / 2;
        case Kind::wedge: return n / 3;
        case Kind::trivalent: return (n + d.internals) / 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Structural validation
// ---------------------------------------------------------------------------

namespace detail {

struct EndpointPos {
    int comp = -1, pos = -1;
};

// For each (id, tag): the positions where that token occurs.
inline std::map<std::pair<int, char>, std::vector<EndpointPos>> token_positions(const Diagram& d) {
    std::map<std::pair<int, char>, std::vector<EndpointPos>> out;
    for (int c = 0; c < static_cast<int>(d.comps.size()); ++c)
        for (int p = 0; p < static_cast<int>(d.comps[c].size()); ++p)
            out[{d.comps[c][p].id, d.comps[c][p].tag}].push_back({c, p});
    return out;
}

inline std::string token_text(int id, char tag) {
    std::string s = std::to_string(id);
    if (tag == 'e') return "e" + s;
    if (tag != 0) s += tag;
    return s;
}

// Marks every internal vertex reachable from the skeleton along dashed edges.
inline std::vector<char> skeleton_reachable(int internals, const std::vector<std::pair<int, int>>& edges) {
    std::vector<char> seen(internals + 1, 0);
    std::vector<int> stack;
    auto visit = [&](int v) {
        if (v < 0 && !seen[-v]) {
            seen[-v] = 1;
            stack.push_back(-v);
        }
    };
    for (auto [a, b] : edges) {
        if (a > 0) visit(b);
        if (b > 0) visit(a);
    }
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (auto [a, b] : edges) {
            if (a == -i) visit(b);
            if (b == -i) visit(a);
        }
    }
    return seen;
}

}  // namespace detail

// For a valid DD pair returns its type {i, j} (0-based component indices, i <= j).
inline std::pair<int, int> dd_pair_type(const Diagram& d, int pair_id) {
    std::array<std::vector<int>, 2> comps_of;  // per chord ('+' then '-'): components touched
    for (int c = 0; c < static_cast<int>(d.comps.size()); ++c)
        for (const Token& t : d.comps[c])
            if (t.id == pair_id) comps_of[t.tag == '-' ? 1 : 0].push_back(c);
    for (auto& v : comps_of) std::sort(v.begin(), v.end());
    if (comps_of[0].size() != 2 || comps_of[1].size() != 2 || comps_of[0] != comps_of[1])
        throw ValidityError("pair " + std::to_string(pair_id) + " violates its type constraint");
    return {comps_of[0][0], comps_of[0][1]};
}

inline void validate_diagram(const Diagram& d) {
    if (d.skeleton.size() != d.comps.size())
        throw ValidityError("skeleton/arrangement component count mismatch");
    auto pos = detail::token_positions(d);
    switch (d.kind) {
        case Kind::chord: {
            for (const auto& [key, v] : pos) {
                if (key.second != 0 || key.first <= 0)
                    throw ValidityError("bad chord token " + detail::token_text(key.first, key.second));
                if (v.size() != 2)
                    throw ValidityError("chord " + std::to_string(key.first) + " has " +
                                        std::to_string(v.size()) + " endpoints, expected 2");
            }
            break;
        }
        case Kind::dd: {
            std::set<int> ids;
            for (const auto& [key, v] : pos) {
                if ((key.second != '+' && key.second != '-') || key.first <= 0)
                    throw ValidityError("bad pair token " + detail::token_text(key.first, key.second));
                if (v.size() != 2)
                    throw ValidityError("chord " + detail::token_text(key.first, key.second) +
                                        " has " + std::to_string(v.size()) + " endpoints, expected 2");
                ids.insert(key.first);
            }
            for (int id : ids) {
                if (!pos.count({id, '+'}) || !pos.count({id, '-'}))
                    throw ValidityError("pair " + std::to_string(id) + " is missing a signed chord");
                dd_pair_type(d, id);  // throws on violation
            }
            break;
        }
        case Kind::wedge: {
            std::set<int> ids;
            for (const auto& [key, v] : pos) {
                if ((key.second != '^' && key.second != '+' && key.second != '-') || key.first <= 0)
                    throw ValidityError("bad wedge token " + detail::token_text(key.first, key.second));
                if (v.size() != 1)
                    throw ValidityError("wedge token " + detail::token_text(key.first, key.second) +
                                        " appears " + std::to_string(v.size()) + " times, expected 1");
                ids.insert(key.first);
            }
            for (int id : ids) {
                auto tip = pos.find({id, '^'});
                auto lp = pos.find({id, '+'});
                auto lm = pos.find({id, '-'});
                if (tip == pos.end() || lp == pos.end() || lm == pos.end())
                    throw ValidityError("wedge " + std::to_string(id) + " must have one tip and two legs");
                if (lp->second[0].comp != lm->second[0].comp)
                    throw ValidityError("wedge " + std::to_string(id) + " has legs on different components");
            }
            break;
        }
        case Kind::trivalent: {
            std::set<int> ext_ids;
            for (const auto& [key, v] : pos) {
                if (key.second != 'e' || key.first <= 0)
                    throw ValidityError("bad external token " + detail::token_text(key.first, key.second));
                if (v.size() != 1)
                    throw ValidityError("external e" + std::to_string(key.first) + " appears twice");
                ext_ids.insert(key.first);
            }
            if ((total_tokens(d) + d.internals) % 2 != 0)
                throw ValidityError("trivalent diagram has odd vertex count");
            std::map<int, int> dext;
            std::vector<int> dint(d.internals + 1, 0);
            for (auto [a, b] : d.edges) {
                for (int v : {a, b}) {
                    if (v > 0) {
                        if (!ext_ids.count(v))
                            throw ValidityError("edge references unknown external e" + std::to_string(v));
                        ++dext[v];
                    } else {
                        int i = -v;
                        if (i < 1 || i > d.internals)
                            throw ValidityError("edge references unknown internal v" + std::to_string(i));
                        ++dint[i];
                    }
                }
            }
            for (int id : ext_ids)
                if (dext[id] != 1)
                    throw ValidityError("external e" + std::to_string(id) + " has degree " +
                                        std::to_string(dext[id]));
            for (int i = 1; i <= d.internals; ++i)
                if (dint[i] != 3)
                    throw ValidityError("internal v" + std::to_string(i) + " has degree " +
                                        std::to_string(dint[i]));
            if (static_cast<int>(d.orient.size()) != d.internals)
                throw ValidityError("orientation list does not cover every internal vertex");
            for (int i = 0; i < d.internals; ++i) {
                std::vector<int> incident;
                for (int e = 0; e < static_cast<int>(d.edges.size()); ++e) {
                    if (d.edges[e].first == -(i + 1)) incident.push_back(e);
                    if (d.edges[e].second == -(i + 1)) incident.push_back(e);
                }
                std::vector<int> listed(d.orient[i].begin(), d.orient[i].end());
                std::sort(incident.begin(), incident.end());
                std::sort(listed.begin(), listed.end());
                if (incident != listed)
                    throw ValidityError("orientation of v" + std::to_string(i + 1) +
                                        " does not list its incident edges");
            }
            if (d.internals > 0) {
                auto seen = detail::skeleton_reachable(d.internals, d.edges);
                for (int i = 1; i <= d.internals; ++i)
                    if (!seen[i])
                        throw ValidityError("internal v" + std::to_string(i) +
                                            " lies on a dashed component not touching the skeleton");
            }
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical forms
// ---------------------------------------------------------------------------
//
// The canonical form is the minimum, over the symmetry group, of a flattened
// (id, tag-rank) word. The group: independent rotations of each circle and
// free relabeling of pair/chord/wedge ids. Relabeling is minimized by
// renumbering ids in first-occurrence order, which is optimal for any fixed
// rotation tuple. Chord signs inside a DD pair and wedge leg roles are
// structure and never permuted. Trivalent diagrams additionally minimize over
// internal-vertex relabelings, parallel-edge swaps, and per-vertex orientation
// flips; each flip contributes a factor -1 which is tracked as the canonical
// sign (0 when the class is self-negating).

struct Canon {
    std::string key;  // canonical text serialization
    int sign = 1;     // input = sign * rep; 0 when the class vanishes
    Diagram rep;
};

namespace detail {

inline std::string arrangement_text(const Diagram& d);

// Iterates over tuples of per-circle rotations and calls fn(rots).
template <typename Fn>
inline void for_rotation_tuples(const Skeleton& sk, const std::vector<std::vector<Token>>& comps, Fn&& fn) {
    int l = static_cast<int>(comps.size());
    std::vector<int> rots(l, 0), limits(l, 1);
    for (int c = 0; c < l; ++c)
        if (sk[c] == CompKind::circle && comps[c].size() > 1) limits[c] = static_cast<int>(comps[c].size());
    while (true) {
        fn(rots);
        int c = l - 1;
        while (c >= 0) {
            if (++rots[c] < limits[c]) break;
            rots[c] = 0;
            --c;
        }
        if (c < 0) break;
    }
}

// Minimal flattened word of a chord/dd/wedge arrangement over rotations with
// first-occurrence renumbering. Ids must be dense in [1, nid]. Fills `best`
// and the winning rotation tuple.
inline void canonical_word(const Skeleton& sk, const std::vector<std::vector<Token>>& comps, int nid,
                           std::vector<int>& best, std::vector<int>& best_rots) {
    int l = static_cast<int>(comps.size());
    best.clear();
    std::vector<int> cand;
    std::vector<int> idmap(nid + 1);
    int n = 0;
    for (const auto& c : comps) n += static_cast<int>(c.size());
    cand.reserve(2 * n + l);
    for_rotation_tuples(sk, comps, [&](const std::vector<int>& rots) {
        cand.clear();
        std::fill(idmap.begin(), idmap.end(), 0);
        int next_id = 0;
        for (int c = 0; c < l; ++c) {
            int len = static_cast<int>(comps[c].size());
            for (int p = 0; p < len; ++p) {
                const Token& t = comps[c][(p + rots[c]) % len];
                int& m = idmap[t.id];
                if (m == 0) m = ++next_id;
                cand.push_back(m);
                cand.push_back(tag_rank(t.tag));
            }
            cand.push_back(-1);  // component separator
        }
        if (best.empty() || cand < best) {
            best = cand;
            best_rots = rots;
        }
    });
}

// Applies a rotation tuple plus first-occurrence renumbering.
inline std::vector<std::vector<Token>> apply_rots(const std::vector<std::vector<Token>>& comps, int nid,
                                                  const std::vector<int>& rots) {
    int l = static_cast<int>(comps.size());
    std::vector<std::vector<Token>> out(l);
    std::vector<int> idmap(nid + 1, 0);
    int next_id = 0;
    for (int c = 0; c < l; ++c) {
        int len = static_cast<int>(comps[c].size());
        out[c].reserve(len);
        for (int p = 0; p < len; ++p) {
            Token t = comps[c][(p + rots[c]) % len];
            int& m = idmap[t.id];
            if (m == 0) m = ++next_id;
            t.id = m;
            out[c].push_back(t);
        }
    }
    return out;
}

// Remaps arbitrary positive ids to dense [1..nid].
inline std::vector<std::vector<Token>> densify_ids(const std::vector<std::vector<Token>>& comps, int& nid) {
    std::map<int, int> remap;
    for (const auto& c : comps)
        for (const Token& t : c)
            if (!remap.count(t.id)) {
                int next = static_cast<int>(remap.size()) + 1;
                remap[t.id] = next;
            }
    std::vector<std::vector<Token>> out = comps;
    for (auto& c : out)
        for (Token& t : c) t.id = remap[t.id];
    nid = static_cast<int>(remap.size());
    return out;
}

inline void normalize_cycle(std::array<int, 3>& t) {
    int k = static_cast<int>(std::min_element(t.begin(), t.end()) - t.begin());
    std::array<int, 3> r{t[k], t[(k + 1) % 3], t[(k + 2) % 3]};
    t = r;
}

// Canonical trivalent form with tracked orientation sign.
inline Canon canonical_trivalent(const Diagram& d) {
    int I = d.internals;
    int l = static_cast<int>(d.comps.size());
    int ne = static_cast<int>(d.edges.size());

    std::vector<int> best;
    int best_sign = 0;
    bool ambiguous = false;
    Diagram rep;

    std::vector<int> perm(I);  // internal relabeling: old i -> perm[i-1]
    std::iota(perm.begin(), perm.end(), 1);

    std::vector<int> cand;
    do {
        for_rotation_tuples(d.skeleton, d.comps, [&](const std::vector<int>& rots) {
            // Renumber externals by scan order under this rotation tuple.
            std::map<int, int> ext_map;
            int next_e = 0;
            for (int c = 0; c < l; ++c) {
                int len = static_cast<int>(d.comps[c].size());
                for (int p = 0; p < len; ++p) {
                    int& m = ext_map[d.comps[c][(p + rots[c]) % len].id];
                    if (m == 0) m = ++next_e;
                }
            }
            // Rename edge endpoints; sort order: externals first, ascending.
            auto code_key = [&](int v) {
                return v > 0 ? std::pair<int, int>(0, ext_map.at(v)) : std::pair<int, int>(1, perm[-v - 1]);
            };
            std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> renamed(ne);
            for (int e = 0; e < ne; ++e) {
                auto a = code_key(d.edges[e].first), b = code_key(d.edges[e].second);
                if (b < a) std::swap(a, b);
                renamed[e] = {a, b};
            }
            std::vector<int> order(ne);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                return renamed[x] != renamed[y] ? renamed[x] < renamed[y] : x < y;
            });
            // Ranges of parallel edges inside `order` (instance order matters
            // because orientations reference edge indices).
            std::vector<std::pair<int, int>> groups;
            for (int i = 0; i < ne;) {
                int j = i;
                while (j < ne && renamed[order[j]] == renamed[order[i]]) ++j;
                if (j - i > 1) groups.push_back({i, j});
                i = j;
            }
            std::vector<int> cur = order;
            auto emit = [&]() {
                std::vector<int> edge_new(ne);  // original index -> new position
                for (int i = 0; i < ne; ++i) edge_new[cur[i]] = i;
                cand.clear();
                for (int c = 0; c < l; ++c) {
                    int len = static_cast<int>(d.comps[c].size());
                    for (int p = 0; p < len; ++p) cand.push_back(ext_map.at(d.comps[c][(p + rots[c]) % len].id));
                    cand.push_back(-1);
                }
                for (int i = 0; i < ne; ++i) {
                    const auto& e = renamed[cur[i]];
                    cand.push_back(e.first.first);
                    cand.push_back(e.first.second);
                    cand.push_back(e.second.first);
                    cand.push_back(e.second.second);
                }
                int sign = 1;
                std::vector<std::array<int, 3>> triples(I);
                for (int oi = 0; oi < I; ++oi) {
                    int where = perm[oi] - 1;  // new 0-based vertex index
                    std::array<int, 3> t{edge_new[d.orient[oi][0]], edge_new[d.orient[oi][1]],
                                         edge_new[d.orient[oi][2]]};
                    std::array<int, 3> fwd = t, bwd{t[0], t[2], t[1]};
                    normalize_cycle(fwd);
                    normalize_cycle(bwd);
                    if (fwd == bwd) sign = 0;  // flip-symmetric vertex: class vanishes
                    if (bwd < fwd) {
                        triples[where] = bwd;
                        sign = -sign;
                    } else {
                        triples[where] = fwd;
                    }
                }
                for (int i = 0; i < I; ++i)
                    for (int x : triples[i]) cand.push_back(x);

                if (best.empty() || cand < best) {
                    best = cand;
                    best_sign = sign;
                    ambiguous = false;
                    rep = Diagram{};
                    rep.kind = Kind::trivalent;
                    rep.skeleton = d.skeleton;
                    rep.internals = I;
                    rep.comps.assign(l, {});
                    for (int c = 0; c < l; ++c) {
                        int len = static_cast<int>(d.comps[c].size());
                        for (int p = 0; p < len; ++p)
                            rep.comps[c].push_back(Token{ext_map.at(d.comps[c][(p + rots[c]) % len].id), 'e'});
                    }
                    for (int i = 0; i < ne; ++i) {
                        const auto& e = renamed[cur[i]];
                        auto decode = [](std::pair<int, int> k) { return k.first == 0 ? k.second : -k.second; };
                        rep.edges.push_back({decode(e.first), decode(e.second)});
                    }
                    rep.orient = triples;
                } else if (cand == best && sign != best_sign) {
                    // Two symmetry paths reach the minimal word with different
                    // signs: the diagram admits a sign-reversing automorphism.
                    ambiguous = true;
                }
            };
            std::function<void(std::size_t)> rec = [&](std::size_t g) {
                if (g == groups.size()) {
                    emit();
                    return;
                }
                auto [lo, hi] = groups[g];
                std::sort(cur.begin() + lo, cur.begin() + hi);
                do {
                    rec(g + 1);
                } while (std::next_permutation(cur.begin() + lo, cur.begin() + hi));
            };
            rec(0);
        });
    } while (std::next_permutation(perm.begin(), perm.end()));

    Canon out;
    out.rep = rep;
    out.sign = (ambiguous || best_sign == 0) ? 0 : best_sign;
    out.key = arrangement_text(out.rep);
    return out;
}

}  // namespace detail

inline Canon canonical_form(const Diagram& d) {
    validate_diagram(d);
    if (d.kind == Kind::trivalent) return detail::canonical_trivalent(d);
    Canon out;
    out.rep.kind = d.kind;
    out.rep.skeleton = d.skeleton;
    int nid = 0;
    auto dense = detail::densify_ids(d.comps, nid);
    std::vector<int> word, rots;
    detail::canonical_word(d.skeleton, dense, nid, word, rots);
    out.rep.comps = detail::apply_rots(dense, nid, rots);
    out.sign = 1;
    out.key = detail::arrangement_text(out.rep);
    return out;
}

inline std::string canonical_key(const Diagram& d) { return canonical_form(d).key; }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string arrangement_text(const Diagram& d) {
    std::ostringstream out;
    out << "kind: " << kind_name(d.kind) << "\n";
    out << "skeleton:";
    for (CompKind ck : d.skeleton) out << ' ' << (ck == CompKind::circle ? 'C' : 'I');
    out << "\n";
    for (int c = 0; c < static_cast<int>(d.comps.size()); ++c) {
        out << "comp " << (c + 1) << ":";
        for (const Token& t : d.comps[c]) out << ' ' << token_text(t.id, t.tag);
        out << "\n";
    }
    if (d.kind == Kind::trivalent) {
        out << "edges:";
        auto vname = [](int v) { return v > 0 ? "e" + std::to_string(v) : "v" + std::to_string(-v); };
        for (auto [a, b] : d.edges) out << " (" << vname(a) << ' ' << vname(b) << ")";
        out << "\n";
        if (d.internals > 0) {
            out << "orient:";
            for (int i = 0; i < d.internals; ++i)
                out << " v" << (i + 1) << "=(" << d.orient[i][0] + 1 << ',' << d.orient[i][1] + 1 << ','
                    << d.orient[i][2] + 1 << ")";
            out << "\n";
        }
    }
    return out.str();
}

inline nlohmann::json diagram_json(const Diagram& d) {
    nlohmann::json j;
    j["kind"] = kind_name(d.kind);
    j["skeleton"] = nlohmann::json::array();
    for (CompKind ck : d.skeleton) j["skeleton"].push_back(ck == CompKind::circle ? "C" : "I");
    j["arrangement"] = nlohmann::json::array();
    for (const auto& comp : d.comps) {
        nlohmann::json row = nlohmann::json::array();
        for (const Token& t : comp) row.push_back(token_text(t.id, t.tag));
        j["arrangement"].push_back(row);
    }
    auto pos = token_positions(d);
    auto pos_of = [&](int id, char tag) {
        const auto& v = pos.at({id, tag});
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& ep : v) arr.push_back({ep.comp + 1, ep.pos});
        return arr;
    };
    std::set<int> ids;
    for (const auto& [k, v] : pos) ids.insert(k.first);
    switch (d.kind) {
        case Kind::chord: {
            nlohmann::json chords = nlohmann::json::array();
            for (int id : ids) chords.push_back({{"id", id}, {"endpoints", pos_of(id, 0)}});
            j["chords"] = chords;
            break;
        }
        case Kind::dd: {
            nlohmann::json pairs = nlohmann::json::array();
            for (int id : ids) {
                auto [a, b] = dd_pair_type(d, id);
                pairs.push_back({{"id", id},
                                 {"type", {a + 1, b + 1}},
                                 {"plus", pos_of(id, '+')},
                                 {"minus", pos_of(id, '-')}});
            }
            j["pairs"] = pairs;
            break;
        }
        case Kind::wedge: {
            nlohmann::json wedges = nlohmann::json::array();
            for (int id : ids)
                wedges.push_back({{"id", id},
                                  {"tip", pos_of(id, '^')[0]},
                                  {"plus", pos_of(id, '+')[0]},
                                  {"minus", pos_of(id, '-')[0]}});
            j["wedges"] = wedges;
            break;
        }
        case Kind::trivalent: {
            nlohmann::json graph;
            graph["internals"] = d.internals;
            auto vname = [](int v) { return v > 0 ? "e" + std::to_string(v) : "v" + std::to_string(-v); };
            graph["edges"] = nlohmann::json::array();
            for (auto [a, b] : d.edges) graph["edges"].push_back({vname(a), vname(b)});
            graph["orient"] = nlohmann::json::object();
            for (int i = 0; i < d.internals; ++i)
                graph["orient"]["v" + std::to_string(i + 1)] = {d.orient[i][0] + 1, d.orient[i][1] + 1,
                                                                d.orient[i][2] + 1};
            j["graph"] = graph;
            break;
        }
    }
    return j;
}

}  // namespace detail

// Emits the canonical representative of d ("text" or "json").
inline std::string serialize_diagram(const Diagram& d, const std::string& format = "text") {
    Canon c = canonical_form(d);
    if (format == "json") return detail::diagram_json(c.rep).dump();
    if (format != "text") throw UsageError("unknown serialization format: " + format);
    return c.key;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

inline Diagram parse_text_diagram(const std::string& text) {
    // Accept newline-separated records and the compact one-line form with
    // " / " between logical lines.
    std::string norm;
    norm.reserve(text.size());
    for (char ch : text)
        if (ch != '\r') norm.push_back(ch);
    for (std::size_t p = 0; (p = norm.find(" / ", p)) != std::string::npos;) norm.replace(p, 3, "\n");
    std::vector<std::string> lines;
    {
        std::istringstream in(norm);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }

    int ln = 0;
    auto fail = [&](const std::string& msg, const std::string& near = "") {
        int col = 1;
        if (!near.empty() && ln < static_cast<int>(lines.size())) {
            auto p = lines[ln].find(near);
            if (p != std::string::npos) col = static_cast<int>(p) + 1;
        }
        throw ParseError(msg, ln + 1, col);
    };
    auto next_line = [&]() -> std::optional<std::string> {
        while (ln < static_cast<int>(lines.size())) {
            if (lines[ln].find_first_not_of(" \t") == std::string::npos) {
                ++ln;
                continue;
            }
            return lines[ln];
        }
        return std::nullopt;
    };

    Diagram d;
    auto l1 = next_line();
    if (!l1 || l1->rfind("kind:", 0) != 0) fail("expected 'kind:' line");
    {
        auto ws = split_ws(l1->substr(5));
        if (ws.size() != 1) fail("expected a single kind after 'kind:'");
        try {
            d.kind = kind_from_name(ws[0]);
        } catch (const UsageError&) {
            fail("unknown diagram kind '" + ws[0] + "'", ws[0]);
        }
    }
    ++ln;

    auto l2 = next_line();
    if (!l2 || l2->rfind("skeleton:", 0) != 0) fail("expected 'skeleton:' line");
    for (const std::string& w : split_ws(l2->substr(9))) {
        if (w == "C")
            d.skeleton.push_back(CompKind::circle);
        else if (w == "I")
            d.skeleton.push_back(CompKind::interval);
        else
            fail("bad skeleton descriptor '" + w + "'", w);
    }
    if (d.skeleton.empty()) fail("skeleton must have at least one component");
    ++ln;

    d.comps.assign(d.skeleton.size(), {});
    for (int c = 0; c < static_cast<int>(d.skeleton.size()); ++c) {
        auto lc = next_line();
        std::string head = "comp " + std::to_string(c + 1) + ":";
        if (!lc || lc->rfind(head, 0) != 0) fail("expected '" + head + "' line");
        for (const std::string& w : split_ws(lc->substr(head.size()))) {
            Token t{0, 0};
            bool ok = true;
            try {
                switch (d.kind) {
                    case Kind::chord:
                        t = {std::stoi(w), 0};
                        ok = std::to_string(t.id) == w;
                        break;
                    case Kind::dd:
                    case Kind::wedge: {
                        char tag = w.back();
                        ok = (tag == '+' || tag == '-' || (d.kind == Kind::wedge && tag == '^')) && w.size() >= 2;
                        if (ok) {
                            t = {std::stoi(w.substr(0, w.size() - 1)), tag};
                            ok = std::to_string(t.id) + tag == w;
                        }
                        break;
                    }
                    case Kind::trivalent:
                        ok = w.size() >= 2 && w[0] == 'e';
                        if (ok) {
                            t = {std::stoi(w.substr(1)), 'e'};
                            ok = "e" + std::to_string(t.id) == w;
                        }
                        break;
                }
            } catch (const std::exception&) {
                ok = false;
            }
            if (!ok || t.id <= 0) fail("bad token '" + w + "'", w);
            d.comps[c].push_back(t);
        }
        ++ln;
    }

    if (d.kind == Kind::trivalent) {
        auto le = next_line();
        if (!le || le->rfind("edges:", 0) != 0) fail("expected 'edges:' line");
        std::istringstream in(le->substr(6));
        char ch;
        int max_internal = 0;
        auto parse_vertex = [&](std::string w) -> int {
            try {
                if (w.size() >= 2 && w[0] == 'e') return std::stoi(w.substr(1));
                if (w.size() >= 2 && w[0] == 'v') {
                    int i = std::stoi(w.substr(1));
                    max_internal = std::max(max_internal, i);
                    return -i;
                }
            } catch (const std::exception&) {
            }
            fail("bad vertex name '" + w + "'", w);
            return 0;
        };
        std::string wa, wb;
        while (in >> ch) {
            if (ch != '(') fail("expected '(' in edges line");
            if (!(in >> wa >> wb) || wb.empty() || wb.back() != ')') fail("expected '(a b)' edge");
            wb.pop_back();
            d.edges.push_back({parse_vertex(wa), parse_vertex(wb)});
        }
        d.internals = max_internal;
        ++ln;
        if (d.internals > 0) {
            auto lo = next_line();
            if (!lo || lo->rfind("orient:", 0) != 0) fail("expected 'orient:' line");
            d.orient.assign(d.internals, {0, 0, 0});
            std::vector<char> have(d.internals + 1, 0);
            for (const std::string& w : split_ws(lo->substr(7))) {
                auto eq = w.find('=');
                if (w.size() < 4 || w[0] != 'v' || eq == std::string::npos || eq + 1 >= w.size() ||
                    w[eq + 1] != '(' || w.back() != ')')
                    fail("bad orientation '" + w + "'", w);
                int vi = 0;
                try {
                    vi = std::stoi(w.substr(1, eq - 1));
                } catch (const std::exception&) {
                    fail("bad orientation '" + w + "'", w);
                }
                if (vi < 1 || vi > d.internals) fail("orientation for unknown vertex in '" + w + "'", w);
                std::string nums = w.substr(eq + 2, w.size() - eq - 3);
                std::replace(nums.begin(), nums.end(), ',', ' ');
                auto parts = split_ws(nums);
                if (parts.size() != 3) fail("bad orientation '" + w + "'", w);
                for (int k = 0; k < 3; ++k) {
                    int e = 0;
                    try {
                        e = std::stoi(parts[k]) - 1;
                    } catch (const std::exception&) {
                        fail("bad orientation '" + w + "'", w);
                    }
                    if (e < 0 || e >= static_cast<int>(d.edges.size()))
                        fail("orientation references unknown edge in '" + w + "'", w);
                    d.orient[vi - 1][k] = e;
                }
                have[vi] = 1;
            }
            for (int i = 1; i <= d.internals; ++i)
                if (!have[i]) fail("missing orientation for v" + std::to_string(i));
            ++ln;
        }
    }
    if (auto extra = next_line()) fail("unexpected trailing line '" + *extra + "'");
    validate_diagram(d);
    return d;
}

inline Diagram parse_json_diagram(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad JSON: ") + e.what());
    }
    Diagram d;
    try {
        d.kind = kind_from_name(j.at("kind").get<std::string>());
        for (const auto& s : j.at("skeleton"))
            d.skeleton.push_back(s.get<std::string>() == "C" ? CompKind::circle : CompKind::interval);
        for (const auto& row : j.at("arrangement")) {
            std::vector<Token> comp;
            for (const auto& w : row) {
                std::string tw = w.get<std::string>();
                if (tw.empty()) throw ParseError("empty token in arrangement");
                switch (d.kind) {
                    case Kind::chord: comp.push_back({std::stoi(tw), 0}); break;
                    case Kind::dd:
                    case Kind::wedge:
                        comp.push_back({std::stoi(tw.substr(0, tw.size() - 1)), tw.back()});
                        break;
                    case Kind::trivalent: comp.push_back({std::stoi(tw.substr(1)), 'e'}); break;
                }
            }
            d.comps.push_back(std::move(comp));
        }
        if (d.kind == Kind::trivalent) {
            const auto& g = j.at("graph");
            d.internals = g.at("internals").get<int>();
            auto decode = [](const std::string& w) {
                return w[0] == 'e' ? std::stoi(w.substr(1)) : -std::stoi(w.substr(1));
            };
            for (const auto& e : g.at("edges"))
                d.edges.push_back({decode(e[0].get<std::string>()), decode(e[1].get<std::string>())});
            d.orient.assign(d.internals, {0, 0, 0});
            for (int i = 0; i < d.internals; ++i) {
                const auto& t = g.at("orient").at("v" + std::to_string(i + 1));
                for (int k = 0; k < 3; ++k) d.orient[i][k] = t[k].get<int>() - 1;
            }
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad diagram JSON: ") + e.what());
    }
    validate_diagram(d);
    return d;
}

}  // namespace detail

inline Diagram parse_diagram(const std::string& text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return detail::parse_json_diagram(text);
    return detail::parse_text_diagram(text);
}

// ---------------------------------------------------------------------------
// Local predicates
// ---------------------------------------------------------------------------

namespace detail {

// True when positions a, b are adjacent along a component of length n
// (cyclically for circles, linearly for intervals).
inline bool adjacent(int a, int b, int n, CompKind ck) {
    if (a > b) std::swap(a, b);
    if (b == a + 1) return true;
    return ck == CompKind::circle && a == 0 && b == n - 1;
}

}  // namespace detail

// Ids of the isolated pairs of a DD diagram. An inter-component pair is
// isolated when its two endpoints on each touched component bound an
// endpoint-free arc; an intra-component pair when its four endpoints form a
// contiguous block reading (s, s, s~, s~).
inline std::vector<int> isolated_pairs(const Diagram& d) {
    if (d.kind != Kind::dd) throw ValidityError("isolated_pairs expects a dd diagram");
    validate_diagram(d);
    std::set<int> ids;
    for (const auto& c : d.comps)
        for (const Token& t : c) ids.insert(t.id);
    std::vector<int> out;
    for (int id : ids) {
        auto [i, j] = dd_pair_type(d, id);
        bool iso = true;
        if (i != j) {
            for (int c : {i, j}) {
                std::vector<int> ps;
                int n = static_cast<int>(d.comps[c].size());
                for (int p = 0; p < n; ++p)
                    if (d.comps[c][p].id == id) ps.push_back(p);
                if (ps.size() != 2 || !detail::adjacent(ps[0], ps[1], n, d.skeleton[c])) iso = false;
            }
        } else {
            int c = i;
            int n = static_cast<int>(d.comps[c].size());
            // Two opposite kinks: each chord's own endpoints adjacent, at any
            // separation. Flipping the pair preserves the writhe and both kinks
            // then retract.
            std::vector<int> plus, minus;
            for (int p = 0; p < n; ++p)
                if (d.comps[c][p].id == id)
                    (d.comps[c][p].tag == '+' ? plus : minus).push_back(p);
            auto kink = [&](const std::vector<int>& ps) {
                return ps.size() == 2 && detail::adjacent(ps[0], ps[1], n, d.skeleton[c]);
            };
            iso = kink(plus) && kink(minus);
            // Retractable self-finger: four consecutive endpoints with the one
            // chord's endpoints nested inside the other's.
            for (int start = 0; start < n && !iso; ++start) {
                if (d.skeleton[c] == CompKind::interval && start + 3 >= n) break;
                std::array<char, 4> w{};
                bool own = true;
                for (int k2 = 0; k2 < 4 && own; ++k2) {
                    const Token& t = d.comps[c][(start + k2) % n];
                    if (t.id != id)
                        own = false;
                    else
                        w[k2] = t.tag;
                }
                if (own && w[0] == w[3] && w[1] == w[2] && w[0] != w[1]) iso = true;
            }
        }
        if (iso) out.push_back(id);
    }
    return out;
}

inline bool has_isolated_chord(const Diagram& d) {
    if (d.kind != Kind::chord) throw ValidityError("has_isolated_chord expects a chord diagram");
    validate_diagram(d);
    auto pos = detail::token_positions(d);
    for (const auto& [key, v] : pos) {
        if (v[0].comp != v[1].comp) continue;
        int c = v[0].comp;
        int n = static_cast<int>(d.comps[c].size());
        if (detail::adjacent(v[0].pos, v[1].pos, n, d.skeleton[c])) return true;
    }
    return false;
}

enum class Degree2Class { TwoIsolated, OneIsolated, NoneIsolated };

inline std::string degree2_class_name(Degree2Class c) {
    switch (c) {
        case Degree2Class::TwoIsolated: return "TwoIsolated";
        case Degree2Class::OneIsolated: return "OneIsolated";
        case Degree2Class::NoneIsolated: return "NoneIsolated";
    }
    return "?";
}

inline Degree2Class classify_degree2(const Diagram& d) {
    if (d.kind != Kind::dd || diagram_degree(d) != 2)
        throw ValidityError("classify_degree2 expects a degree-2 dd diagram");
    switch (isolated_pairs(d).size()) {
        case 2: return Degree2Class::TwoIsolated;
        case 1: return Degree2Class::OneIsolated;
        default: return Degree2Class::NoneIsolated;
    }
}

// Wedge -> DD: the tip splits into two adjacent endpoints, '+' then '-' along
// the orientation; the legs keep their signs. Returns the canonical
// representative.
inline Diagram wedge_to_dd(const Diagram& w) {
    if (w.kind != Kind::wedge) throw ValidityError("wedge_to_dd expects a wedge diagram");
    validate_diagram(w);
    Diagram d;
    d.kind = Kind::dd;
    d.skeleton = w.skeleton;
    d.comps.assign(w.comps.size(), {});
    for (int c = 0; c < static_cast<int>(w.comps.size()); ++c) {
        for (const Token& t : w.comps[c]) {
            if (t.tag == '^') {
                d.comps[c].push_back({t.id, '+'});
                d.comps[c].push_back({t.id, '-'});
            } else {
                d.comps[c].push_back({t.id, t.tag});
            }
        }
    }
    return canonical_form(d).rep;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

namespace detail {

inline double count_arrangements(const std::vector<std::vector<Token>>& mult) {
    double total = 1;
    for (const auto& comp : mult) {
        double f = 1;
        for (std::size_t i = 2; i <= comp.size(); ++i) f *= static_cast<double>(i);
        std::map<std::pair<int, char>, int> cnt;
        for (const Token& t : comp) ++cnt[{t.id, t.tag}];
        for (const auto& [k, c] : cnt)
            for (int i = 2; i <= c; ++i) f /= i;
        total *= f;
    }
    return total;
}

// All per-component multiset arrangements (nested next_permutation loops).
template <typename Fn>
inline void for_arrangements(std::vector<std::vector<Token>>& comps, std::size_t c, Fn&& fn) {
    if (c == comps.size()) {
        fn();
        return;
    }
    auto cmp = [](const Token& a, const Token& b) { return std::tie(a.id, a.tag) < std::tie(b.id, b.tag); };
    std::sort(comps[c].begin(), comps[c].end(), cmp);
    do {
        for_arrangements(comps, c + 1, fn);
    } while (std::next_permutation(comps[c].begin(), comps[c].end(), cmp));
}

// All assignments of m items to values in [0, nvals).
template <typename Fn>
inline void for_assignments(int m, int nvals, Fn&& fn) {
    if (m == 0) {
        std::vector<int> empty;
        fn(empty);
        return;
    }
    std::vector<int> a(m, 0);
    while (true) {
        fn(a);
        int i = m - 1;
        while (i >= 0) {
            if (++a[i] < nvals) break;
            a[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

struct WordHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::uint64_t h = 14695981039346656037ull;
        for (int x : v) {
            for (int b = 0; b < 4; ++b) {
                h ^= static_cast<unsigned char>(x >> (8 * b));
                h *= 1099511628211ull;
            }
        }
        return static_cast<std::size_t>(h);
    }
};

// Dedup sink keyed by the canonical flattened word; builds the representative
// only on first sight.
struct WordSink {
    std::unordered_map<std::vector<int>, Diagram, WordHash> by_word;
    Kind kind = Kind::dd;
    Skeleton sk;
    int nid = 0;
    std::vector<int> word, rots;

    void add(std::vector<std::vector<Token>>& mult) {
        canonical_word(sk, mult, nid, word, rots);
        auto it = by_word.find(word);
        if (it != by_word.end()) return;
        Diagram rep;
        rep.kind = kind;
        rep.skeleton = sk;
        rep.comps = apply_rots(mult, nid, rots);
        by_word.emplace(word, std::move(rep));
    }

    std::vector<Diagram> finish() {
        std::vector<std::pair<std::string, Diagram>> items;
        items.reserve(by_word.size());
        for (auto& [w, d] : by_word) items.emplace_back(arrangement_text(d), std::move(d));
        std::sort(items.begin(), items.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Diagram> out;
        out.reserve(items.size());
        for (auto& [k, d] : items) out.push_back(std::move(d));
        return out;
    }
};

// Per-pair component types for dd/chord strata: unordered (i <= j).
inline std::vector<std::pair<int, int>> unordered_types(int l) {
    std::vector<std::pair<int, int>> types;
    for (int i = 0; i < l; ++i)
        for (int j = i; j < l; ++j) types.push_back({i, j});
    return types;
}

// All perfect matchings on the stubs of E degree-1 externals and I degree-3
// internals, without self-loops.
template <typename Fn>
inline void for_stub_matchings(int E, int I, Fn&& fn) {
    std::vector<int> stubs;
    for (int e = 1; e <= E; ++e) stubs.push_back(e);
    for (int i = 1; i <= I; ++i)
        for (int k = 0; k < 3; ++k) stubs.push_back(-i);
    int n = static_cast<int>(stubs.size());
    if (n % 2 != 0) return;
    std::vector<char> used(n, 0);
    std::vector<std::pair<int, int>> edges;
    std::function<void()> rec = [&]() {
        int first = 0;
        while (first < n && used[first]) ++first;
        if (first == n) {
            fn(edges);
            return;
        }
        used[first] = 1;
        for (int second = first + 1; second < n; ++second) {
            if (used[second] || stubs[second] == stubs[first]) continue;
            if (second > first + 1 && stubs[second] == stubs[second - 1] && !used[second - 1])
                continue;  // identical stub already tried
            used[second] = 1;
            edges.push_back({stubs[first], stubs[second]});
            rec();
            edges.pop_back();
            used[second] = 0;
        }
        used[first] = 0;
    };
    rec();
}

}  // namespace detail

// Raw arrangement count for a stratum: the quantity compared to the budget.
inline double stratum_raw_count(Kind kind, int degree, const Skeleton& sk) {
    int l = static_cast<int>(sk.size());
    auto estimate = [&](int ntypes, auto&& fill) {
        double est = 0;
        detail::for_assignments(degree, ntypes, [&](const std::vector<int>& a) {
            std::vector<std::vector<Token>> mult(l);
            fill(a, mult);
            est += detail::count_arrangements(mult);
        });
        return est;
    };
    switch (kind) {
        case Kind::dd: {
            auto types = detail::unordered_types(l);
            return estimate(static_cast<int>(types.size()), [&](const std::vector<int>& a, auto& mult) {
                for (int p = 0; p < degree; ++p) {
                    auto [i, j] = types[a[p]];
                    if (i == j)
                        for (char s : {'+', '-'}) {
                            mult[i].push_back({p + 1, s});
                            mult[i].push_back({p + 1, s});
                        }
                    else
                        for (int c : {i, j})
                            for (char s : {'+', '-'}) mult[c].push_back({p + 1, s});
                }
            });
        }
        case Kind::chord: {
            auto types = detail::unordered_types(l);
            return estimate(static_cast<int>(types.size()), [&](const std::vector<int>& a, auto& mult) {
                for (int p = 0; p < degree; ++p) {
                    auto [i, j] = types[a[p]];
                    mult[i].push_back({p + 1, 0});
                    mult[j].push_back({p + 1, 0});
                }
            });
        }
        case Kind::wedge:
            return estimate(l * l, [&](const std::vector<int>& a, auto& mult) {
                for (int p = 0; p < degree; ++p) {
                    int ti = a[p] / l, li = a[p] % l;
                    mult[ti].push_back({p + 1, '^'});
                    mult[li].push_back({p + 1, '+'});
                    mult[li].push_back({p + 1, '-'});
                }
            });
        case Kind::trivalent: {
            double est = 0;
            for (int I = 0; I <= std::max(0, 2 * degree - 1); ++I) {
                int E = 2 * degree - I;
                int S = E + 3 * I;
                if (S % 2 != 0) continue;
                double m = 1;
                for (int k = S - 1; k > 1; k -= 2) m *= k;
                double placements = 1;
                for (int k = 2; k <= E; ++k) placements *= k;
                double comps_choose = 1;  // C(E + l - 1, l - 1)
                for (int k = 1; k <= l - 1; ++k) comps_choose = comps_choose * (E + k) / k;
                est += m * placements * comps_choose * std::pow(2.0, I);
            }
            return est;
        }
    }
    return 0;
}

constexpr double kDefaultBudget = 1e7;

// Every isomorphism class of the stratum exactly once, sorted by canonical
// key; refuses oversized strata with a BudgetError carrying the estimate.
inline std::vector<Diagram> enumerate_diagrams(Kind kind, int degree, const Skeleton& sk,
                                               double budget = kDefaultBudget) {
    if (degree < 0 || sk.empty()) throw ValidityError("enumerate_diagrams: degree >= 0, components >= 1");
    double est = stratum_raw_count(kind, degree, sk);
    if (est > budget)
        throw BudgetError("stratum raw count " + std::to_string(static_cast<long long>(est)) +
                              " exceeds budget " + std::to_string(static_cast<long long>(budget)),
                          est);
    int l = static_cast<int>(sk.size());

    if (kind == Kind::trivalent) {
        std::map<std::string, Diagram> by_key;
        if (degree == 0) {
            Diagram d;
            d.kind = Kind::trivalent;
            d.skeleton = sk;
            d.comps.assign(l, {});
            by_key.emplace(detail::arrangement_text(d), d);
        }
        for (int I = 0; degree > 0 && I <= 2 * degree - 1; ++I) {
            int E = 2 * degree - I;
            if ((E + 3 * I) % 2 != 0) continue;
            detail::for_stub_matchings(E, I, [&](const std::vector<std::pair<int, int>>& edges) {
                if (I > 0) {
                    auto seen = detail::skeleton_reachable(I, edges);
                    for (int i = 1; i <= I; ++i)
                        if (!seen[i]) return;
                }
                std::vector<std::vector<int>> inc(I + 1);
                for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
                    if (edges[e].first < 0) inc[-edges[e].first].push_back(e);
                    if (edges[e].second < 0) inc[-edges[e].second].push_back(e);
                }
                std::vector<int> perm(E);
                std::iota(perm.begin(), perm.end(), 1);
                std::function<void(int, int, std::vector<int>&)> comp_sizes = [&](int rem, int c,
                                                                                  std::vector<int>& sizes) {
                    if (c == l - 1) {
                        sizes[c] = rem;
                        detail::for_assignments(I, 2, [&](const std::vector<int>& flips) {
                            Diagram d;
                            d.kind = Kind::trivalent;
                            d.skeleton = sk;
                            d.internals = I;
                            d.edges = edges;
                            d.comps.assign(l, {});
                            int at = 0;
                            for (int cc = 0; cc < l; ++cc)
                                for (int k = 0; k < sizes[cc]; ++k) d.comps[cc].push_back({perm[at++], 'e'});
                            d.orient.assign(I, {0, 0, 0});
                            for (int i = 0; i < I; ++i) {
                                auto t = inc[i + 1];
                                if (flips[i]) std::swap(t[1], t[2]);
                                d.orient[i] = {t[0], t[1], t[2]};
                            }
                            Canon c2 = detail::canonical_trivalent(d);
                            by_key.emplace(c2.key, c2.rep);
                        });
                        return;
                    }
                    for (int take = 0; take <= rem; ++take) {
                        sizes[c] = take;
                        comp_sizes(rem - take, c + 1, sizes);
                    }
                };
                do {
                    std::vector<int> sizes(l, 0);
                    comp_sizes(E, 0, sizes);
                } while (std::next_permutation(perm.begin(), perm.end()));
            });
        }
        std::vector<Diagram> out;
        out.reserve(by_key.size());
        for (auto& [k, d] : by_key) out.push_back(std::move(d));
        return out;
    }

    detail::WordSink sink;
    sink.kind = kind;
    sink.sk = sk;
    sink.nid = degree;
    auto run = [&](int ntypes, auto&& fill) {
        detail::for_assignments(degree, ntypes, [&](const std::vector<int>& a) {
            std::vector<std::vector<Token>> mult(l);
            fill(a, mult);
            detail::for_arrangements(mult, 0, [&]() { sink.add(mult); });
        });
    };
    switch (kind) {
        case Kind::dd: {
            auto types = detail::unordered_types(l);
            run(static_cast<int>(types.size()), [&](const std::vector<int>& a, auto& mult) {
                for (int p = 0; p < degree; ++p) {
                    auto [i, j] = types[a[p]];
                    if (i == j)
                        for (char s : {'+', '-'}) {
                            mult[i].push_back({p + 1, s});
                            mult[i].push_back({p + 1, s});
                        }
                    else
                        for (int c : {i, j})
                            for (char s : {'+', '-'}) mult[c].push_back({p + 1, s});
                }
            });
            break;
        }
        case Kind::chord: {
            auto types = detail::unordered_types(l);
            run(static_cast<int>(types.size()), [&](const std::vector<int>& a, auto& mult) {
                for (int p = 0; p < degree; ++p) {
                    auto [i, j] = types[a[p]];
                    mult[i].push_back({p + 1, 0});
                    mult[j].push_back({p + 1, 0});
                }
            });
            break;
        }
        case Kind::wedge:
            run(l * l, [&](const std::vector<int>& a, auto& mult) {
                for (int p = 0; p < degree; ++p) {
                    int ti = a[p] / l, li = a[p] % l;
                    mult[ti].push_back({p + 1, '^'});
                    mult[li].push_back({p + 1, '+'});
                    mult[li].push_back({p + 1, '-'});
                }
            });
            break;
        case Kind::trivalent: break;  // handled above
    }
    return sink.finish();
}

inline std::vector<Diagram> enumerate_diagrams(Kind kind, int degree, int components,
                                               double budget = kDefaultBudget) {
    return enumerate_diagrams(kind, degree, circles(components), budget);
}

}  // namespace ddlab
