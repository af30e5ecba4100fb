// Data-driven relation templates over double-dating, wedge, and chord strata.
// A template owns one or more objects (pairs / wedges / chords), declares named
// slots on strand variables (optionally chained into adjacency blocks), and
// lists signed terms that place every endpoint of every owned object into
// slots. The grounding engine drops the template into every context diagram of
// the complementary degree, at every slot placement and strand assignment, and
// emits one relation row per grounded instance. Relation systems for whole
// strata are assembled from these instances plus the closed-form row families
// (isolated-object kills, the four-term relation, framing kills).
#pragma once

#include "ddlab/common.hpp"
#include "ddlab/diagrams.hpp"
#include "ddlab/exactlin.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ddlab {

// ---------------------------------------------------------------------------
// Template model
// ---------------------------------------------------------------------------

struct TemplateSlot {
    std::string name;
    int var = 0;    // index into RelationTemplate::vars
    int prev = -1;  // slot this one sits immediately after, or -1 for a chain head
};

struct TemplatePut {
    int owned = 0;  // index into RelationTemplate::owned
    char tag = 0;   // '+'/'-' for pair chords and wedge legs, '^' for tips, 0 for chords
    int slot = 0;
};

struct TemplateTerm {
    Rational coeff;
    std::vector<TemplatePut> puts;
};

struct RelationTemplate {
    std::string name;
    Kind kind = Kind::dd;
    std::vector<std::string> owned;  // owned object names
    std::vector<std::string> vars;   // strand variables, in first-use order
    std::vector<TemplateSlot> slots;
    std::vector<TemplateTerm> terms;
    bool sign_variants = true;  // also emit every +/- swap of the owned objects
    std::string predicate;      // nonempty: closed-form membership test, no terms

    int slot_index(const std::string& s) const {
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i].name == s) return static_cast<int>(i);
        return -1;
    }

    int owned_index(const std::string& s) const {
        for (std::size_t i = 0; i < owned.size(); ++i)
            if (owned[i] == s) return static_cast<int>(i);
        return -1;
    }
};

// ---------------------------------------------------------------------------
// Grammar: parse and dump
// ---------------------------------------------------------------------------

inline std::vector<RelationTemplate> parse_templates(const std::string& text) {
    std::vector<RelationTemplate> out;
    RelationTemplate* cur = nullptr;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError("templates line " + std::to_string(lineno) + ": " + msg, lineno);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        const std::string& head = toks[0];
        if (head == "template") {
            if (toks.size() != 3 || toks[2].rfind("kind=", 0) != 0)
                fail("expected: template <name> kind=<dd|wedge|chord>");
            out.emplace_back();
            cur = &out.back();
            cur->name = toks[1];
            cur->kind = kind_from_name(toks[2].substr(5));
            if (cur->kind == Kind::trivalent)
                fail("templates range over dd, wedge, and chord strata only");
            continue;
        }
        if (!cur) fail("directive before any 'template' header");
        if (head == "own") {
            if (toks.size() < 3 || (toks.size() - 1) % 2 != 0)
                fail("expected: own <object-kind> <name> [...]");
            const char* want = cur->kind == Kind::dd      ? "pair"
                               : cur->kind == Kind::wedge ? "wedge"
                                                          : "chord";
            for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
                if (toks[i] != want)
                    fail("owned object kind '" + toks[i] + "' does not match template kind");
                if (cur->owned_index(toks[i + 1]) >= 0) fail("duplicate owned name " + toks[i + 1]);
                cur->owned.push_back(toks[i + 1]);
            }
        } else if (head == "slot") {
            bool chained = toks.size() == 6;
            if (!(toks.size() == 4 || chained) || toks[2] != "on" ||
                (chained && toks[4] != "adjacent-to"))
                fail("expected: slot <name> on <var> [adjacent-to <slot>]");
            if (cur->slot_index(toks[1]) >= 0) fail("duplicate slot name " + toks[1]);
            TemplateSlot s;
            s.name = toks[1];
            s.var = -1;
            for (std::size_t i = 0; i < cur->vars.size(); ++i)
                if (cur->vars[i] == toks[3]) s.var = static_cast<int>(i);
            if (s.var < 0) {
                s.var = static_cast<int>(cur->vars.size());
                cur->vars.push_back(toks[3]);
            }
            if (chained) {
                s.prev = cur->slot_index(toks[5]);
                if (s.prev < 0) fail("adjacent-to references unknown slot " + toks[5]);
                if (cur->slots[s.prev].var != s.var)
                    fail("adjacent slots must share a strand variable");
                for (const auto& other : cur->slots)
                    if (other.prev == s.prev)
                        fail("slot " + toks[5] + " already has an adjacent successor");
            }
            cur->slots.push_back(s);
        } else if (head == "term") {
            if (toks.size() < 3 || toks[1].empty() || toks[1].back() != ':')
                fail("expected: term <rational>: <puts...>");
            TemplateTerm tm;
            tm.coeff = parse_rational(toks[1].substr(0, toks[1].size() - 1));
            if (tm.coeff == 0) fail("zero term coefficient");
            std::vector<char> used(cur->slots.size(), 0);
            for (std::size_t i = 2; i < toks.size(); ++i) {
                const std::string& pt = toks[i];
                auto at = pt.find('@');
                if (at == std::string::npos || at == 0 || at + 1 >= pt.size())
                    fail("expected endpoint placement <owned><end>@<slot>, got '" + pt + "'");
                std::string left = pt.substr(0, at);
                TemplatePut p;
                p.slot = cur->slot_index(pt.substr(at + 1));
                if (p.slot < 0) fail("placement references unknown slot in '" + pt + "'");
                char tail = left.back();
                if (tail == '+' || tail == '-' || tail == '^') {
                    p.tag = tail;
                    p.owned = cur->owned_index(left.substr(0, left.size() - 1));
                } else {
                    p.tag = 0;
                    p.owned = cur->owned_index(left);
                }
                if (p.owned < 0) fail("placement references unknown owned object in '" + pt + "'");
                if (cur->kind == Kind::dd && p.tag != '+' && p.tag != '-')
                    fail("pair endpoints must be tagged + or - in '" + pt + "'");
                if (cur->kind == Kind::wedge && p.tag != '+' && p.tag != '-' && p.tag != '^')
                    fail("wedge endpoints must be tagged ^, + or - in '" + pt + "'");
                if (cur->kind == Kind::chord && p.tag != 0)
                    fail("chord endpoints carry no tag in '" + pt + "'");
                if (used[p.slot]) fail("slot used twice in one term in '" + pt + "'");
                used[p.slot] = 1;
                tm.puts.push_back(p);
            }
            cur->terms.push_back(std::move(tm));
        } else if (head == "predicate") {
            if (toks.size() != 2) fail("expected: predicate <name>");
            cur->predicate = toks[1];
        } else if (head == "no-sign-variants") {
            if (toks.size() != 1) fail("no-sign-variants takes no arguments");
            cur->sign_variants = false;
        } else {
            fail("unknown directive '" + head + "'");
        }
    }
    // Whole-template validation.
    for (const auto& t : out) {
        auto tfail = [&](const std::string& msg) {
            throw ParseError("template " + t.name + ": " + msg);
        };
        if (t.owned.empty()) tfail("owns no objects");
        if (!t.predicate.empty()) {
            if (!t.terms.empty()) tfail("a predicate template cannot also list terms");
            continue;
        }
        if (t.terms.empty()) tfail("has neither terms nor a predicate");
        for (const auto& tm : t.terms) {
            for (std::size_t o = 0; o < t.owned.size(); ++o) {
                int plus = 0, minus = 0, tip = 0, bare = 0;
                for (const auto& p : tm.puts)
                    if (p.owned == static_cast<int>(o)) {
                        if (p.tag == '+') ++plus;
                        else if (p.tag == '-') ++minus;
                        else if (p.tag == '^') ++tip;
                        else ++bare;
                    }
                bool ok = (t.kind == Kind::dd && plus == 2 && minus == 2 && tip == 0) ||
                          (t.kind == Kind::wedge && plus == 1 && minus == 1 && tip == 1) ||
                          (t.kind == Kind::chord && bare == 2 && plus + minus + tip == 0);
                if (!ok)
                    tfail("a term does not place the full endpoint set of " + t.owned[o]);
            }
        }
    }
    return out;
}

inline std::string dump_templates(const std::vector<RelationTemplate>& ts) {
    std::string out;
    const char* okind[] = {"pair", "chord", "wedge"};
    for (const auto& t : ts) {
        if (!out.empty()) out += '\n';
        out += "template " + t.name + " kind=" + kind_name(t.kind) + "\n";
        out += "own";
        for (const auto& o : t.owned) {
            out += ' ';
            out += okind[static_cast<int>(t.kind)];
            out += ' ';
            out += o;
        }
        out += '\n';
        if (!t.sign_variants) out += "no-sign-variants\n";
        if (!t.predicate.empty()) out += "predicate " + t.predicate + "\n";
        for (const auto& s : t.slots) {
            out += "slot " + s.name + " on " + t.vars[s.var];
            if (s.prev >= 0) out += " adjacent-to " + t.slots[s.prev].name;
            out += '\n';
        }
        for (const auto& tm : t.terms) {
            out += "term " + tm.coeff.str() + ":";
            for (const auto& p : tm.puts) {
                out += ' ';
                out += t.owned[p.owned];
                if (p.tag) out += p.tag;
                out += '@';
                out += t.slots[p.slot].name;
            }
            out += '\n';
        }
    }
    return out;
}

// Canonical content hash of a template set (used to stamp caches): hash of the
// canonical dump, so formatting and comment differences do not matter.
inline std::string templates_hash_hex(const std::vector<RelationTemplate>& ts) {
    return fnv1a64_hex(dump_templates(ts));
}

// ---------------------------------------------------------------------------
// Builtin template set
// ---------------------------------------------------------------------------

inline const char* builtin_templates_text() {
    return R"TPL(# Builtin relation templates.
#
# Grammar:
#   template <name> kind=<dd|wedge|chord>
#   own <pair|wedge|chord> <NAME> [...]
#   slot <name> on <VAR> [adjacent-to <slot>]   # chained slots stay adjacent, in order
#   term <rational>: <NAME><end>@<slot> ...     # <end> is + - for pair chords / wedge
#                                               # legs, ^ for tips, empty for chords
#   predicate <name>          # closed-form membership test instead of terms
#   no-sign-variants          # suppress the per-object +/- swap closure
#
# A term must place every endpoint of every owned object. Slots left unused by
# a term simply vanish from that term's diagram.

# An isolated pair (both chords' endpoints mutually adjacent) kills the diagram.
template 1T kind=dd
own pair P1
predicate isolated-pair

# A pair plus its globally sign-reversed image vanishes: flipping every
# + chord to - and vice versa negates the diagram's class.
template 2T kind=dd
own pair Q1
slot f1 on A
slot f2 on B
slot f3 on C
slot f4 on D
term 1: Q1+@f1 Q1-@f2 Q1+@f3 Q1-@f4
term 1: Q1-@f1 Q1+@f2 Q1-@f3 Q1+@f4

# Where a pair's two chords land side by side on one strand, their order
# there is immaterial.
template 2Tb kind=dd
own pair Q1
slot a1 on A
slot a2 on A adjacent-to a1
slot f3 on B
slot f4 on C
term 1: Q1+@a1 Q1-@a2 Q1+@f3 Q1-@f4
term -1: Q1-@a1 Q1+@a2 Q1+@f3 Q1-@f4

# Carrying one endpoint of a chord past both same-sign endpoints of another
# pair, one at a time, returns it with alternating signs: the four positions
# around the two crossed endpoints sum to zero.
template 3T kind=dd
own pair P1 pair Q1
slot a1 on A
slot qx on A adjacent-to a1
slot a2 on A adjacent-to qx
slot b1 on B
slot qy on B adjacent-to b1
slot b2 on B adjacent-to qy
slot p2 on C
slot p3 on D
slot p4 on E
slot q3 on F
slot q4 on G
term 1: P1+@a1 P1+@p2 P1-@p3 P1-@p4 Q1+@qx Q1+@qy Q1-@q3 Q1-@q4
term -1: P1+@a2 P1+@p2 P1-@p3 P1-@p4 Q1+@qx Q1+@qy Q1-@q3 Q1-@q4
term 1: P1+@b1 P1+@p2 P1-@p3 P1-@p4 Q1+@qx Q1+@qy Q1-@q3 Q1-@q4
term -1: P1+@b2 P1+@p2 P1-@p3 P1-@p4 Q1+@qx Q1+@qy Q1-@q3 Q1-@q4

# A pair straddling one endpoint of another pair's chord, plus the
# sign-reversed straddle of that chord's partner endpoint, vanishes; the
# remaining two chords of the straddling pair stay side by side.
template 3Tb kind=dd
own pair P1 pair Q1
slot qa1 on A
slot pi  on A adjacent-to qa1
slot qa2 on A adjacent-to pi
slot ra1 on B
slot pj  on B adjacent-to ra1
slot ra2 on B adjacent-to pj
slot pi2 on C
slot pj2 on D
slot k1  on E
slot k2  on E adjacent-to k1
term 1: P1+@pi P1+@pj P1-@pi2 P1-@pj2 Q1+@qa1 Q1-@qa2 Q1+@k1 Q1-@k2
term 1: P1+@pi P1+@pj P1-@pi2 P1-@pj2 Q1+@ra1 Q1-@ra2 Q1-@k1 Q1+@k2

# A wedge plus its leg-swapped image vanishes: exchanging the two leg
# endpoints negates the diagram's class.
template w2T kind=wedge
own wedge W1
slot t on A
slot f1 on B
slot f2 on C
term 1: W1^@t W1+@f1 W1-@f2
term 1: W1^@t W1-@f1 W1+@f2

# Carrying a wedge leg once around all three endpoints of another wedge
# returns it with alternating signs: the six flanking positions sum to zero.
template w3T kind=wedge
own wedge W1 wedge Q1
slot a1 on A
slot qt on A adjacent-to a1
slot a2 on A adjacent-to qt
slot b1 on B
slot qp on B adjacent-to b1
slot b2 on B adjacent-to qp
slot c1 on C
slot qm on C adjacent-to c1
slot c2 on C adjacent-to qm
slot w2 on D
slot w3 on E
term 1:  W1+@a1 W1-@w2 W1^@w3 Q1^@qt Q1+@qp Q1-@qm
term -1: W1+@a2 W1-@w2 W1^@w3 Q1^@qt Q1+@qp Q1-@qm
term 1:  W1+@b1 W1-@w2 W1^@w3 Q1^@qt Q1+@qp Q1-@qm
term -1: W1+@b2 W1-@w2 W1^@w3 Q1^@qt Q1+@qp Q1-@qm
term 1:  W1+@c1 W1-@w2 W1^@w3 Q1^@qt Q1+@qp Q1-@qm
term -1: W1+@c2 W1-@w2 W1^@w3 Q1^@qt Q1+@qp Q1-@qm

# A wedge's own two legs commute when adjacent on a strand.
template interchangeI kind=wedge
own wedge W1
slot a1 on A
slot a2 on A adjacent-to a1
slot t on B
term 1: W1+@a1 W1-@a2 W1^@t
term -1: W1-@a1 W1+@a2 W1^@t

# A wedge's leg commutes with its own tip when adjacent on a strand.
template interchangeII kind=wedge
own wedge W1
slot a1 on A
slot a2 on A adjacent-to a1
slot f on B
term 1: W1+@a1 W1^@a2 W1-@f
term -1: W1^@a1 W1+@a2 W1-@f

# Adjacent tips of two wedges anticommute: the two tip orders sum to zero.
template woodpecker kind=wedge
own wedge W1 wedge W2
slot t1 on A
slot t2 on A adjacent-to t1
slot a on B
slot b on C
slot c on D
slot d on E
term 1: W1^@t1 W2^@t2 W1+@a W1-@b W2+@c W2-@d
term 1: W2^@t1 W1^@t2 W1+@a W1-@b W2+@c W2-@d

# Two wedges fully interleaved along six consecutive positions of one strand
# satisfy a weighted two-term identity tying the tip-led interleaving to the
# leg-led one.
template hexagon kind=wedge
own wedge W1 wedge W2
slot c1 on A
slot c2 on A adjacent-to c1
slot c3 on A adjacent-to c2
slot c4 on A adjacent-to c3
slot c5 on A adjacent-to c4
slot c6 on A adjacent-to c5
term 2: W2^@c1 W1^@c2 W1+@c3 W2+@c4 W1-@c5 W2-@c6
term 1: W1^@c1 W2+@c2 W1+@c3 W2^@c4 W1-@c5 W2-@c6
)TPL";
}

inline std::vector<RelationTemplate> builtin_templates() {
    return parse_templates(builtin_templates_text());
}

// Later definitions win by name; new names are appended.
inline std::vector<RelationTemplate> merge_templates(std::vector<RelationTemplate> base,
                                                     const std::vector<RelationTemplate>& over) {
    for (const auto& t : over) {
        bool replaced = false;
        for (auto& b : base)
            if (b.name == t.name) {
                b = t;
                replaced = true;
                break;
            }
        if (!replaced) base.push_back(t);
    }
    return base;
}

// A template file overlays the builtin set: same-named templates replace the
// builtin definition, others are added.
inline std::vector<RelationTemplate> load_templates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open template file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return merge_templates(builtin_templates(), parse_templates(ss.str()));
}

// Active template set: the builtin one, or a file overlay named by the
// DDLAB_TEMPLATES environment variable.
inline std::vector<RelationTemplate> load_templates() {
    const char* env = std::getenv("DDLAB_TEMPLATES");
    if (env && *env) return load_templates_file(env);
    return builtin_templates();
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

// "isolated-pair": the diagram contains an isolated owned object. For wedges
// the test is taken on the pair image of the wedge expansion.
inline bool template_predicate_holds(const std::string& pred, const Diagram& d) {
    if (pred == "isolated-pair") {
        if (d.kind == Kind::chord) return has_isolated_chord(d);
        if (d.kind == Kind::wedge) return !isolated_pairs(wedge_to_dd(d)).empty();
        return !isolated_pairs(d).empty();
    }
    throw UsageError("unknown template predicate: " + pred);
}

// ---------------------------------------------------------------------------
// Grounding engine
// ---------------------------------------------------------------------------

namespace detail {

using WordIndex = std::unordered_map<std::vector<int>, int, WordHash>;

// Flattened word of an already-canonical representative (apply_rots renumbers
// ids in first-occurrence order, so the identity flattening is minimal).
inline std::vector<int> rep_word(const Diagram& d) {
    std::vector<int> w;
    w.reserve(2 * total_tokens(d) + d.comps.size());
    for (const auto& comp : d.comps) {
        for (const Token& t : comp) {
            w.push_back(t.id);
            w.push_back(tag_rank(t.tag));
        }
        w.push_back(-1);
    }
    return w;
}

inline WordIndex word_index(const std::vector<Diagram>& basis) {
    WordIndex wi;
    wi.reserve(basis.size() * 2);
    for (std::size_t i = 0; i < basis.size(); ++i)
        wi.emplace(rep_word(basis[i]), static_cast<int>(i));
    return wi;
}

// Maximal adjacency chains, each inserted as one indivisible block.
inline std::vector<std::pair<int, std::vector<int>>> template_chains(const RelationTemplate& t) {
    int S = static_cast<int>(t.slots.size());
    std::vector<int> succ(S, -1);
    for (int i = 0; i < S; ++i)
        if (t.slots[i].prev >= 0) succ[t.slots[i].prev] = i;
    std::vector<std::pair<int, std::vector<int>>> chains;
    for (int i = 0; i < S; ++i) {
        if (t.slots[i].prev >= 0) continue;
        std::vector<int> ids;
        for (int j = i; j >= 0; j = succ[j]) ids.push_back(j);
        chains.push_back({t.slots[i].var, std::move(ids)});
    }
    return chains;
}

// One element of an under-construction component word: either a context token
// or a block of slot markers.
struct PlaceAtom {
    Token tok{0, 0};
    const std::vector<int>* slots = nullptr;  // non-null: a marker block
};

inline SparseVec lead_normalized(SparseVec v) {
    if (!v.empty() && v.front().second != 1) {
        Rational lead = v.front().second;
        for (auto& [i, c] : v) c /= lead;
    }
    return v;
}

// Grounds a placement template over every context of the complementary degree.
// Emits every instance row (duplicates included) as emit(row, context_index);
// rows are normalized but not rescaled. Predicate templates emit nothing here.
template <typename Emit>
inline void ground_template(const RelationTemplate& t, int degree, const Skeleton& sk,
                            const std::vector<Diagram>& contexts, const WordIndex& index,
                            Emit&& emit) {
    if (!t.predicate.empty()) return;
    int owned_n = static_cast<int>(t.owned.size());
    int cd = degree - owned_n;
    if (cd < 0) return;
    int l = static_cast<int>(sk.size());
    auto chains = template_chains(t);
    int nvars = static_cast<int>(t.vars.size());
    int nvariants = (t.sign_variants && t.kind != Kind::chord) ? (1 << owned_n) : 1;

    // Per-term slot contents: slot -> (owned, tag), owned -1 when unused.
    int S = static_cast<int>(t.slots.size());
    std::vector<std::vector<std::pair<int, char>>> by_slot(t.terms.size());
    for (std::size_t ti = 0; ti < t.terms.size(); ++ti) {
        by_slot[ti].assign(S, {-1, 0});
        for (const auto& p : t.terms[ti].puts) by_slot[ti][p.slot] = {p.owned, p.tag};
    }

    std::vector<std::vector<PlaceAtom>> atoms(l);
    std::vector<std::vector<Token>> scratch(l);
    std::vector<int> word, rots;
    std::vector<std::pair<int, Rational>> rowbuf;

    for (std::size_t ci = 0; ci < contexts.size(); ++ci) {
        const Diagram& ctx = contexts[ci];
        for_assignments(nvars, l, [&](const std::vector<int>& varmap) {
            // Validity is determined by the strand assignment alone: each owned
            // pair needs matching +/- component multisets, each owned wedge
            // needs its two legs on one component.
            for (const auto& tm : t.terms) {
                for (int o = 0; o < owned_n; ++o) {
                    if (t.kind == Kind::dd) {
                        std::array<std::array<int, 2>, 2> side{};
                        std::array<int, 2> cnt{0, 0};
                        for (const auto& p : tm.puts)
                            if (p.owned == o) {
                                int sd = p.tag == '+' ? 0 : 1;
                                side[sd][cnt[sd]++] = varmap[t.slots[p.slot].var];
                            }
                        for (auto& sd : side)
                            if (sd[0] > sd[1]) std::swap(sd[0], sd[1]);
                        if (side[0] != side[1]) return;
                    } else if (t.kind == Kind::wedge) {
                        int plus = -1, minus = -1;
                        for (const auto& p : tm.puts)
                            if (p.owned == o) {
                                if (p.tag == '+') plus = varmap[t.slots[p.slot].var];
                                if (p.tag == '-') minus = varmap[t.slots[p.slot].var];
                            }
                        if (plus != minus) return;
                    }
                }
            }

            for (int c = 0; c < l; ++c) {
                atoms[c].clear();
                for (const Token& tok : ctx.comps[c]) {
                    PlaceAtom a;
                    a.tok = tok;
                    atoms[c].push_back(a);
                }
            }

            // Recursive block insertion; a block is never split by later
            // insertions, so chained slots stay adjacent in every term.
            auto leaf = [&]() {
                for (int mask = 0; mask < nvariants; ++mask) {
                    rowbuf.clear();
                    for (std::size_t ti = 0; ti < t.terms.size(); ++ti) {
                        for (int c = 0; c < l; ++c) {
                            scratch[c].clear();
                            for (const PlaceAtom& a : atoms[c]) {
                                if (!a.slots) {
                                    scratch[c].push_back(a.tok);
                                    continue;
                                }
                                for (int s : *a.slots) {
                                    auto [o, tag] = by_slot[ti][s];
                                    if (o < 0) continue;
                                    char tg = tag;
                                    if ((mask >> o) & 1) {
                                        if (tg == '+') tg = '-';
                                        else if (tg == '-') tg = '+';
                                    }
                                    scratch[c].push_back(Token{cd + 1 + o, tg});
                                }
                            }
                        }
                        canonical_word(sk, scratch, degree, word, rots);
                        auto it = index.find(word);
                        if (it == index.end())
                            throw ValidityError("internal: grounded term left its stratum");
                        rowbuf.emplace_back(it->second, t.terms[ti].coeff);
                    }
                    SparseVec row = normalized(rowbuf);
                    if (!row.empty()) emit(row, static_cast<int>(ci));
                }
            };

            std::function<void(std::size_t)> place = [&](std::size_t k) {
                if (k == chains.size()) {
                    leaf();
                    return;
                }
                int comp = varmap[chains[k].first];
                auto& vec = atoms[comp];
                PlaceAtom block;
                block.slots = &chains[k].second;
                int A = static_cast<int>(vec.size());
                bool circle = sk[comp] == CompKind::circle;
                int lo = (A == 0) ? 0 : (circle ? 1 : 0);
                int hi = (A == 0) ? 0 : A;
                for (int i = lo; i <= hi; ++i) {
                    vec.insert(vec.begin() + i, block);
                    place(k + 1);
                    vec.erase(vec.begin() + i);
                }
            };
            place(0);
        });
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instances (introspection API)
// ---------------------------------------------------------------------------

struct RelationInstance {
    std::string template_name;
    std::string context;  // one-line canonical form of the context diagram
    LinearCombo combo;    // the relation, over target-stratum canonical keys
};

// All distinct grounded instances of one template on a stratum. Rows are
// deduplicated up to overall scale; the first producing context is recorded.
inline std::vector<RelationInstance> instantiate(const RelationTemplate& t, int degree,
                                                 const Skeleton& sk,
                                                 double budget = kDefaultBudget) {
    auto basis = enumerate_diagrams(t.kind, degree, sk, budget);
    std::vector<std::string> keys;
    keys.reserve(basis.size());
    for (const auto& d : basis) keys.push_back(detail::arrangement_text(d));
    std::vector<RelationInstance> out;
    std::set<SparseVec> seen;
    auto record = [&](const SparseVec& row, const std::string& ctx_line) {
        if (!seen.insert(detail::lead_normalized(row)).second) return;
        RelationInstance inst;
        inst.template_name = t.name;
        inst.context = ctx_line;
        for (const auto& [i, c] : row) inst.combo.add(keys[i], c);
        out.push_back(std::move(inst));
    };
    if (!t.predicate.empty()) {
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (template_predicate_holds(t.predicate, basis[i]))
                record({{static_cast<int>(i), Rational(1)}}, to_single_line(keys[i]));
        return out;
    }
    int cd = degree - static_cast<int>(t.owned.size());
    if (cd < 0) return out;
    auto contexts = enumerate_diagrams(t.kind, cd, sk, budget);
    auto index = detail::word_index(basis);
    detail::ground_template(t, degree, sk, contexts, index, [&](const SparseVec& row, int ci) {
        record(row, to_single_line(detail::arrangement_text(contexts[ci])));
    });
    return out;
}

inline std::vector<RelationInstance> instantiate(const RelationTemplate& t, int degree,
                                                 int components,
                                                 double budget = kDefaultBudget) {
    return instantiate(t, degree, circles(components), budget);
}

// ---------------------------------------------------------------------------
// Relation systems per stratum
// ---------------------------------------------------------------------------

namespace detail {

// How many raw rows may be kept in RelationSystem::rows before the system
// switches to streaming-only reduction.
constexpr long long kRowStoreCap = 200000;

template <typename RowSource>
inline RelationSystem build_system(std::vector<Diagram> basis, RowSource&& source) {
    RelationSystem sys;
    sys.basis.reserve(basis.size());
    for (const auto& d : basis) sys.basis.push_back(arrangement_text(d));
    RowReducer reducer(static_cast<int>(sys.basis.size()));
    bool storing = true;
    auto feed = [&](const SparseVec& row) {
        reducer.add(row);
        if (storing) {
            sys.rows.push_back(row);
            if (static_cast<long long>(sys.rows.size()) > kRowStoreCap) {
                sys.rows.clear();
                sys.rows.shrink_to_fit();
                storing = false;
            }
        }
    };
    source(basis, feed);
    sys.relation_count = reducer.rows_fed();
    sys.echelon = reducer.finish();
    return sys;
}

}  // namespace detail

// Relation system of the double-dating stratum: all grounded instances of the
// dd templates in the active set (predicate templates contribute one kill row
// per matching diagram).
inline RelationSystem gen_dd_relations(int degree, const Skeleton& sk,
                                       const std::vector<RelationTemplate>& templates,
                                       double budget = kDefaultBudget) {
    auto basis = enumerate_diagrams(Kind::dd, degree, sk, budget);
    auto index = detail::word_index(basis);
    return detail::build_system(std::move(basis), [&](const std::vector<Diagram>& diags,
                                                      auto&& feed) {
        for (const auto& t : templates) {
            if (t.kind != Kind::dd) continue;
            if (!t.predicate.empty()) {
                for (std::size_t i = 0; i < diags.size(); ++i)
                    if (template_predicate_holds(t.predicate, diags[i]))
                        feed({{static_cast<int>(i), Rational(1)}});
                continue;
            }
            int cd = degree - static_cast<int>(t.owned.size());
            if (cd < 0) continue;
            auto contexts = enumerate_diagrams(Kind::dd, cd, sk, budget);
            detail::ground_template(t, degree, sk, contexts, index,
                                    [&](const SparseVec& row, int) { feed(row); });
        }
    });
}

// Relation system of the wedge stratum: grounded instances of the wedge
// templates, plus the induced kill rows for wedges whose pair image contains
// an isolated pair.
inline RelationSystem gen_wedge_relations(int degree, const Skeleton& sk,
                                          const std::vector<RelationTemplate>& templates,
                                          double budget = kDefaultBudget) {
    auto basis = enumerate_diagrams(Kind::wedge, degree, sk, budget);
    auto index = detail::word_index(basis);
    return detail::build_system(std::move(basis), [&](const std::vector<Diagram>& diags,
                                                      auto&& feed) {
        for (std::size_t i = 0; i < diags.size(); ++i)
            if (!isolated_pairs(wedge_to_dd(diags[i])).empty())
                feed({{static_cast<int>(i), Rational(1)}});
        for (const auto& t : templates) {
            if (t.kind != Kind::wedge) continue;
            if (!t.predicate.empty()) {
                for (std::size_t i = 0; i < diags.size(); ++i)
                    if (template_predicate_holds(t.predicate, diags[i]))
                        feed({{static_cast<int>(i), Rational(1)}});
                continue;
            }
            int cd = degree - static_cast<int>(t.owned.size());
            if (cd < 0) continue;
            auto contexts = enumerate_diagrams(Kind::wedge, cd, sk, budget);
            detail::ground_template(t, degree, sk, contexts, index,
                                    [&](const SparseVec& row, int) { feed(row); });
        }
    });
}

// Four-term relation system of the chord stratum. Each row moves one end of a
// chord to the four positions flanking the two endpoints of another chord:
//   [after endpoint 1] - [before endpoint 1] + [after endpoint 2] - [before endpoint 2] = 0,
// positions taken in the word with the moving end removed.
inline RelationSystem gen_4T(int degree, const Skeleton& sk, double budget = kDefaultBudget) {
    auto basis = enumerate_diagrams(Kind::chord, degree, sk, budget);
    auto index = detail::word_index(basis);
    int l = static_cast<int>(sk.size());
    return detail::build_system(std::move(basis), [&](const std::vector<Diagram>& diags,
                                                      auto&& feed) {
        std::set<SparseVec> seen;
        std::vector<int> word, rots;
        for (const auto& d : diags) {
            for (int c = 1; c <= degree; ++c) {
                // Both choices of the moving end of chord c.
                for (int which = 0; which < 2; ++which) {
                    auto base = d.comps;
                    int found = 0;
                    bool removed = false;
                    for (int comp = 0; comp < l && !removed; ++comp)
                        for (std::size_t p = 0; p < base[comp].size(); ++p)
                            if (base[comp][p].id == c) {
                                if (found++ == which) {
                                    base[comp].erase(base[comp].begin() + p);
                                    removed = true;
                                    break;
                                }
                            }
                    for (int e = 1; e <= degree; ++e) {
                        if (e == c) continue;
                        std::vector<std::pair<int, Rational>> rowbuf;
                        for (int comp = 0; comp < l; ++comp)
                            for (std::size_t p = 0; p < base[comp].size(); ++p) {
                                if (base[comp][p].id != e) continue;
                                // before: +c at index p ; after: +c at index p+1.
                                for (int off = 0; off < 2; ++off) {
                                    auto cand = base;
                                    cand[comp].insert(cand[comp].begin() + p + off,
                                                      Token{c, 0});
                                    detail::canonical_word(sk, cand, degree, word, rots);
                                    auto it = index.find(word);
                                    if (it == index.end())
                                        throw ValidityError(
                                            "internal: four-term move left the stratum");
                                    rowbuf.emplace_back(it->second,
                                                        Rational(off == 0 ? -1 : 1));
                                }
                            }
                        SparseVec row = normalized(rowbuf);
                        if (row.empty()) continue;
                        if (seen.insert(detail::lead_normalized(row)).second) feed(row);
                    }
                }
            }
        }
    });
}

// Framing kill rows on the chord stratum: one row [D] per diagram with an
// isolated chord.
inline std::vector<SparseVec> gen_framing(int degree, const Skeleton& sk,
                                          double budget = kDefaultBudget) {
    auto basis = enumerate_diagrams(Kind::chord, degree, sk, budget);
    std::vector<SparseVec> rows;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (has_isolated_chord(basis[i])) rows.push_back({{static_cast<int>(i), Rational(1)}});
    return rows;
}

inline RelationSystem gen_dd_relations(int degree, int components,
                                       const std::vector<RelationTemplate>& templates,
                                       double budget = kDefaultBudget) {
    return gen_dd_relations(degree, circles(components), templates, budget);
}

inline RelationSystem gen_dd_relations(int degree, int components,
                                       double budget = kDefaultBudget) {
    return gen_dd_relations(degree, circles(components), load_templates(), budget);
}

inline RelationSystem gen_wedge_relations(int degree, int components,
                                          const std::vector<RelationTemplate>& templates,
                                          double budget = kDefaultBudget) {
    return gen_wedge_relations(degree, circles(components), templates, budget);
}

inline RelationSystem gen_wedge_relations(int degree, int components,
                                          double budget = kDefaultBudget) {
    return gen_wedge_relations(degree, circles(components), load_templates(), budget);
}

inline RelationSystem gen_4T(int degree, int components, double budget = kDefaultBudget) {
    return gen_4T(degree, circles(components), budget);
}

inline std::vector<SparseVec> gen_framing(int degree, int components,
                                          double budget = kDefaultBudget) {
    return gen_framing(degree, circles(components), budget);
}

}  // namespace ddlab
