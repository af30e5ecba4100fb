// Exact sparse linear algebra over the rationals for quotient-dimension
// computations: row reduction, span membership, and canonical reduced
// row-echelon expansion. The reducer runs a scaled union-find pass over
// support-<=2 rows (the bulk of relation systems) before a conventional
// sparse RREF on what remains; results are exact and deterministic.
#pragma once

#include "ddlab/common.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ddlab {

// Sparse vector over basis indices: sorted by index, all coefficients nonzero.
using SparseVec = std::vector<std::pair<int, Rational>>;

inline SparseVec normalized(std::vector<std::pair<int, Rational>> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVec out;
    for (auto& [i, c] : terms) {
        if (!out.empty() && out.back().first == i)
            out.back().second += c;
        else
            out.push_back({i, c});
        if (!out.empty() && out.back().second == 0) out.pop_back();
    }
    return out;
}

// dst += c * src, keeping the normalized representation.
inline void axpy(SparseVec& dst, const Rational& c, const SparseVec& src) {
    if (c == 0 || src.empty()) return;
    SparseVec out;
    out.reserve(dst.size() + src.size());
    std::size_t i = 0, j = 0;
    while (i < dst.size() || j < src.size()) {
        if (j == src.size() || (i < dst.size() && dst[i].first < src[j].first)) {
            out.push_back(dst[i++]);
        } else if (i == dst.size() || src[j].first < dst[i].first) {
            out.push_back({src[j].first, c * src[j].second});
            ++j;
        } else {
            Rational v = dst[i].second + c * src[j].second;
            if (v != 0) out.push_back({dst[i].first, std::move(v)});
            ++i;
            ++j;
        }
    }
    dst = std::move(out);
}

class EchelonForm {
  public:
    EchelonForm() = default;

    // Row-reduces `rows` over a basis of `basis_size` coordinates.
    static EchelonForm from_rows(const std::vector<SparseVec>& rows, int basis_size);

    // Wraps rows that are already a reduced row-echelon form (trusted source,
    // e.g. the on-disk cache); no union-find state.
    static EchelonForm from_rref(std::vector<SparseVec> rref_rows, int basis_size) {
        EchelonForm e;
        e.n_ = basis_size;
        e.alive_ = basis_size;
        e.parent_.resize(basis_size);
        e.scale_.assign(basis_size, Rational(1));
        e.dead_.assign(basis_size, 0);
        for (int i = 0; i < basis_size; ++i) e.parent_[i] = i;
        for (auto& r : rref_rows) {
            if (r.empty()) continue;
            e.p2pivot_.push_back(r.front().first);
            e.p2rows_.push_back(std::move(r));
        }
        e.full_ = e.p2rows_;
        return e;
    }

    int basis_size() const { return n_; }
    int rank() const { return (n_ - alive_) + static_cast<int>(p2rows_.size()); }
    int quotient_dim() const { return n_ - rank(); }

    // True iff v lies in the row span.
    bool contains(const SparseVec& v) const {
        SparseVec s = substitute(normalized(v));
        reduce_by_p2(s);
        return s.empty();
    }

    // Canonical reduced row-echelon form of the row space over the original
    // basis: unique per subspace, hence bit-stable regardless of how the rows
    // were presented. Built on demand.
    const std::vector<SparseVec>& rref() const {
        if (full_) return *full_;
        // Quotient-coordinate images: img[x] of each basis vector e_x in
        // Q^n / rowspace, expressed over the free phase-2 coordinates.
        // A combination sums to zero in the quotient iff it lies in the span.
        int q = quotient_dim();
        std::vector<SparseVec> img(n_);
        {
            // Free phase-2 roots, densely indexed.
            std::map<int, int> freeidx;
            for (int x = 0; x < n_; ++x) {
                auto [root, sc, dead] = find_const(x);
                if (dead) continue;
                SparseVec base{{root, Rational(1)}};
                reduce_to_quotient(base);
                for (auto& [i, c] : base) {
                    if (!freeidx.count(i)) {
                        int nx = static_cast<int>(freeidx.size());
                        freeidx[i] = nx;
                    }
                }
                SparseVec v;
                for (auto& [i, c] : base) v.push_back({freeidx.at(i), sc * c});
                img[x] = normalized(std::move(v));
            }
            (void)q;
        }
        // Right-to-left scan: a column whose image depends on the images of
        // later free columns is a pivot; the dependency coefficients are its
        // RREF row entries.
        std::vector<SparseVec> ech;       // echelon over quotient coordinates
        std::vector<SparseVec> comb;      // same rows as combinations of free columns
        std::vector<int> epivot;
        std::vector<SparseVec> rows_out;
        for (int x = n_ - 1; x >= 0; --x) {
            SparseVec v = img[x];
            SparseVec how;  // v reduced = img[x] - sum how[y] * img[y]
            for (std::size_t k = 0; k < ech.size(); ++k) {
                Rational c = coeff_of(v, epivot[k]);
                if (c != 0) {
                    axpy(v, -c, ech[k]);
                    axpy(how, c, comb[k]);
                }
            }
            if (v.empty()) {
                // x is a pivot: e_x - sum how[y] e_y lies in the row space.
                SparseVec row{{x, Rational(1)}};
                for (auto& [y, c] : how) row.push_back({y, -c});
                rows_out.push_back(normalized(std::move(row)));
            } else {
                Rational lead = v.front().second;
                for (auto& [i, c] : v) c /= lead;
                SparseVec c0{{x, Rational(1) / lead}};
                axpy(c0, Rational(-1) / lead, how);
                // comb rows track: ech row = sum c0[y] * img[y].
                epivot.push_back(v.front().first);
                ech.push_back(std::move(v));
                comb.push_back(std::move(c0));
            }
        }
        std::reverse(rows_out.begin(), rows_out.end());
        full_ = std::move(rows_out);
        return *full_;
    }

  private:
    friend class RowReducer;

    int n_ = 0;
    int alive_ = 0;
    // Union-find with scaling: value(x) = scale_[x] * value(parent chain root);
    // a dead root's class is identically zero.
    mutable std::vector<int> parent_;
    mutable std::vector<Rational> scale_;
    std::vector<char> dead_;
    std::vector<SparseVec> p2rows_;  // inter-reduced rows over root variables
    std::vector<int> p2pivot_;
    mutable std::optional<std::vector<SparseVec>> full_;

    static Rational coeff_of(const SparseVec& v, int idx) {
        auto it = std::lower_bound(v.begin(), v.end(), idx,
                                   [](const auto& a, int b) { return a.first < b; });
        if (it != v.end() && it->first == idx) return it->second;
        return Rational(0);
    }

    std::tuple<int, Rational, bool> find_const(int x) const {
        // Path compression (mutable members only).
        int root = x;
        Rational sc(1);
        while (parent_[root] != root) {
            sc *= scale_[root];
            root = parent_[root];
        }
        // Second pass: compress.
        int cur = x;
        Rational acc(1);
        while (parent_[cur] != cur) {
            int nxt = parent_[cur];
            Rational s = scale_[cur];
            // value(cur) = s * value(nxt); rewrite to point at root.
            Rational rest = sc / acc;  // value(cur) = rest * value(root)
            parent_[cur] = root;
            scale_[cur] = rest;
            acc *= s;
            cur = nxt;
        }
        return {root, sc, static_cast<bool>(dead_[root])};
    }

    SparseVec substitute(const SparseVec& v) const {
        std::vector<std::pair<int, Rational>> terms;
        terms.reserve(v.size());
        for (const auto& [i, c] : v) {
            auto [root, sc, dead] = find_const(i);
            if (dead) continue;
            terms.push_back({root, c * sc});
        }
        return normalized(std::move(terms));
    }

    void kill(int root) {
        dead_[root] = 1;
        --alive_;
    }

    void merge(int x, const Rational& cx, int y, const Rational& cy) {
        // cx * value(x) + cy * value(y) = 0 with x, y distinct alive roots.
        if (x > y) {
            parent_[x] = y;
            scale_[x] = -cy / cx;
        } else {
            parent_[y] = x;
            scale_[y] = -cx / cy;
        }
        --alive_;
    }

    // Consumes a substituted row if its support is <= 2; returns true if
    // consumed (including trivially-zero rows).
    bool consume_small(const SparseVec& s) {
        if (s.empty()) return true;
        if (s.size() == 1) {
            kill(s[0].first);
            return true;
        }
        if (s.size() == 2) {
            merge(s[0].first, s[0].second, s[1].first, s[1].second);
            return true;
        }
        return false;
    }

    void reduce_by_p2(SparseVec& v) const {
        for (std::size_t k = 0; k < p2rows_.size(); ++k) {
            Rational c = coeff_of(v, p2pivot_[k]);
            if (c != 0) axpy(v, -c, p2rows_[k]);
        }
    }

    // Expresses a root-variable vector over the phase-2 free coordinates
    // (i.e. reduces by the phase-2 pivots).
    void reduce_to_quotient(SparseVec& v) const {
        for (std::size_t k = 0; k < p2rows_.size(); ++k) {
            Rational c = coeff_of(v, p2pivot_[k]);
            if (c != 0) {
                // pivot row: e_p + rest; e_p == -rest in the quotient.
                SparseVec rest = p2rows_[k];
                rest.erase(rest.begin());  // drop the pivot itself
                axpy(v, Rational(-1) * c, SparseVec{{p2pivot_[k], Rational(1)}});
                axpy(v, -c, rest);
            }
        }
    }

    void rref_insert(SparseVec s) {
        reduce_by_p2(s);
        if (s.empty()) return;
        Rational lead = s.front().second;
        for (auto& [i, c] : s) c /= lead;
        int piv = s.front().first;
        // Eliminate the new pivot everywhere to keep full reduction.
        for (std::size_t k = 0; k < p2rows_.size(); ++k) {
            Rational c = coeff_of(p2rows_[k], piv);
            if (c != 0) axpy(p2rows_[k], -c, s);
        }
        p2rows_.push_back(std::move(s));
        p2pivot_.push_back(piv);
    }
};

// Streaming reducer: rows are folded in one at a time, so large generated
// relation sets never need to be materialized. Rows whose substituted support
// is <= 2 are absorbed into the union-find immediately; the rest are buffered
// for the fixpoint in finish().
class RowReducer {
  public:
    explicit RowReducer(int basis_size) {
        e_.n_ = basis_size;
        e_.parent_.resize(basis_size);
        e_.scale_.assign(basis_size, Rational(1));
        e_.dead_.assign(basis_size, 0);
        for (int i = 0; i < basis_size; ++i) e_.parent_[i] = i;
        e_.alive_ = basis_size;
    }

    void add(const SparseVec& row) {
        ++count_;
        SparseVec s = e_.substitute(row);
        if (!e_.consume_small(s)) pending_.push_back(std::move(s));
    }

    long long rows_fed() const { return count_; }

    EchelonForm finish() {
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<SparseVec> next;
            next.reserve(pending_.size());
            for (auto& r : pending_) {
                SparseVec s = e_.substitute(r);
                if (e_.consume_small(s))
                    changed = true;
                else
                    next.push_back(std::move(s));
            }
            pending_ = std::move(next);
        }
        for (auto& r : pending_) {
            SparseVec s = e_.substitute(r);
            e_.rref_insert(std::move(s));
        }
        pending_.clear();
        return std::move(e_);
    }

  private:
    EchelonForm e_;
    std::vector<SparseVec> pending_;
    long long count_ = 0;
};

inline EchelonForm EchelonForm::from_rows(const std::vector<SparseVec>& rows, int basis_size) {
    RowReducer r(basis_size);
    for (const auto& row : rows) r.add(row);
    return r.finish();
}

inline EchelonForm reduce(const std::vector<SparseVec>& rows, int basis_size) {
    return EchelonForm::from_rows(rows, basis_size);
}

inline bool in_span(const SparseVec& v, const EchelonForm& e) { return e.contains(v); }

inline int quotient_dim(int basis_size, const std::vector<SparseVec>& rows) {
    return reduce(rows, basis_size).quotient_dim();
}

inline bool span_equal(const std::vector<SparseVec>& A, const std::vector<SparseVec>& B, int basis_size) {
    EchelonForm ea = reduce(A, basis_size), eb = reduce(B, basis_size);
    if (ea.rank() != eb.rank()) return false;
    for (const auto& r : A)
        if (!eb.contains(r)) return false;
    for (const auto& r : B)
        if (!ea.contains(r)) return false;
    return true;
}

// A relation system over one stratum: the ordered basis of canonical keys,
// relation rows over it, and a lazily computed echelon form. Large generated
// systems may be reduced in streaming fashion, in which case `rows` stays
// empty, `relation_count` records how many rows were folded in, and `echelon`
// is populated up front.
struct RelationSystem {
    std::vector<std::string> basis;  // sorted canonical keys
    std::vector<SparseVec> rows;
    long long relation_count = 0;    // rows folded in; equals rows.size() unless streamed
    mutable std::optional<EchelonForm> echelon;

    int index_of(const std::string& key) const {
        auto it = std::lower_bound(basis.begin(), basis.end(), key);
        if (it == basis.end() || *it != key) return -1;
        return static_cast<int>(it - basis.begin());
    }

    const EchelonForm& ensure_echelon() const {
        if (!echelon) echelon = EchelonForm::from_rows(rows, static_cast<int>(basis.size()));
        return *echelon;
    }

    int rank() const { return ensure_echelon().rank(); }
    int quotient_dim() const { return static_cast<int>(basis.size()) - rank(); }
};

struct DimensionReport {
    std::string kind;
    int degree = 0;
    int components = 0;
    int generator_count = 0;
    int relation_count = 0;
    int rank = 0;
    int quotient_dim = 0;
};

// A formal rational combination of canonical diagram keys.  Keys are the
// one-line text serializations, kept sorted; zero coefficients are dropped.
struct LinearCombo {
    std::map<std::string, Rational> terms;

    void add(const std::string& key, const Rational& c) {
        if (c == 0) return;
        auto [it, fresh] = terms.try_emplace(key, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }

    bool empty() const { return terms.empty(); }

    LinearCombo& operator+=(const LinearCombo& other) {
        for (const auto& [k, c] : other.terms) add(k, c);
        return *this;
    }

    LinearCombo& operator*=(const Rational& c) {
        if (c == 0) { terms.clear(); return *this; }
        for (auto& [k, v] : terms) v *= c;
        return *this;
    }

    // One "<rational> * <diagram>" line per term, in key order, with each
    // diagram collapsed onto a single line.
    std::string serialize() const {
        std::string out;
        for (const auto& [k, c] : terms) {
            out += c.str();
            out += " * ";
            out += to_single_line(k);
            out += '\n';
        }
        return out;
    }

    // Projects onto a stratum basis; throws if a key is absent from it.
    SparseVec to_vector(const std::vector<std::string>& basis) const {
        std::vector<std::pair<int, Rational>> raw;
        for (const auto& [k, c] : terms) {
            auto it = std::lower_bound(basis.begin(), basis.end(), k);
            if (it == basis.end() || *it != k)
                throw ValidityError("combination term is not a basis key: " + k);
            raw.emplace_back(static_cast<int>(it - basis.begin()), c);
        }
        return normalized(std::move(raw));
    }
};

}  // namespace ddlab
