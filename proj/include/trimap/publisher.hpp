#pragma once

#include <array>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "trimap/blinding.hpp"
#include "trimap/poly.hpp"
#include "trimap/rng.hpp"

namespace trimap {

enum class PubMode { Sum, Product, Map };
enum class PubRepr { Flat, Packed };

struct FlatPiece {
    MultiPoly num, den;
};

// A local evaluation table: consumes the published quadratics' values at the
// referenced (slot, row) pairs, two values per source.
struct PackedPiece {
    std::vector<std::pair<unsigned, unsigned>> sources;
    MultiPoly tnum, tden;
};

struct TelescopeForm {
    MultiPoly l1, l2;
};

struct PublishedFunction {
    PubMode mode = PubMode::Sum;
    PubRepr repr = PubRepr::Flat;
    unsigned arity = 1;
    std::size_t slot_dim = 0;  // coordinates per input slot
    std::size_t out_dim = 1;   // 1 for scalars, 3n for maps
    bool twisted = false;      // flat pieces live in descent coordinates
    std::size_t nvars = 0;     // flattened variable count of the pieces

    std::vector<std::vector<FlatPiece>> flat;                 // [out][piece]
    std::vector<std::vector<std::array<MultiPoly, 2>>> H;     // [slot][row][j]
    std::vector<std::vector<PackedPiece>> packed;             // [out][piece]
    std::vector<std::vector<TelescopeForm>> tele;             // [out][piece]
};

// -- helpers ---------------------------------------------------------------

// A nondegenerate affine form vanishes at roughly a 1/q fraction of the test
// sample, while a form that is useless for telescoping vanishes on all of it,
// so the rejection bound tracks the field size: one percent once q is large,
// a Schwartz-Zippel-style allowance below that.
inline MultiPoly random_linear_form(const FieldPtr& K, std::size_t nv,
                                    const std::vector<std::vector<FieldElement>>& sample,
                                    Rng& rng) {
    std::size_t allowed = std::max<std::size_t>(
        sample.size() / 100, (2 * sample.size()) / K->q() + sample.size() / 10);
    for (int tries = 0; tries < 64; ++tries) {
        MultiPoly l(K, nv);
        bool homog_nonzero = false;
        for (std::size_t i = 0; i < nv; ++i) {
            FieldElement c = K->sample(rng);
            if (!c.is_zero()) homog_nonzero = true;
            Monomial m(nv, 0);
            m[i] = 1;
            l.add_term(m, c);
        }
        l.add_term(Monomial(nv, 0), K->sample(rng));
        if (!homog_nonzero) continue;
        std::size_t zeros = 0;
        for (const auto& p : sample)
            if (l.evaluate(p).is_zero()) ++zeros;
        if (zeros > allowed) continue;  // vanishes too often, resample
        return l;
    }
    throw SearchExhausted("no usable linear form found");
}

inline MultiPoly lift_to_slot(const MultiPoly& p, unsigned slot, unsigned arity) {
    std::size_t nv = p.nvars();
    MultiPoly r(p.field(), nv * arity);
    for (const auto& [m, c] : p.terms()) {
        Monomial shifted(nv * arity, 0);
        for (std::size_t i = 0; i < nv; ++i) shifted[slot * nv + i] = m[i];
        r.add_term(shifted, c);
    }
    return r;
}

inline std::vector<FieldElement> flatten_slots(const std::vector<std::vector<FieldElement>>& s) {
    std::vector<FieldElement> out;
    for (const auto& v : s) out.insert(out.end(), v.begin(), v.end());
    return out;
}

// binom(nv + deg, deg) clamped; used only to route between representations
inline u64 term_capacity(std::size_t nv, unsigned deg, u64 clamp) {
    u64 r = 1;
    for (unsigned i = 1; i <= deg; ++i) {
        r = r * (nv + i) / i;
        if (r > clamp) return clamp + 1;
    }
    return r;
}

// -- flat sum / product ----------------------------------------------------

// Publishes sum_i num_i/den_i as noised, telescoped pieces: each piece picks
// up a rational shift that cancels around the cycle, then both polynomials
// move inside their coset of the vanishing ideal.
inline PublishedFunction publish_sum(const std::vector<FlatPiece>& hidden,
                                     const AmbivalenceIdeal& I,
                                     const std::vector<std::vector<FieldElement>>& sample,
                                     Rng& rng, unsigned sparsity = 3,
                                     std::vector<FlatPiece>* prenoise = nullptr,
                                     bool ratio_forms = true) {
    if (hidden.empty()) throw ContractViolation("nothing to publish");
    const FieldPtr& K = hidden[0].num.field();
    std::size_t nv = hidden[0].num.nvars();
    std::size_t m = hidden.size();

    // ratio shifts follow the scalar procedure; polynomial shifts (constant
    // denominator forms) telescope just the same and add no pole locus, which
    // matters for maps applied in long chains
    MultiPoly one = MultiPoly::constant(K, nv, K->one());
    std::vector<std::array<MultiPoly, 2>> l;
    for (std::size_t i = 0; i < m; ++i)
        l.push_back({random_linear_form(K, nv, sample, rng),
                     ratio_forms ? random_linear_form(K, nv, sample, rng) : one});
    l.push_back(l[0]);

    PublishedFunction f;
    f.mode = PubMode::Sum;
    f.nvars = nv;
    f.slot_dim = nv;
    f.flat.resize(1);
    if (prenoise) prenoise->clear();
    for (std::size_t i = 0; i < m; ++i) {
        MultiPoly gp = hidden[i].num * l[i][1] * l[i + 1][1] +
                       l[i][0] * hidden[i].den * l[i + 1][1] -
                       l[i + 1][0] * hidden[i].den * l[i][1];
        MultiPoly hp = hidden[i].den * l[i][1] * l[i + 1][1];
        if (prenoise) prenoise->push_back({gp, hp});
        MultiPoly gpp = I.coset_sample(gp, std::max(2u, gp.degree() + 2), rng, nullptr, sparsity);
        MultiPoly hpp = I.coset_sample(hp, std::max(2u, hp.degree() + 2), rng, nullptr, sparsity);
        f.flat[0].push_back({std::move(gpp), std::move(hpp)});
    }
    return f;
}

inline PublishedFunction publish_product(const std::vector<FlatPiece>& hidden,
                                         const AmbivalenceIdeal& I,
                                         const std::vector<std::vector<FieldElement>>& sample,
                                         Rng& rng, unsigned sparsity = 3,
                                         std::vector<FlatPiece>* prenoise = nullptr) {
    if (hidden.empty()) throw ContractViolation("nothing to publish");
    const FieldPtr& K = hidden[0].num.field();
    std::size_t nv = hidden[0].num.nvars();
    std::size_t m = hidden.size();

    std::vector<MultiPoly> l;
    for (std::size_t i = 0; i < m; ++i) l.push_back(random_linear_form(K, nv, sample, rng));
    l.push_back(l[0]);

    PublishedFunction f;
    f.mode = PubMode::Product;
    f.nvars = nv;
    f.slot_dim = nv;
    f.flat.resize(1);
    if (prenoise) prenoise->clear();
    for (std::size_t i = 0; i < m; ++i) {
        MultiPoly gp = hidden[i].num * l[i];
        MultiPoly hp = hidden[i].den * l[i + 1];
        if (prenoise) prenoise->push_back({gp, hp});
        MultiPoly gpp = I.coset_sample(gp, std::max(2u, gp.degree() + 1), rng, nullptr, sparsity);
        MultiPoly hpp = I.coset_sample(hp, std::max(2u, hp.degree() + 1), rng, nullptr, sparsity);
        f.flat[0].push_back({std::move(gpp), std::move(hpp)});
    }
    return f;
}

// -- twisted (descent) sum -------------------------------------------------

// Sum-mode publication under a twisted key.  Hidden piece i is the 2-variable
// local num/den pair applied to the twisted pair of slot i; everything is
// expressed over the base field through the published basis, with exponents
// folded by x^q = x.
inline PublishedFunction publish_twisted(const BlindingKey& key,
                                         const std::vector<std::array<MultiPoly, 2>>& locals,
                                         const std::vector<std::vector<FieldElement>>& wsample,
                                         Rng& rng, unsigned sparsity = 3) {
    const FieldPtr& K = key.K;
    if (locals.size() != key.n) throw ContractViolation("one local per slot expected");
    u64 q = K->q();
    std::vector<u64> no_twist(key.dim(), 0);

    std::vector<FlatPiece> hidden;
    for (std::size_t i = 0; i < key.n; ++i) {
        MultiPoly TDa = descent_reduce(key.F[i][0], no_twist, key.twists[i].first);
        MultiPoly TDb = descent_reduce(key.F[i][1], no_twist, key.twists[i].second);
        std::vector<MultiPoly> inner = {TDa, TDb};
        hidden.push_back({reduce_mod_J(locals[i][0].compose(inner), q),
                          reduce_mod_J(locals[i][1].compose(inner), q)});
    }

    AmbivalenceIdeal I;
    for (const MultiPoly& g : key.gens)
        I.generators.push_back(descent_reduce(g, no_twist, 0));

    std::vector<std::vector<FieldElement>> dsample;
    for (const auto& w : wsample) dsample.push_back(descend_point(K, w));

    PublishedFunction f = publish_sum(hidden, I, dsample, rng, sparsity);
    for (auto& piece : f.flat[0]) {
        piece.num = reduce_mod_J(piece.num, q);
        piece.den = reduce_mod_J(piece.den, q);
    }
    f.twisted = true;
    f.slot_dim = key.dim();
    return f;
}

// -- packed map / product --------------------------------------------------

struct LocalMapSpec {
    std::vector<std::pair<unsigned, unsigned>> sources;  // (slot, input row)
    std::array<RationalFn, 2> psi;  // transported-coordinate map, 2 vars per source
};

struct ScalarLocalSpec {
    std::vector<std::pair<unsigned, unsigned>> sources;
    RationalFn value;
};

namespace detail {

inline std::vector<std::vector<std::array<MultiPoly, 2>>> draw_H(
    const std::vector<const BlindingKey*>& slot_keys, Rng& rng) {
    std::vector<std::vector<std::array<MultiPoly, 2>>> H;
    for (const BlindingKey* k : slot_keys) {
        AmbivalenceIdeal I = k->ideal();
        std::vector<std::array<MultiPoly, 2>> rows;
        for (std::size_t r = 0; r < k->n; ++r)
            rows.push_back({I.coset_sample(k->F[r][0], 2, rng),
                            I.coset_sample(k->F[r][1], 2, rng)});
        H.push_back(std::move(rows));
    }
    return H;
}

inline std::vector<std::vector<TelescopeForm>> draw_telescopes(
    const FieldPtr& K, std::size_t outs, std::size_t pieces, std::size_t nv,
    const std::vector<std::vector<FieldElement>>& sample, Rng& rng, bool ratio) {
    MultiPoly one = MultiPoly::constant(K, nv, K->one());
    std::vector<std::vector<TelescopeForm>> tele(outs);
    for (auto& row : tele)
        for (std::size_t j = 0; j < pieces; ++j)
            row.push_back({random_linear_form(K, nv, sample, rng),
                           ratio ? random_linear_form(K, nv, sample, rng) : one});
    return tele;
}

}  // namespace detail

// Publication of a map into the blinding space.  Each output coordinate is a
// sum of semi-local functions; small instances expand them into flat noised
// pieces, larger ones keep the factors separate: published quadratics feed
// per-row tables, and value-level telescoping shifts mask the summands.
inline PublishedFunction publish_map(const BlindingKey& out_key,
                                     const std::vector<const BlindingKey*>& slot_keys,
                                     const std::vector<LocalMapSpec>& rows,
                                     const std::vector<std::vector<FieldElement>>& flat_sample,
                                     Rng& rng, u64 flat_budget = 120000,
                                     unsigned sparsity = 3) {
    const FieldPtr& K = out_key.K;
    if (out_key.twisted()) throw ContractViolation("packed maps require untwisted keys");
    if (rows.size() != out_key.n) throw ContractViolation("one local map per row expected");
    unsigned arity = (unsigned)slot_keys.size();
    std::size_t sd = out_key.dim();
    std::size_t nvf = arity * sd;
    std::size_t outs = sd;

    // local tables u_{r,s} = mu~_{r,s} ∘ psi_r
    std::vector<std::array<RationalFn, 3>> u;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<RationalFn> psi = {rows[r].psi[0], rows[r].psi[1]};
        u.push_back({compose_rational(out_key.mu_tilde[r][0], psi),
                     compose_rational(out_key.mu_tilde[r][1], psi),
                     compose_rational(out_key.mu_tilde[r][2], psi)});
    }

    // route on the estimated flat size
    u64 est = 0;
    for (std::size_t r = 0; r < u.size(); ++r)
        for (std::size_t s = 0; s < 3; ++s) {
            est += term_capacity(nvf, 2 * u[r][s].num.degree() + 3, flat_budget);
            est += term_capacity(nvf, 2 * u[r][s].den.degree() + 3, flat_budget);
            if (est > flat_budget) break;
        }
    est *= outs;

    PublishedFunction f;
    f.mode = PubMode::Map;
    f.arity = arity;
    f.slot_dim = sd;
    f.out_dim = outs;
    f.nvars = nvf;
    f.H = detail::draw_H(slot_keys, rng);

    if (est <= flat_budget) {
        f.repr = PubRepr::Flat;
        AmbivalenceIdeal I;
        std::vector<std::vector<std::array<MultiPoly, 2>>> HL(arity);
        for (unsigned s = 0; s < arity; ++s) {
            for (const MultiPoly& g : slot_keys[s]->gens)
                I.generators.push_back(lift_to_slot(g, s, arity));
            for (std::size_t r = 0; r < slot_keys[s]->n; ++r)
                HL[s].push_back({lift_to_slot(f.H[s][r][0], s, arity),
                                 lift_to_slot(f.H[s][r][1], s, arity)});
        }
        for (std::size_t t = 0; t < outs; ++t) {
            std::vector<FlatPiece> hidden;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                std::vector<MultiPoly> inner;
                for (auto [sl, rw] : rows[r].sources) {
                    inner.push_back(HL[sl][rw][0]);
                    inner.push_back(HL[sl][rw][1]);
                }
                for (std::size_t s = 0; s < 3; ++s) {
                    MultiPoly num = u[r][s].num.compose(inner);
                    MultiPoly den = u[r][s].den.compose(inner);
                    hidden.push_back({num.scale(out_key.delta_inv[t][3 * r + s]), den});
                }
            }
            PublishedFunction part =
                publish_sum(hidden, I, flat_sample, rng, sparsity, nullptr, false);
            f.flat.push_back(std::move(part.flat[0]));
        }
        f.H.clear();  // flat pieces absorbed the representatives
        return f;
    }

    f.repr = PubRepr::Packed;
    f.packed.resize(outs);
    for (std::size_t t = 0; t < outs; ++t)
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t s = 0; s < 3; ++s) {
                FieldElement c = K->sample_nonzero(rng);
                PackedPiece p;
                p.sources = rows[r].sources;
                p.tnum = u[r][s].num.scale(out_key.delta_inv[t][3 * r + s] * c);
                p.tden = u[r][s].den.scale(c);
                f.packed[t].push_back(std::move(p));
            }
    f.tele = detail::draw_telescopes(K, outs, f.packed[0].size(), nvf, flat_sample, rng, false);
    return f;
}

// Scalar product over per-row local values, packed form.
inline PublishedFunction publish_packed_product(
    const std::vector<const BlindingKey*>& slot_keys, const std::vector<ScalarLocalSpec>& rows,
    const std::vector<std::vector<FieldElement>>& flat_sample, Rng& rng) {
    if (rows.empty() || slot_keys.empty()) throw ContractViolation("nothing to publish");
    const FieldPtr& K = slot_keys[0]->K;
    unsigned arity = (unsigned)slot_keys.size();
    std::size_t sd = slot_keys[0]->dim();

    PublishedFunction f;
    f.mode = PubMode::Product;
    f.repr = PubRepr::Packed;
    f.arity = arity;
    f.slot_dim = sd;
    f.out_dim = 1;
    f.nvars = arity * sd;
    f.H = detail::draw_H(slot_keys, rng);
    f.packed.resize(1);
    for (const ScalarLocalSpec& r : rows) {
        FieldElement c = K->sample_nonzero(rng);
        PackedPiece p;
        p.sources = r.sources;
        p.tnum = r.value.num.scale(c);
        p.tden = r.value.den.scale(c);
        f.packed[0].push_back(std::move(p));
    }
    f.tele = detail::draw_telescopes(K, 1, rows.size(), f.nvars, flat_sample, rng, true);
    return f;
}

// -- evaluation --------------------------------------------------------------

struct PubEvalCache {
    std::map<std::string, std::vector<FieldElement>> hv;

    static std::string key(const PublishedFunction* f, unsigned slot,
                           const std::vector<FieldElement>& pt) {
        std::ostringstream os;
        os << f << '/' << slot;
        for (const auto& c : pt)
            for (u64 v : c.coords()) os << ' ' << v;
        return os.str();
    }
};

inline std::vector<FieldElement> eval_published(
    const PublishedFunction& f, const std::vector<std::vector<FieldElement>>& slots,
    PubEvalCache* cache = nullptr) {
    if (slots.size() != f.arity) throw ContractViolation("slot count mismatch");
    for (const auto& s : slots)
        if (s.size() != f.slot_dim) throw ContractViolation("slot dimension mismatch");

    std::vector<FieldElement> flatpt;
    if (f.twisted) {
        const FieldPtr& K = f.flat[0][0].num.field();
        for (const auto& s : slots) {
            std::vector<FieldElement> d = descend_point(K, s);
            flatpt.insert(flatpt.end(), d.begin(), d.end());
        }
    } else {
        flatpt = flatten_slots(slots);
    }
    if (flatpt.size() != f.nvars) throw ContractViolation("flattened input size mismatch");
    const Field* fld = flatpt[0].field();

    if (f.repr == PubRepr::Flat) {
        std::vector<FieldElement> out;
        for (const auto& pieces : f.flat) {
            FieldElement acc = f.mode == PubMode::Product ? fld->one() : fld->zero();
            for (const FlatPiece& p : pieces) {
                FieldElement den = p.den.evaluate(flatpt);
                if (den.is_zero()) throw DenominatorZero("published piece pole");
                FieldElement v = p.num.evaluate(flatpt) / den;
                if (f.mode == PubMode::Product) {
                    if (v.is_zero()) throw PoleHit("published factor vanished");
                    acc *= v;
                } else {
                    acc += v;
                }
            }
            out.push_back(acc);
        }
        return out;
    }

    // packed: memoized published-quadratic values per slot
    auto h_values = [&](unsigned slot) -> const std::vector<FieldElement>& {
        static thread_local std::vector<FieldElement> scratch;
        if (cache) {
            std::string k = PubEvalCache::key(&f, slot, slots[slot]);
            auto it = cache->hv.find(k);
            if (it != cache->hv.end()) return it->second;
            std::vector<FieldElement> vals;
            for (const auto& row : f.H[slot]) {
                vals.push_back(row[0].evaluate(slots[slot]));
                vals.push_back(row[1].evaluate(slots[slot]));
            }
            return cache->hv.emplace(std::move(k), std::move(vals)).first->second;
        }
        scratch.clear();
        for (const auto& row : f.H[slot]) {
            scratch.push_back(row[0].evaluate(slots[slot]));
            scratch.push_back(row[1].evaluate(slots[slot]));
        }
        return scratch;
    };

    std::vector<FieldElement> out;
    for (std::size_t t = 0; t < f.packed.size(); ++t) {
        const auto& pieces = f.packed[t];
        const auto& forms = f.tele[t];
        FieldElement acc = f.mode == PubMode::Product ? fld->one() : fld->zero();
        for (std::size_t j = 0; j < pieces.size(); ++j) {
            const PackedPiece& p = pieces[j];
            std::vector<FieldElement> args;
            for (auto [sl, rw] : p.sources) {
                const auto& hv = h_values(sl);
                args.push_back(hv[2 * rw]);
                args.push_back(hv[2 * rw + 1]);
            }
            FieldElement den = p.tden.evaluate(args);
            if (den.is_zero()) throw DenominatorZero("published table pole");
            FieldElement v = p.tnum.evaluate(args) / den;
            const TelescopeForm& a = forms[j];
            const TelescopeForm& b = forms[(j + 1) % forms.size()];
            if (f.mode == PubMode::Product) {
                FieldElement la = a.l1.evaluate(flatpt), lb = b.l1.evaluate(flatpt);
                if (la.is_zero() || lb.is_zero())
                    throw DenominatorZero("telescoping form vanished");
                v *= la / lb;
                if (v.is_zero()) throw PoleHit("published factor vanished");
                acc *= v;
            } else {
                FieldElement a2 = a.l2.evaluate(flatpt), b2 = b.l2.evaluate(flatpt);
                if (a2.is_zero() || b2.is_zero())
                    throw DenominatorZero("telescoping form vanished");
                acc += v + a.l1.evaluate(flatpt) / a2 - b.l1.evaluate(flatpt) / b2;
            }
        }
        out.push_back(acc);
    }
    return out;
}

// Documentation metric: how many unknown coefficients a solver would have to
// recover versus how many published coefficient conditions constrain them.
struct ConditionReport {
    u64 unknowns = 0;
    u64 conditions = 0;
};

inline ConditionReport condition_counts(const PublishedFunction& f) {
    ConditionReport r;
    const u64 clamp = ~0ull >> 1;
    for (const auto& pieces : f.flat)
        for (const FlatPiece& p : pieces) {
            r.conditions += p.num.terms().size() + p.den.terms().size();
            r.unknowns += term_capacity(f.nvars, p.num.degree(), clamp) / 2 +
                          term_capacity(f.nvars, p.den.degree(), clamp) / 2 +
                          2 * (f.nvars + 1);
        }
    for (const auto& slot : f.H)
        for (const auto& row : slot)
            for (const auto& h : row) {
                r.conditions += h.terms().size();
                r.unknowns += term_capacity(f.slot_dim, 2, clamp);
            }
    for (std::size_t t = 0; t < f.packed.size(); ++t)
        for (std::size_t j = 0; j < f.packed[t].size(); ++j) {
            const PackedPiece& p = f.packed[t][j];
            r.conditions += p.tnum.terms().size() + p.tden.terms().size();
            r.unknowns += term_capacity(2 * p.sources.size(), p.tnum.degree(), clamp) / 2 +
                          term_capacity(2 * p.sources.size(), p.tden.degree(), clamp) / 2 +
                          2 * (f.nvars + 1);
        }
    return r;
}

}  // namespace trimap
