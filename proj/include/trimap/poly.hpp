#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "trimap/field.hpp"
#include "trimap/rng.hpp"

namespace trimap {

using Monomial = std::vector<std::uint8_t>;

struct GradedLex {
    bool operator()(const Monomial& a, const Monomial& b) const {
        unsigned da = std::accumulate(a.begin(), a.end(), 0u);
        unsigned db = std::accumulate(b.begin(), b.end(), 0u);
        if (da != db) return da < db;
        return a < b;
    }
};

// Sparse multivariate polynomial over K.  Terms are kept in a canonical
// graded-lex order so that serialization is deterministic.
class MultiPoly {
  public:
    MultiPoly() : nvars_(0) {}
    MultiPoly(FieldPtr K, std::size_t nvars) : K_(std::move(K)), nvars_(nvars) {}

    static MultiPoly constant(FieldPtr K, std::size_t nvars, const FieldElement& c) {
        MultiPoly p(std::move(K), nvars);
        p.add_term(Monomial(nvars, 0), c);
        return p;
    }

    static MultiPoly variable(FieldPtr K, std::size_t nvars, std::size_t i) {
        MultiPoly p(K, nvars);
        Monomial m(nvars, 0);
        m.at(i) = 1;
        p.add_term(m, K->one());
        return p;
    }

    const FieldPtr& field() const { return K_; }
    std::size_t nvars() const { return nvars_; }
    const std::map<Monomial, FieldElement, GradedLex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    unsigned degree() const {
        unsigned d = 0;
        for (const auto& [m, c] : terms_)
            d = std::max(d, (unsigned)std::accumulate(m.begin(), m.end(), 0u));
        return d;
    }

    void add_term(const Monomial& m, const FieldElement& c) {
        if (m.size() != nvars_) throw ContractViolation("monomial arity mismatch");
        if (c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    MultiPoly operator+(const MultiPoly& o) const {
        check_compat_(o);
        MultiPoly r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }

    MultiPoly operator-(const MultiPoly& o) const {
        check_compat_(o);
        MultiPoly r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
        return r;
    }

    MultiPoly operator-() const {
        MultiPoly r(K_, nvars_);
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
        return r;
    }

    MultiPoly operator*(const MultiPoly& o) const {
        check_compat_(o);
        MultiPoly r(K_, nvars_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) {
                Monomial m(nvars_);
                for (std::size_t i = 0; i < nvars_; ++i) {
                    unsigned e = (unsigned)ma[i] + mb[i];
                    if (e > 255) throw ContractViolation("exponent overflow");
                    m[i] = (std::uint8_t)e;
                }
                r.add_term(m, ca * cb);
            }
        return r;
    }

    MultiPoly scale(const FieldElement& c) const {
        MultiPoly r(K_, nvars_);
        if (c.is_zero()) return r;
        for (const auto& [m, co] : terms_) r.terms_.emplace(m, co * c);
        return r;
    }

    MultiPoly& operator+=(const MultiPoly& o) { return *this = *this + o; }
    MultiPoly& operator-=(const MultiPoly& o) { return *this = *this - o; }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }
    bool operator==(const MultiPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const MultiPoly& o) const { return !(*this == o); }

    FieldElement evaluate(const std::vector<FieldElement>& pt) const {
        if (pt.size() != nvars_) throw ContractViolation("evaluation arity mismatch");
        // powers of each coordinate up to the needed exponent
        std::vector<std::vector<FieldElement>> pows(nvars_);
        for (std::size_t i = 0; i < nvars_; ++i) pows[i].push_back(K_->one());
        FieldElement acc = K_->zero();
        for (const auto& [m, c] : terms_) {
            FieldElement v = c;
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (!m[i]) continue;
                auto& pw = pows[i];
                while (pw.size() <= m[i]) pw.push_back(pw.back() * pt[i]);
                v *= pw[m[i]];
            }
            acc += v;
        }
        return acc;
    }

    // Substitute variable i by inner[i].  All inner polynomials must share an
    // arity, which becomes the arity of the result.
    MultiPoly compose(const std::vector<MultiPoly>& inner) const {
        if (inner.size() != nvars_) throw ContractViolation("compose arity mismatch");
        std::size_t nv = inner.empty() ? 0 : inner[0].nvars();
        for (const auto& g : inner)
            if (g.nvars() != nv) throw ContractViolation("inner arity mismatch");
        std::vector<std::vector<MultiPoly>> pows(nvars_);
        for (std::size_t i = 0; i < nvars_; ++i)
            pows[i].push_back(constant(K_, nv, K_->one()));
        MultiPoly acc(K_, nv);
        for (const auto& [m, c] : terms_) {
            MultiPoly t = constant(K_, nv, c);
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (!m[i]) continue;
                auto& pw = pows[i];
                while (pw.size() <= m[i]) pw.push_back(pw.back() * inner[i]);
                t *= pw[m[i]];
            }
            acc += t;
        }
        return acc;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << K_->to_string(c) << " * " << mono_string(m);
        }
        return os.str();
    }

    static std::string mono_string(const Monomial& m) {
        std::ostringstream os;
        bool any = false;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (!m[i]) continue;
            if (any) os << ' ';
            any = true;
            os << 'x' << (i + 1);
            if (m[i] > 1) os << '^' << (unsigned)m[i];
        }
        return any ? os.str() : "1";
    }

    static MultiPoly parse(const FieldPtr& K, std::size_t nvars, const std::string& s) {
        MultiPoly p(K, nvars);
        if (s == "0") return p;
        std::size_t pos = 0;
        while (pos < s.size()) {
            std::size_t next = s.find(" + ", pos);
            std::string term = s.substr(pos, next == std::string::npos ? next : next - pos);
            pos = next == std::string::npos ? s.size() : next + 3;
            std::size_t star = term.find(" * ");
            if (star == std::string::npos) throw ParseError("polynomial term without ' * '");
            FieldElement c = K->parse(term.substr(0, star));
            Monomial m = parse_mono(nvars, term.substr(star + 3));
            p.add_term(m, c);
        }
        return p;
    }

    static Monomial parse_mono(std::size_t nvars, const std::string& s) {
        Monomial m(nvars, 0);
        if (s == "1") return m;
        std::istringstream is(s);
        std::string tok;
        while (is >> tok) {
            if (tok[0] != 'x') throw ParseError("bad monomial factor: " + tok);
            std::size_t caret = tok.find('^');
            unsigned idx = std::stoul(tok.substr(1, caret == std::string::npos
                                                        ? caret
                                                        : caret - 1));
            unsigned e = caret == std::string::npos ? 1 : std::stoul(tok.substr(caret + 1));
            if (idx < 1 || idx > nvars || e == 0 || e > 255)
                throw ParseError("bad monomial factor: " + tok);
            m[idx - 1] = (std::uint8_t)(m[idx - 1] + e);
        }
        return m;
    }

  private:
    void check_compat_(const MultiPoly& o) const {
        if (nvars_ != o.nvars_ || K_.get() != o.K_.get())
            throw ContractViolation("polynomial ring mismatch");
    }

    FieldPtr K_;
    std::size_t nvars_;
    std::map<Monomial, FieldElement, GradedLex> terms_;
};

// Quotient of polynomials.  Never reduced to lowest terms: published pieces
// are deliberately un-normalized.
struct RationalFn {
    MultiPoly num, den;

    RationalFn() = default;
    RationalFn(MultiPoly n, MultiPoly d) : num(std::move(n)), den(std::move(d)) {
        if (den.is_zero()) throw ContractViolation("zero denominator polynomial");
    }

    static RationalFn from_poly(MultiPoly p) {
        MultiPoly one = MultiPoly::constant(p.field(), p.nvars(), p.field()->one());
        return RationalFn(std::move(p), std::move(one));
    }

    FieldElement evaluate(const std::vector<FieldElement>& pt) const {
        FieldElement d = den.evaluate(pt);
        if (d.is_zero()) throw DenominatorZero("rational function pole");
        return num.evaluate(pt) / d;
    }

    RationalFn operator+(const RationalFn& o) const {
        return RationalFn(num * o.den + o.num * den, den * o.den);
    }
    RationalFn operator-(const RationalFn& o) const {
        return RationalFn(num * o.den - o.num * den, den * o.den);
    }
    RationalFn operator*(const RationalFn& o) const {
        return RationalFn(num * o.num, den * o.den);
    }
    RationalFn operator/(const RationalFn& o) const {
        if (o.num.is_zero()) throw DenominatorZero("division by zero function");
        return RationalFn(num * o.den, den * o.num);
    }
    unsigned degree() const { return std::max(num.degree(), den.degree()); }
};

// Substitute rational functions into a polynomial: the result is a single
// quotient over the product of per-variable denominator powers.
inline RationalFn compose_rational(const MultiPoly& outer, const std::vector<RationalFn>& inner) {
    if (inner.size() != outer.nvars()) throw ContractViolation("compose arity mismatch");
    const FieldPtr& K = outer.field();
    std::size_t nv = inner.empty() ? 0 : inner[0].num.nvars();

    // shared-denominator fast path: homogenize by total degree, which keeps
    // the result degree linear in the outer degree instead of summing the
    // per-variable clearing factors
    bool shared = !inner.empty();
    for (std::size_t i = 1; i < inner.size() && shared; ++i)
        if (!(inner[i].den.terms() == inner[0].den.terms())) shared = false;
    if (shared) {
        unsigned T = 0;
        for (const auto& [m, c] : outer.terms()) {
            unsigned t = 0;
            for (std::size_t i = 0; i < outer.nvars(); ++i) t += m[i];
            T = std::max(T, t);
        }
        std::vector<MultiPoly> dp = {MultiPoly::constant(K, nv, K->one())};
        for (unsigned e = 1; e <= T; ++e) dp.push_back(dp.back() * inner[0].den);
        std::vector<std::vector<MultiPoly>> np(outer.nvars());
        for (std::size_t i = 0; i < outer.nvars(); ++i)
            np[i].push_back(MultiPoly::constant(K, nv, K->one()));
        MultiPoly acc(K, nv);
        for (const auto& [m, c] : outer.terms()) {
            MultiPoly t = MultiPoly::constant(K, nv, c);
            unsigned used = 0;
            for (std::size_t i = 0; i < outer.nvars(); ++i) {
                while (np[i].size() <= m[i]) np[i].push_back(np[i].back() * inner[i].num);
                t *= np[i][m[i]];
                used += m[i];
            }
            t *= dp[T - used];
            acc += t;
        }
        return RationalFn(std::move(acc), MultiPoly(dp[T]));
    }

    std::vector<unsigned> maxdeg(outer.nvars(), 0);
    for (const auto& [m, c] : outer.terms())
        for (std::size_t i = 0; i < outer.nvars(); ++i)
            maxdeg[i] = std::max(maxdeg[i], (unsigned)m[i]);

    std::vector<std::vector<MultiPoly>> npows(outer.nvars()), dpows(outer.nvars());
    for (std::size_t i = 0; i < outer.nvars(); ++i) {
        npows[i].push_back(MultiPoly::constant(K, nv, K->one()));
        dpows[i].push_back(MultiPoly::constant(K, nv, K->one()));
        for (unsigned e = 1; e <= maxdeg[i]; ++e) {
            npows[i].push_back(npows[i].back() * inner[i].num);
            dpows[i].push_back(dpows[i].back() * inner[i].den);
        }
    }
    MultiPoly acc(K, nv);
    for (const auto& [m, c] : outer.terms()) {
        MultiPoly t = MultiPoly::constant(K, nv, c);
        for (std::size_t i = 0; i < outer.nvars(); ++i) {
            t *= npows[i][m[i]];
            t *= dpows[i][maxdeg[i] - m[i]];
        }
        acc += t;
    }
    MultiPoly den = MultiPoly::constant(K, nv, K->one());
    for (std::size_t i = 0; i < outer.nvars(); ++i) den *= dpows[i][maxdeg[i]];
    return RationalFn(std::move(acc), std::move(den));
}

namespace detail {
inline void monomials_rec(std::size_t nvars, unsigned budget, std::size_t i, Monomial& cur,
                          std::vector<Monomial>& out) {
    if (i == nvars) {
        out.push_back(cur);
        return;
    }
    for (unsigned e = 0; e <= budget; ++e) {
        cur[i] = (std::uint8_t)e;
        monomials_rec(nvars, budget - e, i + 1, cur, out);
    }
    cur[i] = 0;
}
}  // namespace detail

inline std::vector<Monomial> monomials_up_to(std::size_t nvars, unsigned deg) {
    std::vector<Monomial> out;
    Monomial cur(nvars, 0);
    detail::monomials_rec(nvars, deg, 0, cur, out);
    std::sort(out.begin(), out.end(), GradedLex());
    return out;
}

// The generators vanish identically on the blinding space; adding multiples
// of them to a published polynomial changes nothing there.
struct AmbivalenceIdeal {
    std::vector<MultiPoly> generators;

    // Certificate of one coset draw: the multipliers actually used, so tests
    // can confirm membership structurally instead of deciding it.
    struct Certificate {
        std::vector<MultiPoly> multipliers;  // one per generator
    };

    // Draw h' = h + sum_s t_s (F_{i_s,2}-F_{i_s,3}) with monomial multipliers
    // of degree at most dmax-2.  Each generator gets `sparsity` random
    // monomials with random nonzero coefficients.
    MultiPoly coset_sample(const MultiPoly& h, unsigned dmax, Rng& rng,
                           Certificate* cert = nullptr, unsigned sparsity = 3) const {
        if (dmax < 2) throw ContractViolation("coset degree bound below 2");
        MultiPoly out = h;
        if (cert) cert->multipliers.clear();
        if (generators.empty()) return out;
        const FieldPtr& K = h.field();
        std::vector<Monomial> monos = monomials_up_to(h.nvars(), dmax - 2);
        for (const MultiPoly& g : generators) {
            MultiPoly t(K, h.nvars());
            for (unsigned s = 0; s < sparsity; ++s)
                t.add_term(monos[rng.below(monos.size())], K->sample_nonzero(rng));
            out += t * g;
            if (cert) cert->multipliers.push_back(t);
        }
        return out;
    }
};

// x^q = x on base-field values, so exponents fold down to the range [1, q-1].
inline unsigned j_reduce_exp(unsigned e, u64 q) {
    if (e == 0) return 0;
    return (unsigned)((e - 1) % (q - 1)) + 1;
}

inline MultiPoly reduce_mod_J(const MultiPoly& p, u64 q) {
    MultiPoly r(p.field(), p.nvars());
    for (const auto& [m, c] : p.terms()) {
        Monomial rm(m.size());
        for (std::size_t i = 0; i < m.size(); ++i)
            rm[i] = (std::uint8_t)j_reduce_exp(m[i], q);
        r.add_term(rm, c);
    }
    return r;
}

// Descent of F(x_1^{q^{a_1}}, ..., x_m^{q^{a_m}}) to base-field coordinates:
// substitute x_i -> sum_j x_{ij} theta_j^{q^{a_i}}, Frobenius the coefficients
// of F by the common twist applied after F (twist_out), and reduce mod J.
// Variables are blocked as x_{11..1d}, x_{21..2d}, ...
inline MultiPoly descent_reduce(const MultiPoly& F, const std::vector<u64>& twists,
                                u64 twist_out = 0) {
    const FieldPtr& K = F.field();
    if (twists.size() != F.nvars()) throw ContractViolation("twist arity mismatch");
    std::size_t d = K->d();
    std::size_t nv = F.nvars() * d;
    std::vector<MultiPoly> subs;
    subs.reserve(F.nvars());
    for (std::size_t i = 0; i < F.nvars(); ++i) {
        MultiPoly li(K, nv);
        for (std::size_t j = 0; j < d; ++j) {
            Monomial m(nv, 0);
            m[i * d + j] = 1;
            FieldElement tj = K->theta().pow(j);
            li.add_term(m, K->frobenius(tj, twists[i] + twist_out));
        }
        subs.push_back(std::move(li));
    }
    MultiPoly twisted(K, F.nvars());
    for (const auto& [m, c] : F.terms()) twisted.add_term(m, K->frobenius(c, twist_out));
    return reduce_mod_J(twisted.compose(subs), K->q());
}

// Base-field coordinates of a K-point, blocked per variable.
inline std::vector<FieldElement> descend_point(const FieldPtr& K,
                                               const std::vector<FieldElement>& pt) {
    std::vector<FieldElement> out;
    out.reserve(pt.size() * K->d());
    for (const auto& a : pt)
        for (u64 v : K->descend(a)) out.push_back(K->from_uint(v));
    return out;
}

}  // namespace trimap
