#pragma once

#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "trimap/err.hpp"
#include "trimap/rng.hpp"

namespace trimap {

using u64 = std::uint64_t;

inline u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m);
}

inline u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

class Field;
using FieldPtr = std::shared_ptr<const Field>;

// Element of K = F_{q^d}, stored as coordinates in the power basis
// 1, theta, ..., theta^{d-1} of the published generator theta.
class FieldElement {
  public:
    FieldElement() : f_(nullptr) {}
    FieldElement(const Field* f, std::vector<u64> c) : f_(f), c_(std::move(c)) {}

    const Field* field() const { return f_; }
    const std::vector<u64>& coords() const { return c_; }

    bool is_zero() const {
        for (u64 v : c_)
            if (v) return false;
        return true;
    }

    bool operator==(const FieldElement& o) const { return f_ == o.f_ && c_ == o.c_; }
    bool operator!=(const FieldElement& o) const { return !(*this == o); }
    bool operator<(const FieldElement& o) const { return c_ < o.c_; }

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement inv() const;
    FieldElement operator/(const FieldElement& o) const { return *this * o.inv(); }
    FieldElement pow(u64 e) const;

    FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
    FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
    FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

  private:
    const Field* f_;
    std::vector<u64> c_;
};

// F_{q^d} with an explicit irreducible modulus over F_q.  Fields are shared
// immutable objects; elements keep a raw pointer and must not outlive it.
class Field {
  public:
    // modulus holds the coefficients of a monic irreducible of degree d,
    // constant term first, leading 1 omitted.
    static FieldPtr make(u64 q, u64 d, const std::vector<u64>& modulus) {
        auto f = FieldPtr(new Field(q, d, modulus));
        if (!f->irreducible_(modulus)) throw ContractViolation("field modulus is reducible");
        return f;
    }

    static FieldPtr make(u64 q, u64 d, Rng& rng) {
        check_params_(q, d);
        if (d == 1) return FieldPtr(new Field(q, 1, {}));
        for (int tries = 0; tries < 4096; ++tries) {
            std::vector<u64> m(d);
            for (u64& v : m) v = rng.below(q);
            if (m[0] == 0) m[0] = 1 + rng.below(q - 1);
            auto probe = FieldPtr(new Field(q, d, m));
            if (probe->irreducible_(m)) return probe;
        }
        throw SearchExhausted("no irreducible modulus found");
    }

    u64 q() const { return q_; }
    u64 d() const { return d_; }
    u64 size() const { return size_; }
    const std::vector<u64>& modulus() const { return mod_; }

    FieldElement zero() const { return FieldElement(this, std::vector<u64>(d_, 0)); }
    FieldElement one() const { return from_uint(1); }

    FieldElement from_uint(u64 v) const {
        std::vector<u64> c(d_, 0);
        c[0] = v % q_;
        return FieldElement(this, c);
    }

    FieldElement theta() const {
        std::vector<u64> c(d_, 0);
        if (d_ == 1)
            c[0] = 1;
        else
            c[1] = 1;
        return FieldElement(this, c);
    }

    FieldElement element(std::vector<u64> coords) const {
        if (coords.size() != d_) throw ContractViolation("coordinate count mismatch");
        for (u64& v : coords) v %= q_;
        return FieldElement(this, std::move(coords));
    }

    // Enumeration order: idx written base q, digit i giving coordinate i.
    FieldElement element_at(u64 idx) const {
        std::vector<u64> c(d_);
        for (u64 i = 0; i < d_; ++i) {
            c[i] = idx % q_;
            idx /= q_;
        }
        return FieldElement(this, std::move(c));
    }

    u64 index_of(const FieldElement& a) const {
        u64 idx = 0;
        for (u64 i = d_; i-- > 0;) idx = idx * q_ + a.coords()[i];
        return idx;
    }

    FieldElement sample(Rng& rng) const {
        std::vector<u64> c(d_);
        for (u64& v : c) v = rng.below(q_);
        return FieldElement(this, c);
    }

    FieldElement sample_nonzero(Rng& rng) const {
        for (;;) {
            FieldElement e = sample(rng);
            if (!e.is_zero()) return e;
        }
    }

    // Coordinates of a w.r.t. the published basis; the inverse direction
    // reassembles an element from F_q coordinates.
    std::vector<u64> descend(const FieldElement& a) const { return a.coords(); }
    FieldElement recompose(const std::vector<u64>& coords) const {
        return element(std::vector<u64>(coords));
    }

    // a^(q^k), computed through the precomputed matrix of x -> x^q.
    FieldElement frobenius(const FieldElement& a, u64 k) const {
        std::vector<u64> c = a.coords();
        for (u64 step = 0; step < k % d_; ++step) {
            std::vector<u64> nc(d_, 0);
            for (u64 j = 0; j < d_; ++j) {
                if (!c[j]) continue;
                for (u64 i = 0; i < d_; ++i)
                    nc[i] = (nc[i] + mulmod(frob_[j][i], c[j], q_)) % q_;
            }
            c = std::move(nc);
        }
        return FieldElement(this, c);
    }

    std::string to_string(const FieldElement& a) const {
        std::ostringstream os;
        for (u64 i = 0; i < d_; ++i) {
            if (i) os << ' ';
            os << a.coords()[i];
        }
        return os.str();
    }

    FieldElement parse(const std::string& s) const {
        std::istringstream is(s);
        std::vector<u64> c(d_, 0);
        for (u64 i = 0; i < d_; ++i)
            if (!(is >> c[i])) throw ParseError("field element: expected " +
                                                std::to_string(d_) + " coordinates");
        std::string rest;
        if (is >> rest) throw ParseError("field element: trailing data");
        return element(std::move(c));
    }

    // --- arithmetic kernels used by FieldElement ---

    std::vector<u64> add_(const std::vector<u64>& a, const std::vector<u64>& b) const {
        std::vector<u64> r(d_);
        for (u64 i = 0; i < d_; ++i) r[i] = (a[i] + b[i]) % q_;
        return r;
    }

    std::vector<u64> sub_(const std::vector<u64>& a, const std::vector<u64>& b) const {
        std::vector<u64> r(d_);
        for (u64 i = 0; i < d_; ++i) r[i] = (a[i] + q_ - b[i]) % q_;
        return r;
    }

    std::vector<u64> mul_(const std::vector<u64>& a, const std::vector<u64>& b) const {
        std::vector<u64> prod(2 * d_ - 1, 0);
        for (u64 i = 0; i < d_; ++i) {
            if (!a[i]) continue;
            for (u64 j = 0; j < d_; ++j)
                prod[i + j] = (prod[i + j] + mulmod(a[i], b[j], q_)) % q_;
        }
        reduce_(prod);
        prod.resize(d_);
        return prod;
    }

  private:
    Field(u64 q, u64 d, std::vector<u64> modulus) : q_(q), d_(d), mod_(std::move(modulus)) {
        check_params_(q, d);
        if (d_ == 1)
            mod_.clear();
        else if (mod_.size() != d_)
            throw ContractViolation("modulus degree mismatch");
        size_ = 1;
        for (u64 i = 0; i < d_; ++i) size_ *= q_;
        build_frobenius_();
    }

    static void check_params_(u64 q, u64 d) {
        if (!is_prime_u64(q)) throw ContractViolation("field characteristic must be prime");
        if (d < 1 || d > 16) throw ContractViolation("extension degree out of range");
        unsigned __int128 s = 1;
        for (u64 i = 0; i < d; ++i) s *= q;
        if (s > (static_cast<unsigned __int128>(1) << 62))
            throw ContractViolation("field too large");
    }

    // Reduce a coefficient vector (length up to 2d-1) modulo the monic modulus.
    void reduce_(std::vector<u64>& p) const {
        if (d_ == 1) {
            p.assign(1, p.empty() ? 0 : p[0] % q_);
            return;
        }
        for (std::size_t i = p.size(); i-- > d_;) {
            u64 c = p[i];
            if (!c) continue;
            p[i] = 0;
            for (u64 j = 0; j < d_; ++j)
                p[i - d_ + j] = (p[i - d_ + j] + mulmod(q_ - mod_[j] % q_, c, q_)) % q_;
        }
        p.resize(d_);
    }

    void build_frobenius_() {
        frob_.assign(d_, std::vector<u64>(d_, 0));
        // image of theta under x -> x^q, then powers of it for the other rows
        std::vector<u64> th(d_, 0);
        if (d_ == 1) {
            frob_[0][0] = 1;
            return;
        }
        th[1] = 1;
        std::vector<u64> thq = pow_vec_(th, q_);
        std::vector<u64> acc(d_, 0);
        acc[0] = 1;
        for (u64 j = 0; j < d_; ++j) {
            frob_[j] = acc;
            acc = mul_(acc, thq);
        }
    }

    std::vector<u64> pow_vec_(std::vector<u64> base, u64 e) const {
        std::vector<u64> r(d_, 0);
        r[0] = 1;
        while (e) {
            if (e & 1) r = mul_(r, base);
            base = mul_(base, base);
            e >>= 1;
        }
        return r;
    }

    bool irreducible_(const std::vector<u64>& m) const {
        if (d_ == 1) return true;
        (void)m;
        // Rabin test in the quotient ring: x^(q^(d/p)) must differ from x for
        // every prime p | d, and x^(q^d) must equal x.
        std::vector<u64> x(d_, 0);
        x[1] = 1;
        std::vector<u64> g = x;
        u64 rem = d_;
        std::vector<u64> prime_divs;
        for (u64 p = 2; p * p <= rem; ++p)
            if (rem % p == 0) {
                prime_divs.push_back(p);
                while (rem % p == 0) rem /= p;
            }
        if (rem > 1) prime_divs.push_back(rem);

        std::vector<std::vector<u64>> qpow(d_ + 1);
        qpow[0] = x;
        for (u64 k = 1; k <= d_; ++k) qpow[k] = pow_vec_(qpow[k - 1], q_);
        for (u64 p : prime_divs)
            if (qpow[d_ / p] == x) return false;
        return qpow[d_] == x;
    }

    u64 q_, d_, size_ = 0;
    std::vector<u64> mod_;
    std::vector<std::vector<u64>> frob_;
};

inline void require_same_field(const FieldElement& a, const FieldElement& b) {
    if (a.field() != b.field() || a.field() == nullptr)
        throw ContractViolation("elements from different fields");
}

inline FieldElement FieldElement::operator+(const FieldElement& o) const {
    require_same_field(*this, o);
    return FieldElement(f_, f_->add_(c_, o.c_));
}

inline FieldElement FieldElement::operator-(const FieldElement& o) const {
    require_same_field(*this, o);
    return FieldElement(f_, f_->sub_(c_, o.c_));
}

inline FieldElement FieldElement::operator-() const {
    return FieldElement(f_, f_->sub_(std::vector<u64>(f_->d(), 0), c_));
}

inline FieldElement FieldElement::operator*(const FieldElement& o) const {
    require_same_field(*this, o);
    return FieldElement(f_, f_->mul_(c_, o.c_));
}

inline FieldElement FieldElement::pow(u64 e) const {
    FieldElement r = f_->one();
    FieldElement b = *this;
    while (e) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    return r;
}

inline FieldElement FieldElement::inv() const {
    if (is_zero()) throw DenominatorZero("inverse of zero");
    return pow(f_->size() - 2);
}

}  // namespace trimap
