#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace trimap {

// Base for every error the library raises on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A rational function was evaluated at a pole of its fixed published form.
struct PoleHit : Error {
    explicit PoleHit(const std::string& what) : Error(what) {}
};

// A published denominator (telescoping form, local table) vanished at the
// evaluation point.  Often recoverable by switching to a redundant copy.
struct DenominatorZero : PoleHit {
    explicit DenominatorZero(const std::string& what) : PoleHit(what) {}
};

// An intermediate blinded point left the representable domain, e.g. a
// component-wise identity that the coordinate form cannot carry.
struct ExceptionalPoint : Error {
    explicit ExceptionalPoint(const std::string& what) : Error(what) {}
};

// Pairing arguments were dependent or degenerate where independence is needed.
struct DegeneratePair : Error {
    explicit DegeneratePair(const std::string& what) : Error(what) {}
};

// An internal invariant that callers cannot trip by bad data alone.
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& what) : Error(what) {}
};

// A linear system had no solution where one was required.
struct SolveFailure : Error {
    explicit SolveFailure(const std::string& what) : Error(what) {}
};

// Randomized generators failed to span the required space within budget.
struct SpanFailure : Error {
    explicit SpanFailure(const std::string& what) : Error(what) {}
};

// Parameter search ran out of candidates.
struct SearchExhausted : Error {
    explicit SearchExhausted(const std::string& what) : Error(what) {}
};

// Malformed serialized input.
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

// How many times randomized procedures (re-encoding, auxiliary-point pairing
// evaluation, redundant-copy retries) restart before giving up.
inline int retry_budget() {
    if (const char* s = std::getenv("TRIMAP_RETRY_BUDGET")) {
        int v = std::atoi(s);
        if (v > 0) return v;
    }
    return 16;
}

}  // namespace trimap
