#pragma once

// Throwing assertion helpers shared by the spec-example registry and the
// acceptance binary, so the same checks run under doctest and standalone.

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace riskgraph::testing {

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }

inline void expect_true(bool ok, const std::string& what) {
    if (!ok) fail(what);
}

template <class A, class B>
void expect_eq(const A& a, const B& b, const std::string& what) {
    if (!(a == b)) {
        std::ostringstream os;
        os << what << ": got " << a << ", expected " << b;
        fail(os.str());
    }
}

inline void expect_near(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol)) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": got " << actual << ", expected " << expected << " (tol " << tol << ")";
        fail(os.str());
    }
}

/// Six significant figures: |a-e| within half a unit in the sixth
/// significant digit of the expected value; absolute 1e-9 when expected
/// is zero.
inline void expect_sig6(double actual, double expected, const std::string& what) {
    if (expected == 0.0) {
        expect_near(actual, expected, 1e-9, what);
        return;
    }
    const double mag = std::floor(std::log10(std::abs(expected)));
    expect_near(actual, expected, 0.5 * std::pow(10.0, mag - 5.0), what);
}

}  // namespace riskgraph::testing
