#include <doctest.h>

#include "spec_examples.hpp"

using riskgraph::testing::spec_examples;

TEST_SUITE("spec_examples") {

TEST_CASE("every documented example value holds") {
    std::size_t ran = 0;
    for (const auto& ex : spec_examples()) {
        try {
            ex.run();
        } catch (const std::exception& e) {
            FAIL_CHECK(ex.id << ": " << e.what());
        }
        ++ran;
    }
    CHECK(ran == spec_examples().size());
}

TEST_CASE("registry is complete") {
    // One entry per tagged example in the contract docs.
    CHECK(spec_examples().size() == 131);
}

}
