#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "eecl/replay.hpp"

using eecl::ReplayBuffer;
using eecl::Rng;
using eecl::Transition;

namespace {

Transition tagged(double tag) {
    return Transition{{tag}, {tag}, tag, {tag}, false};
}

}  // namespace

TEST_CASE("ring buffer overwrites oldest entries once full", "[replay]") {
    ReplayBuffer buf(3);
    REQUIRE(buf.capacity() == 3);
    for (int i = 0; i < 5; ++i) buf.add(tagged(i));
    REQUIRE(buf.size() == 3);
    // slots: 0 and 1 overwritten by 3 and 4, slot 2 still holds 2
    REQUIRE(buf[0].reward == 3.0);
    REQUIRE(buf[1].reward == 4.0);
    REQUIRE(buf[2].reward == 2.0);
    REQUIRE(buf.cursor() == 2);
}

TEST_CASE("empty or zero-capacity buffers are rejected", "[replay]") {
    REQUIRE_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
    ReplayBuffer buf(4);
    Rng rng(0);
    REQUIRE_THROWS_AS(buf.sample(rng), std::logic_error);
}

TEST_CASE("sampling is uniform over the current contents", "[replay]") {
    ReplayBuffer buf(100);
    for (int i = 0; i < 100; ++i) buf.add(tagged(i));
    Rng rng(12345);
    std::vector<int> histogram(100, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++histogram[static_cast<int>(buf.sample(rng).reward)];

    // chi-square uniformity test, dof = 99: reject only at p < 0.001
    const double expected = draws / 100.0;
    double chi2 = 0.0;
    for (int count : histogram) {
        const double d = count - expected;
        chi2 += d * d / expected;
    }
    REQUIRE(chi2 < 148.23035916510173);  // chi2 ppf(0.999, dof=99)
}

TEST_CASE("sampling with replacement can repeat entries", "[replay]") {
    ReplayBuffer buf(2);
    buf.add(tagged(0));
    buf.add(tagged(1));
    Rng rng(7);
    bool seen[2] = {false, false};
    for (int i = 0; i < 64; ++i) seen[static_cast<int>(buf.sample(rng).reward)] = true;
    REQUIRE(seen[0]);
    REQUIRE(seen[1]);
}
