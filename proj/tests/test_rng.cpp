// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"

using brwre::RandomStream;

TEST_CASE("stream is a pure function of its seed")
{
    RandomStream a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i)
    {
        auto const x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
}

TEST_CASE("children do not depend on parent position")
{
    RandomStream parent(7);
    auto const before = parent.split(3);
    for (int i = 0; i < 10; ++i)
        (void)parent();
    auto after = parent.split(3);
    auto b = before;
    for (int i = 0; i < 10; ++i)
        CHECK(b() == after());
}

TEST_CASE("sibling and nested streams are distinct")
{
    RandomStream root(1);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 1000; ++i)
    {
        firsts.insert(root.split(i)());
        firsts.insert(root.split(i).split(0)());
    }
    CHECK(firsts.size() == 2000);
}

TEST_CASE("uniform moments")
{
    RandomStream rng(99);
    constexpr int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i)
    {
        double const u = rng.uniform();
        REQUIRE(u >= 0);
        REQUIRE(u < 1);
        sum += u;
        sq += u * u;
    }
    double const mean = sum / n;
    CHECK(std::abs(mean - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sq / n - mean * mean - 1.0 / 12) < 2e-3);
}

TEST_CASE("executor fills per-index slots identically for any thread count")
{
    auto run = [](unsigned threads) {
        std::vector<std::uint64_t> out(1000);
        brwre::Executor(threads).parallel_for(out.size(), [&](std::size_t i) {
            auto s = RandomStream(5).split(i);
            out[i] = s() ^ s();
        });
        return out;
    };
    CHECK(run(1) == run(8));
    CHECK(run(1) == run(3));
}

TEST_CASE("executor propagates worker exceptions")
{
    brwre::Executor pool(4);
    CHECK_THROWS_AS(pool.parallel_for(100,
                                      [](std::size_t i) {
                                          if (i == 57)
                                              throw std::runtime_error("boom");
                                      }),
                    std::runtime_error);
}
