#include <set>

#include "doctest.h"

#include "coop/params.hpp"
#include "coop/percolation.hpp"

using namespace coop;

namespace {

PercolationField field(int dim, int w, int n, double eps, std::uint64_t seed,
                       std::vector<std::vector<int>> sources = {}) {
  PercolationSpec s;
  s.dim = dim;
  s.width = w;
  s.levels = n;
  s.epsilon = eps;
  s.seed = seed;
  s.sources = std::move(sources);
  return percolate(s);
}

bool valid(int z, int n) { return ((z + n) % 2 + 2) % 2 == 0; }

}  // namespace

TEST_SUITE("percolation") {

TEST_CASE("all open from one source fills the parity cone") {
  const PercolationField f = field(1, 20, 15, 0.0, 1, {{0}});
  for (int n = 0; n <= 15; ++n) {
    CHECK(f.wet_count(n) == static_cast<std::size_t>(n + 1));
    for (const auto& z : f.wet_set(n)) CHECK(std::abs(z[0]) <= n);
  }
  const PercolationField g = field(2, 6, 4, 0.0, 1, {{0, 0}});
  CHECK(g.wet_count(2) == 9);  // (n + 1)^d points of the cone in d = 2
}

TEST_CASE("all closed leaves nothing wet") {
  const PercolationField f = field(1, 10, 10, 1.0, 2);
  for (int n = 0; n <= 10; ++n) CHECK(f.wet_count(n) == 0);
  for (int z = -10; z <= 10; ++z)
    if (valid(z, 7)) CHECK(f.dry_path_exists({z}, 7, PercolationGraph::G));
}

TEST_CASE("no dry paths when everything is open") {
  const PercolationField f = field(1, 10, 10, 0.0, 2);
  for (int z = -10; z <= 10; ++z)
    if (valid(z, 6)) CHECK_FALSE(f.dry_path_exists({z}, 6, PercolationGraph::H));
}

TEST_CASE("wetness matches a direct recursion") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PercolationField f = field(1, 12, 12, 0.3, seed);
    std::set<int> wet;
    for (int z = -12; z <= 12; ++z)
      if (valid(z, 0) && f.open({z}, 0)) wet.insert(z);
    for (int n = 1; n <= 12; ++n) {
      std::set<int> next;
      for (int z = -12; z <= 12; ++z)
        if (valid(z, n) && f.open({z}, n) && (wet.count(z - 1) || wet.count(z + 1))) next.insert(z);
      wet = next;
      for (int z = -12; z <= 12; ++z)
        if (valid(z, n)) CHECK(f.wet({z}, n) == (wet.count(z) > 0));
    }
  }
}

TEST_CASE("dry paths match a direct recursion") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PercolationField f = field(1, 8, 10, 0.4, seed);
    auto dry = [&](int z, int n) { return !f.wet({z}, n); };
    std::set<int> g;
    for (int z = -8; z <= 8; ++z)
      if (valid(z, 0) && dry(z, 0)) g.insert(z);
    for (int n = 1; n <= 10; ++n) {
      std::set<int> next;
      for (int z = -8; z <= 8; ++z)
        if (valid(z, n) && dry(z, n) && (g.count(z - 1) || g.count(z + 1))) next.insert(z);
      g = next;
      for (int z = -8; z <= 8; ++z)
        if (valid(z, n)) CHECK(f.dry_path_exists({z}, n, PercolationGraph::G) == (g.count(z) > 0));
    }
  }
}

TEST_CASE("coupled fields are monotone in epsilon") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PercolationField lo = field(1, 30, 30, 0.1, seed), hi = field(1, 30, 30, 0.3, seed);
    for (int n = 0; n <= 30; ++n)
      for (int z = -30; z <= 30; ++z)
        if (valid(z, n) && hi.wet({z}, n)) CHECK(lo.wet({z}, n));
  }
}

TEST_CASE("a dry path in G is a dry path in H") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PercolationField f = field(2, 6, 8, 0.3, seed);
    for (int n = 0; n <= 8; ++n) {
      const auto g = f.dry_reachable(n, PercolationGraph::G), h = f.dry_reachable(n, PercolationGraph::H);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i]) CHECK(h[i]);
    }
  }
}

TEST_CASE("horizontal edges can only help") {
  std::size_t strictly_more = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const PercolationField f = field(1, 10, 6, 0.5, seed);
    for (int n = 0; n <= 6; ++n) {
      const auto g = f.dry_reachable(n, PercolationGraph::G), h = f.dry_reachable(n, PercolationGraph::H);
      for (std::size_t i = 0; i < g.size(); ++i) strictly_more += h[i] && !g[i];
    }
  }
  CHECK(strictly_more > 0);
}

TEST_CASE("bounds and parity") {
  const PercolationField f = field(1, 5, 5, 0.2, 3);
  CHECK_THROWS_AS(f.open({6}, 0), OutOfBounds);
  CHECK_THROWS_AS(f.wet({0}, 6), OutOfBounds);
  CHECK_THROWS_AS(f.dry_path_exists({1}, 0, PercolationGraph::G), std::invalid_argument);
  CHECK_THROWS_AS(field(1, 5, 5, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(field(1, 5, 5, 0.1, 1, {{1}}), std::invalid_argument);
  CHECK(f.sites_at(0) == 5);
  CHECK(f.sites_at(1) == 6);
}

TEST_CASE("run-length dump") {
  const PercolationField f = field(1, 2, 1, 0.0, 1, {{0}});
  // only the source is wet at level 0; the other open sites there are dry
  CHECK(f.dump_rle() == "# percolation dim=1 width=2 levels=1 seed=1\n0: 1o 1. 1W 1. 1o\n1: 1. 1W 1. 1W 1.\n");
}

TEST_CASE("supercritical field keeps a wet fraction") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PercolationField f = field(1, 120, 100, 0.05, seed);
    CHECK(static_cast<double>(f.wet_count(100)) / static_cast<double>(f.sites_at(100)) > 0.5);
  }
}

}
