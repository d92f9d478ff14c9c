#include <algorithm>

#include "doctest.h"

#include "coop/graphical.hpp"

using namespace coop;

namespace {

EventLog line_log(std::vector<Mark> marks, double t_end = 10.0) {
  EventLog log;
  log.torus = Torus(1, 10);
  log.t_end = t_end;
  log.params = log.base = Params{1, 1, 1, 1};
  log.marks = std::move(marks);
  std::sort(log.marks.begin(), log.marks.end(), mark_before);
  return log;
}

}  // namespace

TEST_SUITE("dual") {

TEST_CASE("hand-built tree") {
  // origin (0, 10); arrows into 0 from 1 at t=4 and from 9 at t=6, cross at 0 at t=2;
  // arrow into 1 from 2 at t=3; cross at 9 at t=5.
  const EventLog log = line_log({{2, MarkKind::cross, 0},
                                 {4, MarkKind::arrow, 0, 1},
                                 {6, MarkKind::d_arrow, 0, 9},
                                 {3, MarkKind::arrow, 1, 2},
                                 {5, MarkKind::cross, 9},
                                 {7, MarkKind::dot_arrow, 0, 1, 2},
                                 {8, MarkKind::c_arrow, 0, 1, 0}});
  const DualTree tree = build_dual(log, 0, 10.0);
  REQUIRE(tree.paths.size() == 6);
  CHECK(tree.paths[0].index == std::vector<int>{1});
  CHECK(tree.paths[0].stopped);
  CHECK(tree.paths[0].stop_time == 2.0);
  // children in increasing real time, c-arrows skipped
  CHECK(tree.paths[1].index == std::vector<int>{1, 1});
  CHECK(tree.paths[1].site == 1);
  CHECK(tree.paths[1].start_time == 4.0);
  CHECK(tree.paths[2].index == std::vector<int>{1, 1, 1});
  CHECK(tree.paths[2].site == 2);
  CHECK(tree.paths[3].index == std::vector<int>{1, 2});
  CHECK(tree.paths[3].site == 9);
  CHECK(tree.paths[3].stopped);
  CHECK(tree.paths[4].index == std::vector<int>{1, 3});
  CHECK(tree.paths[4].start_time == 7.0);
  CHECK(tree.paths[5].index == std::vector<int>{1, 3, 1});
  CHECK(tree.paths[5].site == 2);
  for (const auto& p : tree.paths)
    if (p.parent >= 0) CHECK(tree.paths[p.parent].index.size() + 1 == p.index.size());

  const auto bottoms = tree.bottom_paths();
  REQUIRE(bottoms.size() == 4);
  CHECK(tree.ancestors_at(0.0) == std::vector<Site>{0});
  CHECK(tree.ancestors_at(10.0) == std::vector<Site>{1, 2, 1, 2});
  CHECK(tree.ancestors_at(5.5) == std::vector<Site>{0, 1});  // real time 4.5

  const std::string text = render_hierarchy(tree);
  CHECK(std::count(text.begin(), text.end(), '\n') == 8);
  CHECK(text.find("    (1,1,1) site 2") != std::string::npos);

  using S = SiteState;
  Configuration bottom(10, S::empty);
  CHECK(resolve_type(tree, log, bottom) == DualType::empty);
  bottom[2] = S::defector;  // reached through two plain arrows
  CHECK(resolve_type(tree, log, bottom) == DualType::defector);
  bottom[2] = S::empty;
  bottom[1] = S::cooperator;  // path (1,1) is first among occupied
  CHECK(resolve_type(tree, log, bottom) == DualType::cooperator);
}

TEST_CASE("conditionally usable chains are indeterminate") {
  const EventLog log = line_log({{5, MarkKind::dot_arrow, 0, 1, 2}});
  const DualTree tree = build_dual(log, 0, 10.0);
  Configuration bottom(10, SiteState::empty);
  bottom[1] = SiteState::cooperator;
  CHECK(resolve_type(tree, log, bottom) == DualType::indeterminate);
  bottom[1] = SiteState::defector;
  CHECK(resolve_type(tree, log, bottom) == DualType::indeterminate);  // standard flavor
  EventLog er = log;
  er.flavor = Flavor::equal_rate;
  CHECK(resolve_type(build_dual(er, 0, 10.0), er, bottom) == DualType::defector);
}

TEST_CASE("resolved types agree with forward evolution") {
  std::size_t determinate = 0, checked = 0;
  for (Flavor f : {Flavor::standard, Flavor::equal_rate}) {
    const Params p{1.5, 2.0, 1.0, 1};
    const Torus t(1, 25);
    for (int k = 0; k < 60; ++k) {
      Rng rng = make_stream(21, static_cast<std::uint64_t>(k) + (f == Flavor::standard ? 0 : 1000));
      const Configuration c0 = sample_product(t, 0.3, 0.3, rng);
      const EventLog log = sample_event_log(p, t, 0, 1.5, rng, f);
      const Configuration top = evolve_from_log(c0, log);
      for (Site x = 0; x < t.size(); x += 3) {
        const DualTree tree = build_dual(log, x, 1.5);
        const DualType r = resolve_type(tree, log, c0);
        ++checked;
        if (r == DualType::indeterminate) continue;
        ++determinate;
        const DualType truth = top[x] == SiteState::empty       ? DualType::empty
                               : top[x] == SiteState::cooperator ? DualType::cooperator
                                                                 : DualType::defector;
        CHECK(r == truth);
      }
    }
  }
  CHECK(determinate > checked / 2);
}

TEST_CASE("every occupied site has an occupied bottom ancestor") {
  const Params p{2.0, 1.0, 1.0, 2};
  const Torus t(2, 6);
  for (int k = 0; k < 20; ++k) {
    Rng rng = make_stream(22, k);
    const Configuration c0 = sample_product(t, 0.2, 0.2, rng);
    const EventLog log = sample_event_log(p, t, 0, 2, rng);
    const Configuration top = evolve_from_log(c0, log);
    for (Site x = 0; x < t.size(); ++x) {
      const DualTree tree = build_dual(log, x, 2.0);
      bool any = false;
      for (std::size_t i : tree.bottom_paths()) any |= c0[tree.paths[i].site] != SiteState::empty;
      if (top[x] != SiteState::empty) CHECK(any);
    }
  }
}

TEST_CASE("dual preconditions") {
  Rng rng = make_stream(23, 0);
  const Torus t(1, 10);
  const EventLog coupled = sample_coupled_log({2, 1, 1, 1}, {2, 1, 1, 1}, t, 0, 5, rng);
  CHECK_THROWS_AS(build_dual(coupled, 0, 5), FlavorMismatch);
  const EventLog log = sample_event_log({4, 1, 1, 1}, t, 0, 20, rng);
  CHECK_THROWS_AS(build_dual(log, 10, 5), std::out_of_range);
  CHECK_THROWS_AS(build_dual(log, 0, 25), std::invalid_argument);
  CHECK_THROWS_AS(build_dual(log, 0, 20, 3), std::length_error);
}

TEST_CASE("two-sample chi-square") {
  const ChiSquare same = two_sample_chi_square({5, 10, 20}, {5, 10, 20});
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
  const ChiSquare two = two_sample_chi_square({10, 20}, {20, 10});
  CHECK(two.dof == 1);
  CHECK(two.statistic == doctest::Approx(6.666666666666667).epsilon(1e-14));
  CHECK(two.p_value == doctest::Approx(0.009823274507519235).epsilon(1e-10));
  // the first two bins are pooled
  const ChiSquare pooled = two_sample_chi_square({1, 2, 30, 40}, {2, 1, 35, 30});
  CHECK(pooled.dof == 2);
  CHECK(pooled.statistic == doctest::Approx(1.6379415306691687).epsilon(1e-12));
  CHECK(pooled.p_value == doctest::Approx(0.44088519539252724).epsilon(1e-10));
  CHECK_THROWS_AS(two_sample_chi_square({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("engine equivalence on a small torus") {
  EquivalenceSpec s;
  s.params = {2.0, 1.0, 1.0, 1};
  s.replicas = 20000;
  s.seed = 3;
  const EquivalenceReport r = distributional_equivalence_check(s);
  CHECK(r.pass);
  std::size_t total = 0;
  for (std::size_t v : r.gillespie[0]) total += v;
  CHECK(total == 20000);
}

}
