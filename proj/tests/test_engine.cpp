// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <functional>
#include <vector>

#include "support.hpp"
#include "xcom/engine.hpp"
#include "xcom/error.hpp"

using namespace xcom;
using xcom::testing::fs;
using xcom::testing::Gen;

namespace {

// Records the probe id of every ProbeEv it sees, with the dispatch time.
struct Recorder : Dispatcher {
  std::vector<std::pair<WallTime, std::uint64_t>> seen;
  std::function<void(const Event&)> also;
  void dispatch(const Event& ev) override {
    seen.emplace_back(ev.t, std::get<ProbeEv>(ev.body).id);
    if (also) also(ev);
  }
};

}  // namespace

TEST_CASE("events run in time order, FIFO on ties") {
  Engine e;
  Recorder r;
  e.schedule(fs(30), ProbeEv{1});
  e.schedule(fs(10), ProbeEv{2});
  e.schedule(fs(10), ProbeEv{3});
  e.schedule(fs(20), ProbeEv{4});
  e.schedule(fs(10), ProbeEv{5});
  e.run_to_idle(r);
  std::vector<std::uint64_t> order;
  for (auto& [t, id] : r.seen) order.push_back(id);
  CHECK(order == std::vector<std::uint64_t>{2, 3, 5, 4, 1});
  CHECK(e.now() == fs(30));
  CHECK(e.executed() == 5);
}

TEST_CASE("an event scheduled at the current time runs before later ones") {
  Engine e;
  Recorder r;
  e.schedule(fs(10), ProbeEv{1});
  e.schedule(fs(11), ProbeEv{2});
  r.also = [&](const Event& ev) {
    if (std::get<ProbeEv>(ev.body).id == 1) e.schedule(e.now(), ProbeEv{9});
  };
  e.run_to_idle(r);
  REQUIRE(r.seen.size() == 3);
  CHECK(r.seen[1].second == 9);
  CHECK(r.seen[1].first == fs(10));
}

TEST_CASE("retro-causal scheduling is an internal fault") {
  Engine e;
  Recorder r;
  e.schedule(fs(100), ProbeEv{1});
  e.run_to_idle(r);
  CHECK_THROWS_AS(e.schedule(fs(99), ProbeEv{2}), InternalFault);
  CHECK_NOTHROW(e.schedule(fs(100), ProbeEv{3}));
}

TEST_CASE("events past the horizon stay queued") {
  Engine e;
  Recorder r;
  e.schedule(fs(5), ProbeEv{1});
  e.schedule(fs(15), ProbeEv{2});
  e.run_until(fs(10), r);
  CHECK(r.seen.size() == 1);
  CHECK(e.pending() == 1);
  CHECK_FALSE(e.idle());
  e.run_until(fs(15), r);
  CHECK(r.seen.size() == 2);
}

TEST_CASE("an empty run returns immediately") {
  Engine e;
  Recorder r;
  e.run_until(WallTime::from_seconds(1000000), r);
  CHECK(r.seen.empty());
  CHECK(e.trace().empty());
}

TEST_CASE("property: dispatch order is sorted by (t, insertion)") {
  Gen g(51);
  Engine e;
  Recorder r;
  std::vector<std::pair<WallTime, std::uint64_t>> want;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const WallTime t = fs(g.range(0, 50));
    e.schedule(t, ProbeEv{i});
    want.emplace_back(t, i);
  }
  std::stable_sort(want.begin(), want.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  e.run_to_idle(r);
  CHECK(r.seen == want);
}

TEST_CASE("counter RNG is a pure function of (seed, stream, index)") {
  CHECK(counter_rng(1, 2, 3) == counter_rng(1, 2, 3));
  CHECK(counter_rng(1, 2, 3) != counter_rng(1, 2, 4));
  CHECK(counter_rng(1, 2, 3) != counter_rng(1, 3, 3));
  CHECK(counter_rng(1, 2, 3) != counter_rng(2, 2, 3));

  Engine a(77), b(77);
  for (int i = 0; i < 100; ++i) CHECK(a.rng_draw(5, 32) == b.rng_draw(5, 32));
  // Interleaving other streams does not disturb a stream's sequence.
  Engine c(77), d(77);
  std::vector<std::uint64_t> plain, mixed;
  for (int i = 0; i < 100; ++i) plain.push_back(c.rng_draw(5, 32));
  for (int i = 0; i < 100; ++i) {
    d.rng_draw(6, 16);
    mixed.push_back(d.rng_draw(5, 32));
  }
  CHECK(plain == mixed);
}

TEST_CASE("rng_draw respects the width") {
  Engine e(3);
  for (int i = 0; i < 10000; ++i) {
    CHECK(e.rng_draw(0, 16) < (1u << 16));
    CHECK(e.rng_draw(1, 1) < 2);
  }
  CHECK(e.rng_draw(2, 64) != e.rng_draw(2, 64));
}

TEST_CASE("different streams are decorrelated (chi-square on the joint histogram)") {
  // Joint 16x16 histogram of the top nibbles of two streams at equal index.
  // Independent uniform streams give chi-square with 255 degrees of freedom;
  // 330.5 is its 0.999 quantile.
  constexpr int kDraws = 100'000;
  Engine e(2024);
  std::array<std::array<double, 16>, 16> hist{};
  for (int i = 0; i < kDraws; ++i) {
    const auto a = e.rng_draw(0, 4);
    const auto b = e.rng_draw(1, 4);
    hist[a][b] += 1;
  }
  const double expected = kDraws / 256.0;
  double chi2 = 0;
  for (const auto& row : hist)
    for (double o : row) chi2 += (o - expected) * (o - expected) / expected;
  CHECK(chi2 < 330.5);

  // Same check on the marginal of a single stream (15 dof, 0.999 quantile 37.7).
  std::array<double, 16> marginal{};
  for (int i = 0; i < kDraws; ++i) marginal[e.rng_draw(7, 4)] += 1;
  double chi2m = 0;
  for (double o : marginal) chi2m += (o - kDraws / 16.0) * (o - kDraws / 16.0) / (kDraws / 16.0);
  CHECK(chi2m < 37.7);
}
