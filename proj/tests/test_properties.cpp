// Randomized properties of trace alignment, classification and queries.

#include <random>

#include "cftv/monitors.hpp"
#include "doctest.h"

using namespace cftv;
using namespace cftv::mon;
using cftv::sim::Trace;
using cftv::sim::TraceRecord;

namespace {

constexpr int kPairs = 1000;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); }

  std::vector<TraceRecord> trace(std::size_t min_len = 0, const std::string& sig = "s.x") {
    std::vector<TraceRecord> out;
    std::size_t n = uniform(min_len, 30);
    Time t = uniform(0, 50) * kMillisecond;
    for (std::size_t i = 0; i < n; ++i) {
      t += uniform(1, 500) * kMillisecond;
      out.push_back({t, sig, Value(uniform(0, 5))});
    }
    return out;
  }
};

std::set<FailureClass> run(const std::vector<TraceRecord>& ref, const std::vector<TraceRecord>& inj, Time eps,
                           std::optional<Time> window = {}) {
  Time w = window ? *window : std::max(default_window(ref), eps);
  return classify(align(ref, inj, w), eps).classes;
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("a trace compared with itself classifies empty") {
    Gen g(1);
    for (int k = 0; k < kPairs; ++k) {
      auto t = g.trace();
      REQUIRE(run(t, t, g.uniform(0, 3) * kMillisecond).empty());
    }
  }

  TEST_CASE("shifting every record by more than eps yields exactly late or early") {
    Gen g(2);
    for (int k = 0; k < kPairs; ++k) {
      auto ref = g.trace(1);
      Time eps = g.uniform(0, 20) * kMillisecond;
      Time delta = eps + g.uniform(1, 2000) * kMillisecond;
      bool delay = g.uniform(0, 1) == 1;
      auto inj = ref;
      for (auto& r : inj) r.t += delay ? delta : -delta;
      auto expect = std::set<FailureClass>{delay ? FailureClass::Late : FailureClass::Early};
      REQUIRE(run(ref, inj, eps, delta) == expect);
    }
  }

  TEST_CASE("changing one matched value yields content") {
    Gen g(3);
    for (int k = 0; k < kPairs; ++k) {
      auto ref = g.trace(1);
      auto inj = ref;
      auto& victim = inj[g.uniform(0, inj.size() - 1)];
      victim.value = Value(victim.value.as_int() + g.uniform(1, 9));
      Time eps = g.uniform(0, 20) * kMillisecond;
      REQUIRE(run(ref, inj, eps) == std::set<FailureClass>{FailureClass::Content});
    }
  }

  TEST_CASE("truncating the injection run yields halt") {
    Gen g(4);
    for (int k = 0; k < kPairs; ++k) {
      auto ref = g.trace(1);
      std::size_t keep = g.uniform(0, ref.size() - 1);
      std::vector<TraceRecord> inj(ref.begin(), ref.begin() + keep);
      REQUIRE(run(ref, inj, 0).count(FailureClass::Halt) == 1);
    }
  }

  TEST_CASE("swapping roles swaps late and early and keeps the matching size") {
    Gen g(5);
    for (int k = 0; k < kPairs; ++k) {
      auto a = g.trace(), b = g.trace();
      Time w = g.uniform(1, 1000) * kMillisecond;
      auto ab = align(a, b, w), ba = align(b, a, w);
      auto matched = [](const std::vector<AlignedPair>& v) {
        return std::count_if(v.begin(), v.end(), [](const AlignedPair& p) { return p.matched(); });
      };
      REQUIRE(matched(ab) == matched(ba));
      auto ca = classify(ab, 0), cb = classify(ba, 0);
      REQUIRE(ca.has(FailureClass::Content) == cb.has(FailureClass::Content));
      REQUIRE(ca.has(FailureClass::Late) == cb.has(FailureClass::Early));
      REQUIRE(ca.has(FailureClass::Early) == cb.has(FailureClass::Late));
    }
  }

  TEST_CASE("every evidence entry names a record and classes match evidence") {
    Gen g(6);
    for (int k = 0; k < kPairs; ++k) {
      auto ref = g.trace(), inj = g.trace();
      auto c = classify(align(ref, inj, std::max<Time>(default_window(ref), 1)), g.uniform(0, 50) * kMillisecond);
      std::set<FailureClass> from_evidence;
      for (const auto& e : c.evidence) {
        REQUIRE((e.ref || e.inj));
        from_evidence.insert(e.failure_class);
      }
      for (FailureClass f : from_evidence) REQUIRE(c.has(f));
      for (FailureClass f : c.classes)
        if (f != FailureClass::Erratic) REQUIRE(from_evidence.count(f) == 1);
    }
  }

  TEST_CASE("A- and E-forms of a query agree on linear traces") {
    Gen g(7);
    const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
    std::function<std::string(int, bool)> q = [&](int depth, bool universal) -> std::string {
      std::string path = g.uniform(0, 1) ? "s.x" : "s.y";
      std::string atom = "sig(" + path + ") " + ops[g.uniform(0, 5)] + " " + std::to_string(g.uniform(0, 5));
      if (depth == 0) return atom;
      std::string p = universal ? "A" : "E";
      switch (g.uniform(0, 6)) {
        case 0: return p + "G(" + q(depth - 1, universal) + ")";
        case 1: return p + "F(" + q(depth - 1, universal) + ")";
        case 2: return p + "X(" + q(depth - 1, universal) + ")";
        case 3: return p + "[" + q(depth - 1, universal) + " U " + q(depth - 1, universal) + "]";
        case 4: return "!(" + q(depth - 1, universal) + ")";
        case 5: return "(" + q(depth - 1, universal) + " && " + q(depth - 1, universal) + ")";
        default: return "(" + q(depth - 1, universal) + " || " + q(depth - 1, universal) + ")";
      }
    };
    for (int k = 0; k < kPairs; ++k) {
      Trace t;
      t.signals = {"s.x", "s.y"};
      auto x = g.trace(0, "s.x"), y = g.trace(0, "s.y");
      t.records = x;
      t.records.insert(t.records.end(), y.begin(), y.end());
      std::stable_sort(t.records.begin(), t.records.end(),
                       [](const TraceRecord& a, const TraceRecord& b) { return a.t < b.t; });
      auto state = g.rng;
      std::string qa = q(3, true);
      g.rng = state;
      std::string qe = q(3, false);
      REQUIRE(check_query(t, *parse_query(qa)) == check_query(t, *parse_query(qe)));
    }
  }
}
