#include "cftv/case_study.hpp"
#include "cftv/entities.hpp"
#include "cftv/verifier.hpp"
#include "doctest.h"

using namespace cftv;
using namespace cftv::mon;
using cftv::sim::Trace;
using cftv::sim::TraceRecord;
using nlohmann::json;

namespace {

Time s(double seconds) { return static_cast<Time>(seconds * 1000) * kMillisecond; }

Trace make(std::vector<TraceRecord> recs, std::vector<std::string> signals = {"a.limit"}) {
  Trace t;
  t.signals = std::move(signals);
  t.records = std::move(recs);
  return t;
}

std::set<FailureClass> classes(const std::vector<TraceRecord>& ref, const std::vector<TraceRecord>& inj, Time window,
                               Time eps) {
  return classify(align(ref, inj, window), eps).classes;
}

struct Runs {
  Trace ref, late, halt;
};

// Reference, horizontal-line and classifier-omission runs of the case study.
const Runs& runs() {
  static const Runs r = [] {
    auto cs = cs::build_case_study();
    auto reg = sim::standard_registry();
    Runs out;
    out.ref = ver::run_reference(cs.config, reg);
    auto h = btm::instantiate(cs.library.at("pixel_line_h"),
                              {{"target", "m_Camera.pixel"}, {"value", "0x00"}, {"t_start", "23 s"}});
    out.late = ver::run_injection(cs.config, reg, {h}).trace;
    auto o = btm::instantiate(cs.library.at("omission"),
                              {{"target", "m_SlClassif.segment.enabled"}, {"value", "0"}, {"t_start", "20 s"}});
    out.halt = ver::run_injection(cs.config, reg, {o}).trace;
    return out;
  }();
  return r;
}

}  // namespace

TEST_SUITE("monitors") {
  TEST_CASE("alignment of the late limit") {
    auto pairs = align({{s(28.8), "a.limit", 80}}, {{s(29.1), "a.limit", 80}}, kSecond);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].matched());
    CHECK(pairs[0].dt == 300 * kMillisecond);
  }

  TEST_CASE("identical traces align one to one") {
    std::vector<TraceRecord> t{{s(1), "x", 1}, {s(2), "x", 2}, {s(3), "x", 3}};
    auto pairs = align(t, t, default_window(t));
    REQUIRE(pairs.size() == 3);
    for (const auto& p : pairs) {
      CHECK(p.matched());
      CHECK(p.dt == 0);
    }
    CHECK(classify(pairs, 0).empty());
  }

  TEST_CASE("empty injection leaves reference records unmatched") {
    std::vector<TraceRecord> t{{s(1), "x", 1}, {s(2), "x", 2}, {s(3), "x", 3}};
    auto pairs = align(t, {}, kSecond);
    REQUIRE(pairs.size() == 3);
    for (const auto& p : pairs) CHECK((p.ref && !p.inj));
    CHECK(classify(pairs, 0).classes == std::set<FailureClass>{FailureClass::Halt});
  }

  TEST_CASE("default window") {
    std::vector<TraceRecord> t{{0, "x", 1}, {10, "x", 1}, {40, "x", 1}, {50, "x", 1}};
    CHECK(default_window(t) == 10);
    CHECK(default_window({{0, "x", 1}}) == kTimeMax);
  }

  TEST_CASE("classification rules") {
    CHECK(classes({{s(28.8), "x", 80}}, {{s(29.1), "x", 80}}, kSecond, 50 * kMillisecond) ==
          std::set<FailureClass>{FailureClass::Late});
    CHECK(classes({{s(1), "x", 80}}, {{s(0.5), "x", 80}}, kSecond, 0) == std::set<FailureClass>{FailureClass::Early});
    CHECK(classes({{s(1), "x", 80}}, {{s(1), "x", 50}}, kSecond, 0) == std::set<FailureClass>{FailureClass::Content});
    std::vector<TraceRecord> ref{{s(1), "x", 1}, {s(2), "x", 2}, {s(3), "x", 3}};
    auto inj = ref;
    inj.insert(inj.begin() + 2, {s(2.5), "x", 9});
    CHECK(classes(ref, inj, default_window(ref), 0) == std::set<FailureClass>{FailureClass::Erratic});
    // Content and late together add erratic.
    CHECK(classes({{s(1), "x", 1}, {s(2), "x", 2}}, {{s(1), "x", 5}, {s(2.2), "x", 2}}, 500 * kMillisecond, 0) ==
          std::set<FailureClass>{FailureClass::Content, FailureClass::Late, FailureClass::Erratic});
  }

  TEST_CASE("primary class precedence") {
    Classification c;
    c.classes = {FailureClass::Erratic, FailureClass::Content, FailureClass::Late};
    CHECK(c.primary() == FailureClass::Late);
    c.classes.insert(FailureClass::Halt);
    CHECK(c.primary() == FailureClass::Halt);
    CHECK_FALSE(Classification{}.primary().has_value());
  }

  TEST_CASE("queries on small traces") {
    Trace ok = make({{s(1), "a.hint", 80}, {s(2), "a.hint", 80}}, {"a.hint"});
    CHECK(check_query(ok, *parse_query("AG(sig(a.hint) != \"invalid\")")));
    Trace one = make({{s(1), "a.hint", 1}}, {"a.hint"});
    CHECK_FALSE(check_query(one, *parse_query("AX(sig(a.hint) == 1)")));
    CHECK(check_query(make({}, {"a.hint"}), *parse_query("AG(sig(a.hint) == 1)")));
    CHECK_FALSE(check_query(make({}, {"a.hint"}), *parse_query("EF(sig(a.hint) == 1)")));
    Trace two = make({{s(1), "a.hint", 1}, {s(2), "a.hint", 2}}, {"a.hint"});
    CHECK(check_query(two, *parse_query("A[sig(a.hint) == 1 U sig(a.hint) == 2]")));
    CHECK(check_query(two, *parse_query("AX(sig(a.hint) == 2) && !AG(sig(a.hint) == 1)")));
    CHECK_THROWS_AS(check_query(two, *parse_query("AF(sig(a.nope) == 1)")), UnknownSignalInQuery);
    CHECK_THROWS_AS(parse_query("AF(sig(a.hint) == )"), ExprSyntaxError);
  }

  TEST_CASE("AF(limit == 80) on the reference and on a halt run") {
    auto q = parse_query("AF(sig(m_SlClassif.limit) == 80)");
    CHECK(check_query(runs().ref, *q));
    CHECK_FALSE(check_query(runs().halt, *q));
  }

  TEST_CASE("late scenario monitor verdicts") {
    MonitorSpec m = MonitorSpec::from_json({{"signal", "m_CoastingAssist.limit"}, {"eps_t", "50 ms"}});
    auto v = monitor_verdict(runs().ref, runs().late, m);
    CHECK(v.classification.classes == std::set<FailureClass>{FailureClass::Late});
    CHECK_FALSE(v.query_mismatch);
    m.query = "AF(sig(m_CoastingAssist.limit) == 80)";
    v = monitor_verdict(runs().ref, runs().late, m);
    CHECK(*v.query_ref);
    CHECK(*v.query_inj);
    CHECK_FALSE(v.query_mismatch);
    v = monitor_verdict(runs().ref, runs().halt, m);
    CHECK(v.query_mismatch);
    CHECK(v.triggered());
  }

  TEST_CASE("monitor spec validation") {
    CHECK_THROWS_AS(MonitorSpec::from_json({{"eps_t", "1 s"}}), SchemaError);
    CHECK_THROWS_AS(MonitorSpec::from_json({{"signal", "a.b"}, {"eps_t", "2 s"}, {"window", "1 s"}}), SchemaError);
    CHECK_THROWS_AS(MonitorSpec::from_json({{"signal", "a.b"}, {"comparator", "fuzzy"}}), SchemaError);
    auto m = MonitorSpec::from_json({{"signal", "a.b"}, {"eps_t", "1 s"}, {"pairing", "value"}});
    CHECK(MonitorSpec::from_json(m.to_json()).to_json() == m.to_json());
    CHECK_THROWS_AS(monitor_verdict(make({}), make({}), MonitorSpec::from_json({{"signal", "a.nope"}})), UnknownSignal);
  }

  TEST_CASE("numeric comparator tolerance") {
    std::vector<TraceRecord> ref{{s(1), "x", 1.0}}, inj{{s(1), "x", 1.05}};
    CHECK(classify(align(ref, inj, kSecond), 0, Comparator::Numeric, 0.1).empty());
    CHECK(classify(align(ref, inj, kSecond), 0, Comparator::Numeric, 0.01).has(FailureClass::Content));
  }

  TEST_CASE("value pairing follows a lagging counter") {
    std::vector<TraceRecord> ref, inj;
    for (int k = 1; k <= 10; ++k) {
      ref.push_back({k * 100 * kMillisecond, "x", k});
      inj.push_back({k * 170 * kMillisecond, "x", k});
    }
    auto by_time = classify(align(ref, inj, 2 * kSecond, Pairing::Time), 0);
    auto by_value = classify(align(ref, inj, 2 * kSecond, Pairing::Value), 0);
    CHECK(by_value.classes == std::set<FailureClass>{FailureClass::Late});
    CHECK(by_time.classes == std::set<FailureClass>{FailureClass::Late});
    inj.erase(inj.begin());
    by_value = classify(align(ref, inj, 2 * kSecond, Pairing::Value), 0);
    CHECK(by_value.has(FailureClass::Late));
  }
}
