#include "cftv/case_study.hpp"
#include "cftv/entities.hpp"
#include "doctest.h"

using namespace cftv;
using namespace cftv::sim;
using nlohmann::json;

namespace {

SimulationConfig camera_only(const std::string& stop) {
  return SimulationConfig::from_json({{"entities", {{{"type", "Camera"}, {"name", "cam"}}}},
                                      {"bindings", json::array()},
                                      {"trace", {"cam.image", "cam.frame_id"}},
                                      {"stop_time", stop}});
}

// Two Logic entities: src emits its flag every 100 ms, dst mirrors its input.
SimulationConfig relay() {
  return SimulationConfig::from_json(
      {{"entities",
        {{{"type", "Logic"},
          {"name", "src"},
          {"params", {{"flags", {"f"}}, {"outputs", {{"o", "f"}}}, {"period", "100 ms"}}}},
         {{"type", "Logic"},
          {"name", "dst"},
          {"params", {{"inports", {"in"}}, {"outputs", {{"o", "in"}}}, {"period", "100 ms"}}}}}},
       {"bindings", {{{"from", "src.o"}, {"to", "dst.in"}}}},
       {"trace", {"*"}},
       {"stop_time", "1 s"}});
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("time literals") {
    CHECK(parse_time("23 s") == 23 * kSecond);
    CHECK(parse_time("100ms") == 100 * kMillisecond);
    CHECK(parse_time("28.8 s") == 28'800 * kMillisecond);
    CHECK(parse_time("12") == 12);
    CHECK_THROWS_AS(parse_time("1.5 ps"), BadParameter);
    CHECK_THROWS_AS(parse_time("soon"), BadParameter);
    CHECK(format_time(29'100 * kMillisecond) == "29.1 s");
    CHECK(format_time(0) == "0 s");
  }

  TEST_CASE("scalar force, shadow write and release") {
    ScalarVar v(ScalarVar::Kind::Int, Value(3));
    v.force(std::nullopt, Value(0));
    CHECK(v.get() == Value(0));
    v.set(Value(7));  // entity write while forced goes to the shadow
    CHECK(v.get() == Value(0));
    v.release(std::nullopt);
    CHECK(v.get() == Value(7));
    CHECK_FALSE(v.is_forced());
    v.release(std::nullopt);  // release in normal mode is a no-op
    CHECK(v.get() == Value(7));
  }

  TEST_CASE("byte array slice force") {
    ByteArrayVar a(20, 9);
    a.force(Slice{2, 10, 3, false}, Value(0));
    for (std::size_t i = 0; i < 20; ++i) CHECK(a.get(i) == ((i == 2 || i == 5 || i == 8) ? 0 : 9));
    CHECK(a.forced_count() == 3);
    a.shadow()[5] = 4;
    a.release(Slice{5, 6, 1, false});
    CHECK(a.get(5) == 4);
    CHECK(a.get(2) == 0);
    CHECK_THROWS_AS(a.force(Slice{18, 25, 1, false}, Value(0)), UnknownInjectable);
  }

  TEST_CASE("injector path parsing") {
    auto p = InjectorPath::parse("m_Camera.pixel[0:517680:719]");
    CHECK(p.base == "m_Camera.pixel");
    REQUIRE(p.slice);
    CHECK(p.slice->begin == 0);
    CHECK(p.slice->end == 517680);
    CHECK(p.slice->step == 719);
    CHECK(InjectorPath::parse("m_Camera.pixel[5]").slice->single);
    CHECK_THROWS_AS(InjectorPath::parse("x.y[3"), UnknownInjectable);
  }

  TEST_CASE("case-study world has five entities") {
    auto cs = cs::build_case_study();
    Simulation s(cs.config, standard_registry());
    CHECK(s.entity_count() == 5);
  }

  TEST_CASE("empty world terminates immediately") {
    SimulationConfig c = SimulationConfig::from_json({{"entities", json::array()}, {"stop_time", "1 s"}});
    Simulation s(c, standard_registry());
    CHECK(s.run().records.empty());
  }

  TEST_CASE("configuration errors") {
    auto bad_type = SimulationConfig::from_json({{"entities", {{{"type", "Cameraa"}, {"name", "c"}}}}});
    CHECK_THROWS_AS(Simulation(bad_type, standard_registry()), UnknownEntityType);
    auto dotted = SimulationConfig::from_json({{"entities", {{{"type", "Camera"}, {"name", "a.b"}}}}});
    CHECK_THROWS_AS(Simulation(dotted, standard_registry()), BadParameter);
    auto unbound = SimulationConfig::from_json(
        {{"entities", {{{"type", "Camera"}, {"name", "c"}}}}, {"bindings", {{{"from", "c.nope"}, {"to", "c.image"}}}}});
    CHECK_THROWS_AS(Simulation(unbound, standard_registry()), UnboundPort);
    auto bad_param = SimulationConfig::from_json(
        {{"entities", {{{"type", "Camera"}, {"name", "c"}, {"params", {{"period", "fast"}}}}}}});
    CHECK_THROWS_AS(Simulation(bad_param, standard_registry()), BadParameter);
  }

  TEST_CASE("camera emits one frame per period") {
    Simulation s(camera_only("1 s"), standard_registry());
    auto frames = s.run().of("cam.image");
    REQUIRE(frames.size() == 10);
    for (std::size_t k = 0; k < frames.size(); ++k) CHECK(frames[k].t == Time(k + 1) * 100 * kMillisecond);
    auto ids = s.trace().of("cam.frame_id");
    REQUIRE(ids.size() == 10);
    CHECK(ids.back().value == Value(10));
  }

  TEST_CASE("stop time zero gives an empty trace") {
    Simulation s(camera_only("0 s"), standard_registry());
    CHECK(s.run().records.empty());
  }

  TEST_CASE("identical runs are byte-identical") {
    auto cs = cs::build_case_study();
    Simulation a(cs.config, standard_registry()), b(cs.config, standard_registry());
    std::string ta = a.run().to_jsonl(), tb = b.run().to_jsonl();
    CHECK(ta == tb);
    CHECK(Trace::from_jsonl(ta).to_jsonl() == ta);
    CHECK(Trace::from_jsonl(ta).digest() == a.trace().digest());
  }

  TEST_CASE("forced pixel range reads zero until released") {
    Simulation s(camera_only("1 s"), standard_registry());
    CHECK(s.read_signal("cam.pixel[143800]") == Value(0));  // nothing rendered yet
    s.run_until(150 * kMillisecond);
    CHECK(s.read_signal("cam.pixel[143800]") == Value(64));
    s.force("cam.pixel[143800:150990]", Value(0));
    CHECK(s.read_signal("cam.pixel[143800]") == Value(0));
    CHECK(s.read_signal("cam.pixel[150989]") == Value(0));
    CHECK(s.read_signal("cam.pixel[150990]") == Value(64));
    s.release("cam.pixel[143800:150990]");
    CHECK(s.read_signal("cam.pixel[143800]") == Value(64));
    s.release("cam.pixel[0:10]");  // never forced: no-op
  }

  TEST_CASE("read unforced parameter and unknown signals") {
    Simulation s(camera_only("1 s"), standard_registry());
    CHECK(s.read_signal("cam.period") == Value(100 * kMillisecond));
    CHECK(s.read_signal("cam.frame_id").is_null());
    CHECK_THROWS_AS(s.read_signal("cam.nope"), UnknownSignal);
    CHECK_THROWS_AS(s.force("cam.nope", Value(1)), UnknownInjectable);
  }

  TEST_CASE("inport enable and delay injectables") {
    {
      Simulation s(relay(), standard_registry());
      s.force("src.f", Value(1));
      s.force("dst.in.delay", Value(250 * kMillisecond));
      auto out = s.run().of("dst.o");
      // dst samples its input every 100 ms; the first 1 arrives at 350 ms.
      REQUIRE(!out.empty());
      auto first = std::find_if(out.begin(), out.end(), [](const TraceRecord& r) { return r.value == Value(1); });
      REQUIRE(first != out.end());
      CHECK(first->t == 400 * kMillisecond);
    }
    {
      Simulation s(relay(), standard_registry());
      s.force("src.f", Value(1));
      s.force("dst.in.enabled", Value(0));
      for (const auto& r : s.run().of("dst.o")) CHECK(r.value == Value(0));
    }
    {
      Simulation s(relay(), standard_registry());
      s.force("dst.in", Value(1));  // payload forced: every delivery reads 1
      auto out = s.run().of("dst.o");
      CHECK(out.back().value == Value(1));
    }
  }

  TEST_CASE("channel latency and loss") {
    auto c = SimulationConfig::from_json(
        {{"entities",
          {{{"type", "Logic"}, {"name", "a"}, {"params", {{"outputs", {{"o", 1}}}, {"period", "100 ms"}}}},
           {{"type", "Channel"}, {"name", "ch"}, {"params", {{"latency", "5 ms"}}}},
           {{"type", "Logic"}, {"name", "b"}, {"params", {{"inports", {"in"}}, {"outputs", {{"o", "in"}}}}}}}},
         {"bindings", {{{"from", "a.o"}, {"to", "ch.in"}}, {{"from", "ch.out"}, {"to", "b.in"}}}},
         {"trace", {"*"}},
         {"stop_time", "1 s"}});
    {
      Simulation s(c, standard_registry());
      auto out = s.run().of("ch.out");
      // Sends at 100 ms .. 1 s; the last one would arrive after the stop time.
      REQUIRE(out.size() == 9);
      CHECK(out[0].t == 105 * kMillisecond);
    }
    {
      Simulation s(c, standard_registry());
      s.force("ch.loss", Value(1));
      CHECK(s.run().of("ch.out").empty());
    }
    c.entities[1].params["drop"] = "every:2";
    Simulation s(c, standard_registry());
    CHECK(s.run().of("ch.out").size() == 5);
  }

  TEST_CASE("trace filter") {
    auto c = relay();
    c.trace = {"dst.*"};
    Simulation s(c, standard_registry());
    s.run();
    CHECK(s.trace().declares("dst.o"));
    CHECK_FALSE(s.trace().declares("src.o"));
    for (const auto& r : s.trace().records) CHECK(r.signal.rfind("dst.", 0) == 0);
  }

  TEST_CASE("config hash is stable and sensitive") {
    auto a = relay(), b = relay();
    CHECK(a.hash() == b.hash());
    b.seed = 1;
    CHECK(a.hash() != b.hash());
    CHECK(SimulationConfig::from_json(a.to_json()).hash() == a.hash());
  }
}
