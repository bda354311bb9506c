#include <algorithm>
#include <set>

#include "cftv/case_study.hpp"
#include "cftv/entities.hpp"
#include "cftv/fixtures.hpp"
#include "doctest.h"

using namespace cftv;
using nlohmann::json;

namespace {

const cs::CaseStudy& study() {
  static const cs::CaseStudy s = cs::build_case_study();
  return s;
}

std::vector<tg::TestCase> cases_for(const std::string& scope, bool cross = false) {
  const auto& s = study();
  Scope sc = Scope::parse(scope, s.model);
  return cross ? tg::generate_cross_tests(s.model, sc, s.bindings, s.library)
               : tg::generate_test_cases(s.model, sc, s.bindings, s.library);
}

std::vector<const tg::TestCase*> with_cut(const std::vector<tg::TestCase>& cases, const std::string& lit) {
  std::vector<const tg::TestCase*> out;
  for (const auto& tc : cases)
    if (tc.cut.literals == std::vector<std::string>{lit}) out.push_back(&tc);
  return out;
}

}  // namespace

TEST_SUITE("testgen") {
  TEST_CASE("camera scope yields one case per cut and template") {
    auto cases = cases_for("camera");
    // Four single-literal cuts; pixel_failure has three templates.
    CHECK(cases.size() == 6);
    auto defect = with_cut(cases, "camera.camera_defect");
    REQUIRE(defect.size() == 1);
    CHECK(defect[0]->targets == std::vector<std::string>{"camera.omission_of_image"});
    REQUIRE(defect[0]->monitors.size() == 1);
    CHECK(defect[0]->monitors[0].failure_class == "halt");
    CHECK(defect[0]->monitors[0].role == tg::MonitorRole::Target);
    CHECK(defect[0]->subsets.empty());
  }

  TEST_CASE("template choice follows the binding") {
    auto cases = cases_for("camera");
    std::set<std::string> pixel;
    for (auto* tc : with_cut(cases, "camera.pixel_failure")) pixel.insert(tc->btms.at(0).template_name);
    CHECK(pixel == std::set<std::string>{"pixel_line_h", "pixel_line_v", "pixel_scatter"});
    auto content = with_cut(cases, "camera.content_failure");
    REQUIRE(content.size() == 1);
    CHECK(content[0]->btms.at(0).template_name == "freeze_frame");
    CHECK(content[0]->btms.at(0).bindings.at("target") == "m_Camera.pixel");
    CHECK(content[0]->btms.at(0).bindings.at("t_start") == "22 s");
  }

  TEST_CASE("coasting assistant missing_hint has three single-literal cases") {
    auto cases = cases_for("coastingAssist");
    std::set<std::string> cuts;
    for (const auto& tc : cases)
      if (tc.targets.front() == "coastingAssist.missing_hint") {
        REQUIRE(tc.cut.literals.size() == 1);
        cuts.insert(tc.cut.literals[0]);
      }
    CHECK(cuts == std::set<std::string>{"coastingAssist.ECU_defect", "coastingAssist.di_omission",
                                         "coastingAssist.sl_omission"});
  }

  TEST_CASE("AND cut gets leave-one-out subsets") {
    auto f = fx::build_fixture("and_single");
    Scope all = Scope::parse("all", f.model);
    auto cases = tg::generate_test_cases(f.model, all, f.bindings, f.library);
    REQUIRE(cases.size() == 1);
    const auto& tc = cases[0];
    CHECK(tc.cut.literals.size() == 2);
    CHECK(tc.btms.size() == 2);
    REQUIRE(tc.subsets.size() == 2);
    CHECK(tc.subsets[0] == std::vector<std::string>{tc.cut.literals[1]});
    CHECK(tc.subsets[1] == std::vector<std::string>{tc.cut.literals[0]});
  }

  TEST_CASE("missing bindings are reported") {
    const auto& s = study();
    Scope cam = Scope::parse("camera", s.model);
    auto no_mon = s.bindings;
    no_mon.monitors.erase("camera.frozen_image");
    CHECK_THROWS_AS(tg::generate_test_cases(s.model, cam, no_mon, s.library), MissingBinding);
    auto no_lit = s.bindings;
    no_lit.literals.erase("camera.content_failure");
    CHECK_THROWS_AS(tg::generate_test_cases(s.model, cam, no_lit, s.library), MissingBinding);
    auto bad_tpl = s.bindings;
    bad_tpl.literals.at("camera.content_failure").templates = {"no_such_btm"};
    CHECK_THROWS_AS(tg::generate_test_cases(s.model, cam, bad_tpl, s.library), UnknownTemplate);
  }

  TEST_CASE("placeholder without a value is reported") {
    const auto& s = study();
    Scope cam = Scope::parse("camera", s.model);
    auto b = s.bindings;
    b.literals.at("camera.pixel_failure").params.erase("value");
    CHECK_THROWS_AS(tg::generate_test_cases(s.model, cam, b, s.library), UnboundPlaceholder);
  }

  TEST_CASE("cross suite of a single-OFM scope matches the base suite") {
    auto f = fx::build_fixture("or_single");
    Scope all = Scope::parse("all", f.model);
    auto base = tg::generate_test_cases(f.model, all, f.bindings, f.library);
    auto cross = tg::generate_cross_tests(f.model, all, f.bindings, f.library);
    REQUIRE(base.size() == cross.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(cross[i].cross);
      CHECK(cross[i].id == "x:" + base[i].id);
      CHECK(cross[i].cut == base[i].cut);
      REQUIRE(cross[i].monitors.size() == 1);
      CHECK(cross[i].monitors[0].role == tg::MonitorRole::Target);
    }
  }

  TEST_CASE("cross tests mark unpredicted monitors") {
    auto cases = cases_for("camera,circleRecog,slClassif,coastingAssist", true);
    bool seen = false;
    for (const auto& tc : cases) {
      if (tc.cut.literals != std::vector<std::string>{"camera.pixel_failure"}) continue;
      for (const auto& m : tc.monitors) {
        if (m.ofm == "coastingAssist.erroneous_hint") CHECK(m.role != tg::MonitorRole::Unpredicted);
        if (m.ofm == "coastingAssist.sl_late") {
          CHECK(m.role == tg::MonitorRole::Unpredicted);
          seen = true;
        }
      }
    }
    CHECK(seen);
  }

  TEST_CASE("identical cross cases are merged across targets") {
    auto cases = cases_for("camera,circleRecog,slClassif,coastingAssist", true);
    std::set<std::string> keys;
    for (const auto& tc : cases) {
      std::string k;
      for (const auto& b : tc.btms) k += b.literal + "/" + b.template_name + ";";
      CHECK(keys.insert(k).second);
    }
    auto h = std::find_if(cases.begin(), cases.end(), [](const tg::TestCase& tc) {
      return tc.cut.literals == std::vector<std::string>{"camera.pixel_failure"} &&
             tc.btms[0].template_name == "pixel_line_h";
    });
    REQUIRE(h != cases.end());
    CHECK(h->targets.size() >= 2);
    for (const auto& t : h->targets) {
      auto m = std::find_if(h->monitors.begin(), h->monitors.end(),
                            [&](const tg::TestMonitor& x) { return x.ofm == t; });
      REQUIRE(m != h->monitors.end());
      CHECK(m->role == tg::MonitorRole::Target);
    }
  }

  TEST_CASE("OFMs sharing every cut have no unpredicted monitors") {
    json cft{{"basic_events", {{{"id", "b1"}, {"fit", 1}}, {{"id", "b2"}, {"fit", 1}}}},
             {"ofms",
              {{{"id", "f"}, {"class", "halt"}, {"port", "o1"}}, {{"id", "g"}, {"class", "halt"}, {"port", "o2"}}}},
             {"gates", {{{"id", "or1"}, {"kind", "OR"}}}},
             {"edges",
              {{{"src", "b1"}, {"dst", "or1"}},
               {{"src", "b2"}, {"dst", "or1"}},
               {{"src", "or1"}, {"dst", "f"}},
               {{"src", "or1"}, {"dst", "g"}}}}};
    json doc{{"components", {{{"id", "c"}, {"inports", json::array()}, {"outports", {"o1", "o2"}}, {"cft", cft}}}},
             {"connections", json::array()}};
    SystemModel m = load_system(doc);
    auto f = fx::build_fixture("or_single");
    tg::BindingMap b;
    b.literals["c.b1"] = f.bindings.literals.at("c.b1");
    b.literals["c.b2"] = f.bindings.literals.at("c.b2");
    b.monitors["c.f"] = f.bindings.monitors.at("c.f");
    b.monitors["c.g"] = f.bindings.monitors.at("c.f");
    auto cases = tg::generate_cross_tests(m, Scope::parse("all", m), b, f.library);
    CHECK(cases.size() == 2);  // merged over both targets
    for (const auto& tc : cases) {
      CHECK(tc.targets.size() == 2);
      for (const auto& mon : tc.monitors) CHECK(mon.role != tg::MonitorRole::Unpredicted);
    }
  }

  TEST_CASE("suite survives a JSON round trip") {
    const auto& s = study();
    auto suite = tg::build_suite(s.model, {Scope::parse("camera", s.model)}, s.bindings, s.library, true);
    CHECK(suite.model_hash == tg::model_hash(s.model));
    auto back = tg::TestSuite::from_json(suite.to_json());
    CHECK(back.to_json() == suite.to_json());
    CHECK(back.id == suite.id);
    auto lib = back.library();
    for (const auto& tc : back.cases)
      for (const auto& b : tc.btms) CHECK(lib.count(b.template_name) == 1);
    CHECK_THROWS_AS(tg::TestSuite::from_json(json{{"cases", 3}}), SchemaError);
  }

  TEST_CASE("same scope twice adds no cases") {
    const auto& s = study();
    Scope cam = Scope::parse("camera", s.model);
    auto once = tg::build_suite(s.model, {cam}, s.bindings, s.library, false);
    auto twice = tg::build_suite(s.model, {cam, cam}, s.bindings, s.library, false);
    CHECK(once.cases.size() == twice.cases.size());
    CHECK(once.id == twice.id);
  }

  TEST_CASE("binding map round trip") {
    const auto& s = study();
    auto back = tg::BindingMap::from_json(s.bindings.to_json());
    CHECK(back.to_json() == s.bindings.to_json());
    CHECK_THROWS_AS(tg::BindingMap::from_json(json::array()), SchemaError);
  }

  TEST_CASE("dry run checks paths against the simulation") {
    const auto& s = study();
    auto suite = tg::build_suite(s.model, {Scope::parse("camera", s.model)}, s.bindings, s.library, false);
    auto reg = sim::standard_registry();
    CHECK(tg::dry_run(suite, s.config, reg).empty());
    auto renamed = suite;
    for (auto& tc : renamed.cases)
      for (auto& b : tc.btms) b.bindings["target"] = "m_Nowhere.pixel";
    CHECK_FALSE(tg::dry_run(renamed, s.config, reg).empty());
    auto bad_mon = suite;
    bad_mon.cases[0].monitors[0].spec.signal = "m_Camera.nothing";
    CHECK_FALSE(tg::dry_run(bad_mon, s.config, reg).empty());
  }
}
