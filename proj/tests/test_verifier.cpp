#include <algorithm>
#include <set>

#include "cftv/case_study.hpp"
#include "cftv/entities.hpp"
#include "cftv/fixtures.hpp"
#include "cftv/verifier.hpp"
#include "doctest.h"

using namespace cftv;
using nlohmann::json;

namespace {

std::string join_plus(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "+") + s;
  return out;
}

ver::VerificationReport run_fixture(const fx::Fixture& f, bool cross) {
  auto suite = tg::build_suite(f.model, {Scope::parse("all", f.model)}, f.bindings, f.library, cross);
  return ver::verify_suite(suite, f.config, sim::standard_registry());
}

const cs::CaseStudy& study() {
  static const cs::CaseStudy s = cs::build_case_study();
  return s;
}

tg::TestSuite study_suite(const std::string& scope, bool cross) {
  const auto& s = study();
  return tg::build_suite(s.model, {Scope::parse(scope, s.model)}, s.bindings, s.library, cross);
}

const ver::Verdict* find_verdict(const ver::VerificationReport& r, const std::string& lit, const std::string& tpl,
                                 bool cross) {
  for (const auto& v : r.verdicts)
    if (v.cut == std::vector<std::string>{lit} && v.templates == std::vector<std::string>{tpl} &&
        (v.id.rfind("x:", 0) == 0) == cross)
      return &v;
  return nullptr;
}

}  // namespace

TEST_SUITE("verifier") {
  TEST_CASE("fixtures produce their expected outcomes") {
    for (const auto& name : fx::fixture_names()) {
      CAPTURE(name);
      auto f = fx::build_fixture(name);
      auto report = run_fixture(f, false);
      std::map<std::string, ver::Outcome> got;
      for (const auto& v : report.verdicts) got[v.targets.front() + "|" + join_plus(v.cut)] = v.outcome;
      CHECK(got == f.expected);
    }
  }

  TEST_CASE("cross suites discover exactly the seeded extra path") {
    for (const auto& name : fx::fixture_names()) {
      CAPTURE(name);
      auto f = fx::build_fixture(name);
      auto report = run_fixture(f, true);
      std::vector<std::string> paths;
      for (const auto& d : report.discovered) paths.push_back(join_plus(d.literals) + " -> " + d.ofm);
      CHECK(paths == f.expected_paths);
      CHECK(report.has_findings() == (name == "masked_and" || name == "extra_path"));
    }
  }

  TEST_CASE("camera defect halts the image stream") {
    auto report = ver::verify_suite(study_suite("camera", false), study().config, sim::standard_registry());
    const auto* v = find_verdict(report, "camera.camera_defect", "omission", false);
    REQUIRE(v != nullptr);
    CHECK(v->outcome == ver::Outcome::Confirmed);
    REQUIRE(v->monitors.size() == 1);
    CHECK(v->monitors[0].verdict.classification.has(FailureClass::Halt));
    CHECK_FALSE(v->trace_digest.empty());
  }

  TEST_CASE("line corruption reaches the late OFM the model does not connect") {
    const auto& s = study();
    auto suite = study_suite("camera,circleRecog,slClassif,coastingAssist", true);
    // Only the cross cases for the horizontal line are needed here.
    std::vector<tg::TestCase> keep;
    for (const auto& tc : suite.cases)
      if (tc.cross && tc.cut.literals == std::vector<std::string>{"camera.pixel_failure"} &&
          tc.btms[0].template_name == "pixel_line_h")
        keep.push_back(tc);
    REQUIRE(keep.size() == 1);
    suite.cases = keep;
    auto report = ver::verify_suite(suite, s.config, sim::standard_registry());
    REQUIRE(report.verdicts.size() == 1);
    const auto& v = report.verdicts[0];
    CHECK(v.outcome == ver::Outcome::UnmodeledPath);
    CHECK(v.target_status == ver::Outcome::NotReproduced);
    bool late = false;
    for (const auto& fnd : v.findings)
      if (fnd.ofm == "coastingAssist.sl_late") late = true;
    CHECK(late);
    bool suggested = false;
    for (const auto& d : report.discovered)
      for (const auto& e : d.suggestions)
        if (e.component == "slClassif" && e.from == "slClassif.erroneous_circle_recognition" &&
            e.to == "slClassif.sl_information_too_late")
          suggested = true;
    CHECK(suggested);
  }

  TEST_CASE("edit suggestions follow the model") {
    auto edits = ver::suggest_edits(study().model, {"camera", "circleRecog", "slClassif", "coastingAssist"},
                                    {"camera.pixel_failure"}, "coastingAssist.sl_late");
    CHECK(std::find(edits.begin(), edits.end(),
                    ver::SuggestedEdit{"slClassif", "slClassif.erroneous_circle_recognition",
                                       "slClassif.sl_information_too_late"}) !=
          edits.end());
    for (const auto& e : edits) CHECK(e.component != "HMI");
  }

  TEST_CASE("reference runs are cached per configuration") {
    ver::clear_reference_cache();
    auto f = fx::build_fixture("chain");
    auto reg = sim::standard_registry();
    auto a = ver::run_reference(f.config, reg);
    std::size_t hits = ver::reference_cache_hits();
    auto b = ver::run_reference(f.config, reg);
    CHECK(ver::reference_cache_hits() == hits + 1);
    CHECK(a.digest() == b.digest());
    auto other = f.config;
    other.stop_time = 2 * kSecond;
    ver::run_reference(other, reg);
    CHECK(ver::reference_cache_hits() == hits + 1);
  }

  TEST_CASE("reports are deterministic and round-trip") {
    auto f = fx::build_fixture("extra_path");
    auto a = run_fixture(f, true);
    auto b = run_fixture(f, true);
    CHECK(a.to_json() == b.to_json());
    auto back = ver::VerificationReport::from_json(a.to_json());
    CHECK(back.to_json() == a.to_json());
    CHECK(a.to_json().dump().find("UnmodeledPath") != std::string::npos);
    CHECK(a.to_text().find("Confirmed") != std::string::npos);
    CHECK(a.count(ver::Outcome::Confirmed) + a.count(ver::Outcome::UnmodeledPath) == a.verdicts.size());
  }

  TEST_CASE("parallel verification matches sequential") {
    auto f = fx::build_fixture("fan_out");
    auto suite = tg::build_suite(f.model, {Scope::parse("all", f.model)}, f.bindings, f.library, true);
    auto reg = sim::standard_registry();
    auto seq = ver::verify_suite(suite, f.config, reg);
    ver::VerifyOptions opt;
    opt.jobs = 3;
    auto par = ver::verify_suite(suite, f.config, reg, opt);
    CHECK(seq.to_json() == par.to_json());
  }

  TEST_CASE("broken injection path is an injection error") {
    auto f = fx::build_fixture("or_single");
    auto suite = tg::build_suite(f.model, {Scope::parse("all", f.model)}, f.bindings, f.library, false);
    suite.cases[0].btms[0].bindings["target"] = "L_nowhere.flag";
    auto report = ver::verify_suite(suite, f.config, sim::standard_registry());
    bool error = false;
    for (const auto& v : report.verdicts)
      if (v.outcome == ver::Outcome::InjectionError) error = v.error.has_value();
    CHECK(error);
    CHECK(report.has_findings());
  }
}
