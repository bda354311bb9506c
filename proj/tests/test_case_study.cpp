#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "cftv/case_study.hpp"
#include "cftv/entities.hpp"
#include "cftv/verifier.hpp"
#include "doctest.h"

using namespace cftv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const cs::CaseStudy& study() {
  static const cs::CaseStudy s = cs::build_case_study();
  return s;
}

std::optional<Time> first_limit(const sim::Trace& t) {
  for (const auto& r : t.of("m_SlClassif.limit"))
    if (!r.value.is_null()) return r.t;
  return std::nullopt;
}

std::optional<Time> first_limit_with(const std::string& tpl) {
  const auto& s = study();
  const auto& lb = s.bindings.literals.at("camera.pixel_failure");
  std::map<std::string, std::string> b{{"target", lb.target}};
  for (const auto& [k, v] : lb.params.items()) b[k] = btm::placeholder_text(v);
  auto def = btm::instantiate(s.library.at(tpl), b);
  auto run = ver::run_injection(s.config, sim::standard_registry(), {def});
  REQUIRE_FALSE(run.error.has_value());
  return first_limit(run.trace);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("case-study") {
  TEST_CASE("reference run classifies the first limit at 28.8 s") {
    auto ref = ver::run_reference(study().config, sim::standard_registry());
    auto t = first_limit(ref);
    REQUIRE(t.has_value());
    CHECK(*t == 28800 * kMillisecond);
    auto assist = ref.of("m_CoastingAssist.limit");
    auto first = std::find_if(assist.begin(), assist.end(), [](const sim::TraceRecord& r) { return !r.value.is_null(); });
    REQUIRE(first != assist.end());
    CHECK(first->t == 28800 * kMillisecond);
  }

  TEST_CASE("line corruption delays the first limit to 29.1 s") {
    CHECK(first_limit_with("pixel_line_h") == std::optional<Time>(29100 * kMillisecond));
    CHECK(first_limit_with("pixel_line_v") == std::optional<Time>(29100 * kMillisecond));
    CHECK_FALSE(first_limit_with("pixel_scatter").has_value());
  }

  TEST_CASE("generated suite contains the overview rows") {
    const auto& s = study();
    auto suite = tg::build_suite(s.model, cs::overview_scopes(s.model), s.bindings, s.library, false);
    std::set<std::tuple<std::string, std::string, std::string>> rows;
    for (const auto& tc : suite.cases)
      for (const auto& t : tc.targets) {
        std::string cut;
        for (const auto& l : tc.cut.literals) cut += (cut.empty() ? "" : "+") + l;
        std::string scope;
        for (const auto& m : tc.scope) scope += (scope.empty() ? "" : ",") + m;
        rows.insert({scope, cut, t});
      }
    const std::string four = "camera,circleRecog,coastingAssist,slClassif";
    const std::string all = "HMI,camera,circleRecog,coastingAssist,slClassif";
    std::vector<std::tuple<std::string, std::string, std::string>> expected{
        {"camera", "camera.camera_defect", "camera.omission_of_image"},
        {"camera", "camera.content_failure", "camera.frozen_image"},
        {"coastingAssist", "coastingAssist.sl_omission", "coastingAssist.missing_hint"},
        {"coastingAssist", "coastingAssist.di_omission", "coastingAssist.missing_hint"},
        {"coastingAssist", "coastingAssist.ECU_defect", "coastingAssist.missing_hint"},
        {"coastingAssist", "coastingAssist.sl_erroneous", "coastingAssist.erroneous_hint"},
        {four, "camera.content_failure", "coastingAssist.erroneous_hint"},
        {four, "camera.pixel_failure", "coastingAssist.erroneous_hint"},
        {all, "camera.content_failure", "HMI.image_content_failure"},
        {all, "camera.pixel_failure", "HMI.image_content_failure"},
        {all, "camera.samptime_deviation", "HMI.sl_late"}};
    for (const auto& row : expected) {
      CAPTURE(std::get<0>(row));
      CAPTURE(std::get<1>(row));
      CAPTURE(std::get<2>(row));
      CHECK(rows.count(row) == 1);
    }
  }

  TEST_CASE("library holds the named templates") {
    for (const char* n : {"freeze_frame", "pixel_line_h", "pixel_line_v", "pixel_scatter", "omission", "sample_jitter"})
      CHECK(study().library.count(n) == 1);
  }

  TEST_CASE("transaction level inserts one channel per link") {
    const auto& s = study();
    auto tx = cs::refine_channels(s.config, cs::Level::Transaction);
    CHECK(cs::refine_channels(s.config, cs::Level::Direct).to_json() == s.config.to_json());
    CHECK(tx.entities.size() == s.config.entities.size() + s.config.bindings.size());
    for (const auto& e : s.config.entities) {
      const auto* t = tx.entity(e.name);
      REQUIRE(t != nullptr);
      CHECK(t->type == e.type);
      CHECK(t->params == e.params);
    }
    std::size_t channels = 0;
    for (const auto& e : tx.entities) channels += e.type == "Channel";
    CHECK(channels == s.config.bindings.size());
  }

  TEST_CASE("refined model keeps application elements byte-identical") {
    const auto& s = study();
    json refined = cs::refine_model(s.model_doc);
    auto refined_model = load_system(refined);
    CHECK(validate(refined_model).empty());
    std::map<std::string, json> before;
    for (const auto& c : s.model_doc.at("components")) before[c.at("id")] = c;
    std::size_t added = 0;
    for (const auto& c : refined.at("components")) {
      auto it = before.find(c.at("id"));
      if (it == before.end()) {
        ++added;
        std::set<std::string> bes;
        for (const auto& b : c.at("cft").at("basic_events")) bes.insert(b.at("id"));
        CHECK(bes == std::set<std::string>{"message_delay", "message_loss"});
        continue;
      }
      CHECK(c.at("cft").dump() == it->second.at("cft").dump());
    }
    CHECK(added == s.config.bindings.size());
  }

  TEST_CASE("application suite gives the same verdicts at both levels") {
    const auto& s = study();
    Scope scope = Scope::parse("coastingAssist", s.model);
    auto suite = tg::build_suite(s.model, {scope}, s.bindings, s.library, false);
    auto reg = sim::standard_registry();
    auto direct = ver::verify_suite(suite, s.config, reg);
    auto tx = ver::verify_suite(suite, cs::refine_channels(s.config, cs::Level::Transaction), reg);
    REQUIRE(direct.verdicts.size() == tx.verdicts.size());
    for (std::size_t i = 0; i < direct.verdicts.size(); ++i) {
      CAPTURE(direct.verdicts[i].id);
      CHECK(direct.verdicts[i].outcome == tx.verdicts[i].outcome);
      CHECK(direct.verdicts[i].outcome == ver::Outcome::Confirmed);
    }
  }

  TEST_CASE("message loss on the limit link gives a missing hint") {
    const auto& s = study();
    json refined = cs::refine_model(s.model_doc);
    auto model = load_system(refined);
    auto bindings = tg::BindingMap::from_json(cs::refine_bindings(s.bindings_doc, refined));
    auto config = cs::refine_channels(s.config, cs::Level::Transaction);
    auto suite = tg::build_suite(model, {Scope::parse("can_limit,coastingAssist", model)}, bindings, s.library, false);
    std::vector<tg::TestCase> keep;
    for (const auto& tc : suite.cases)
      if (tc.cut.literals == std::vector<std::string>{"can_limit.message_loss"} &&
          tc.targets.front() == "coastingAssist.missing_hint")
        keep.push_back(tc);
    REQUIRE(keep.size() == 1);
    suite.cases = keep;
    auto report = ver::verify_suite(suite, config, sim::standard_registry());
    REQUIRE(report.verdicts.size() == 1);
    CHECK(report.verdicts[0].outcome == ver::Outcome::Confirmed);
    CHECK(report.verdicts[0].monitors.at(0).verdict.classification.has(FailureClass::Halt));
  }

  TEST_CASE("raising the classification threshold never detects earlier") {
    const auto& s = study();
    auto reg = sim::standard_registry();
    std::optional<Time> prev = Time{0};
    for (double theta : {0.5, 0.7, 0.8, 0.9, 0.99}) {
      auto c = s.config;
      for (auto& e : c.entities)
        if (e.name == "m_SlClassif") e.params["theta"] = theta;
      c.trace = {"m_SlClassif.limit"};
      sim::Simulation sim(c, reg);
      auto t = first_limit(sim.run());
      CAPTURE(theta);
      if (!prev) {
        CHECK_FALSE(t.has_value());
      } else if (t) {
        CHECK(*t >= *prev);
      }
      prev = t;
    }
  }

  TEST_CASE("reference trace is stable") {
    auto reg = sim::standard_registry();
    sim::Simulation a(study().config, reg), b(study().config, reg);
    CHECK(a.run().digest() == b.run().digest());
  }

  TEST_CASE("shipped data files match the exporter") {
    fs::path tmp = fs::temp_directory_path() / "cftv_cs_export";
    fs::remove_all(tmp);
    auto written = cs::export_case_study(tmp.string());
    CHECK(written.size() >= 7);
    fs::path shipped = fs::path(CFTV_DATA_DIR) / "coasting";
    for (const auto& f : written) {
      fs::path rel = fs::relative(f, tmp);
      CAPTURE(rel.string());
      REQUIRE(fs::exists(shipped / rel));
      CHECK(slurp(shipped / rel) == slurp(f));
    }
    fs::remove_all(tmp);
  }
}
