#pragma once

#include <map>
#include <string>
#include <vector>

#include "cftv/analysis.hpp"
#include "cftv/btm.hpp"
#include "cftv/monitors.hpp"
#include "json.hpp"

namespace cftv::tg {

/// How one CFT literal (basic event or IFM, "component.id") is enacted.
struct LiteralBinding {
  std::string target;                  // injector path, bound to ${target}
  std::vector<std::string> templates;  // BTM template names
  nlohmann::json params = nlohmann::json::object();  // other placeholders
  std::map<std::string, nlohmann::json> template_params;  // per-template overrides
};

/// `.bind.json`: {"literals": {lit: {...}}, "monitors": {ofm: {...}}}.
struct BindingMap {
  std::map<std::string, LiteralBinding> literals;
  std::map<std::string, mon::MonitorSpec> monitors;

  static BindingMap from_json(const nlohmann::json& doc);  // SchemaError
  static BindingMap from_file(const std::string& path);
  nlohmann::json to_json() const;
};

using BtmLibrary = std::map<std::string, btm::BtmDefinition>;

/// Loads every `*.btm.json` in a directory, keyed by BTM name.
BtmLibrary load_btm_library(const std::string& dir);

struct BoundBtm {
  std::string literal;
  std::string template_name;
  std::map<std::string, std::string> bindings;  // placeholder -> expression text
};

enum class MonitorRole { Target, Predicted, Unpredicted };

struct TestMonitor {
  std::string ofm;            // "component.ofm"
  std::string failure_class;  // class name declared by the OFM
  MonitorRole role = MonitorRole::Target;
  mon::MonitorSpec spec;
};

struct TestCase {
  std::string id;
  std::vector<std::string> scope;
  std::vector<std::string> targets;  // first is the one the case was generated for
  CutSet cut;
  bool cross = false;
  std::vector<BoundBtm> btms;
  std::vector<TestMonitor> monitors;
  /// Leave-one-out literal sets; empty for single-literal cuts.
  std::vector<std::vector<std::string>> subsets;
};

struct TestSuite {
  std::string id;  // digest of the cases
  nlohmann::json model;
  std::string model_hash;
  std::map<std::string, nlohmann::json> templates;  // used BTM sources by name
  std::vector<TestCase> cases;

  nlohmann::json to_json() const;
  static TestSuite from_json(const nlohmann::json& doc);  // SchemaError
  static TestSuite from_file(const std::string& path);
  BtmLibrary library() const;
};

std::string model_hash(const SystemModel& model);

/// One case per (scope OFM, minimal cut, template combination); the target
/// OFM is the only monitor. Throws MissingBinding, EmptyScope,
/// UnknownTemplate, UnboundPlaceholder.
std::vector<TestCase> generate_test_cases(const SystemModel& model, const Scope& scope, const BindingMap& bindings,
                                          const BtmLibrary& library);

/// Like generate_test_cases, but every case monitors all scope OFMs; OFMs
/// none of whose cuts is contained in the injected cut are marked
/// unpredicted. Cases with identical BTMs and monitors are merged.
std::vector<TestCase> generate_cross_tests(const SystemModel& model, const Scope& scope,
                                           const BindingMap& bindings, const BtmLibrary& library);

/// Assembles a suite over several scopes (base cases, plus cross cases if
/// requested). Case order: scope order, then generation order.
TestSuite build_suite(const SystemModel& model, const std::vector<Scope>& scopes, const BindingMap& bindings,
                      const BtmLibrary& library, bool cross);

/// Dry-run check that every BTM path and monitor signal of the suite exists
/// in a simulation built from `config`. Returns one message per problem.
std::vector<std::string> dry_run(const TestSuite& suite, const sim::SimulationConfig& config,
                                 const sim::EntityRegistry& registry);

std::string to_string(MonitorRole r);

}  // namespace cftv::tg
