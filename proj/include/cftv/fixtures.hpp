#pragma once

#include <map>
#include <string>
#include <vector>

#include "cftv/testgen.hpp"
#include "cftv/verifier.hpp"

namespace cftv::fx {

/// Small Boolean system with a known relation between its CFT and its
/// simulation, used to check the verification oracle. Every basic event is
/// a fault flag of a Logic entity, every OFM an output port of one.
struct Fixture {
  std::string name;
  nlohmann::json model_doc;
  SystemModel model;
  sim::SimulationConfig config;
  nlohmann::json bindings_doc;
  tg::BindingMap bindings;
  nlohmann::json btm_doc;
  tg::BtmLibrary library;
  /// Base-suite outcome per "ofm|lit+lit" over scope "all".
  std::map<std::string, ver::Outcome> expected;
  /// Expected discovered paths of the cross suite as "lit+lit -> ofm".
  std::vector<std::string> expected_paths;
};

/// or_single, and_single, chain, fan_out (faithful); masked_and, extra_path
/// (seeded defects).
std::vector<std::string> fixture_names();
Fixture build_fixture(const std::string& name);  // BadParameter for unknown names

/// Writes <name>.{cft,sim,bind}.json and btm/stuck_at.btm.json into `dir`.
std::vector<std::string> export_fixture(const std::string& name, const std::string& dir);

}  // namespace cftv::fx
