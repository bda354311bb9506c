#pragma once

#include <string>
#include <vector>

#include "cftv/testgen.hpp"

namespace cftv::cs {

/// Desk-scale coasting assistant: camera -> circle recognition -> speed
/// limit classification -> coasting assistant -> HMI.
struct CaseStudy {
  nlohmann::json model_doc;
  SystemModel model;
  sim::SimulationConfig config;
  nlohmann::json bindings_doc;
  tg::BindingMap bindings;
  std::vector<nlohmann::json> btm_docs;
  tg::BtmLibrary library;
};

CaseStudy build_case_study();

/// The four analysis scopes of the generated-test overview: camera,
/// coasting assistant, everything but the HMI, and the whole system.
std::vector<Scope> overview_scopes(const SystemModel& model);

enum class Level { Direct, Transaction };

/// Transaction level inserts one Channel entity per link (latency per bus
/// role); application entities are left untouched. Direct returns `config`.
sim::SimulationConfig refine_channels(const sim::SimulationConfig& config, Level level);

/// Model counterpart: one channel component per connection with basic
/// events message_delay and message_loss. Application components are
/// copied unchanged.
nlohmann::json refine_model(const nlohmann::json& model_doc);

/// Binding map extended with the channel literals and monitors.
nlohmann::json refine_bindings(const nlohmann::json& bindings_doc, const nlohmann::json& refined_model);

/// Writes coasting{,_tx}.{cft,sim,bind}.json and btm/*.btm.json into `dir`.
std::vector<std::string> export_case_study(const std::string& dir);

}  // namespace cftv::cs
