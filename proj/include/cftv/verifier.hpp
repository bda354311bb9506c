#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cftv/testgen.hpp"

namespace cftv::ver {

enum class Outcome { Confirmed, NotReproduced, MaskedSubsetEffect, UnmodeledPath, InjectionError };
std::string to_string(Outcome o);

struct MonitorOutcome {
  std::string ofm;
  tg::MonitorRole role = tg::MonitorRole::Target;
  std::string failure_class;
  mon::MonitorVerdict verdict;
  bool triggered = false;
  std::size_t evidence_omitted = 0;  // entries beyond the report limit, when loaded from JSON
};

struct SubsetRun {
  std::vector<std::string> literals;
  std::vector<std::string> triggered_targets;
  std::optional<std::string> error;
};

/// Unpredicted monitor that reacted: the injected literals reach an OFM the
/// CFT does not connect them to.
struct Finding {
  std::vector<std::string> literals;
  std::string ofm;
  std::vector<std::string> observed;  // class names
};

struct Verdict {
  std::string id;
  std::vector<std::string> scope;
  std::vector<std::string> targets;
  std::vector<std::string> cut;
  std::vector<std::string> templates;
  Outcome outcome = Outcome::NotReproduced;
  Outcome target_status = Outcome::NotReproduced;  // Confirmed or NotReproduced
  std::vector<MonitorOutcome> monitors;
  std::vector<SubsetRun> subsets;
  std::vector<Finding> findings;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
  std::string trace_digest;
  std::string trace_file;  // set when traces are written out
};

/// Candidate CFT edit: inside `component`, connect `from` (IFM or basic
/// event reached by the injection) to `to` (OFM on the path to the observed
/// effect).
struct SuggestedEdit {
  std::string component;
  std::string from;
  std::string to;
  friend auto operator<=>(const SuggestedEdit&, const SuggestedEdit&) = default;
};

struct DiscoveredPath {
  std::vector<std::string> literals;
  std::string ofm;
  std::vector<std::string> observed;
  std::vector<std::string> tests;
  std::vector<SuggestedEdit> suggestions;
};

struct VerificationReport {
  std::string model_hash;
  std::string config_hash;
  std::string suite_id;
  std::vector<Verdict> verdicts;  // sorted by id
  std::vector<DiscoveredPath> discovered;

  std::size_t count(Outcome o) const;
  /// Any outcome other than Confirmed, or any discovered path.
  bool has_findings() const;
  nlohmann::json to_json() const;
  static VerificationReport from_json(const nlohmann::json& doc);
  /// Table mirroring Scope | Fault injection | Failure monitor | Verdict.
  std::string to_text() const;
};

struct VerifyOptions {
  unsigned jobs = 1;
  std::string trace_dir;  // empty = do not write traces
};

/// Injection-free run. Cached in memory by config hash and, when the
/// CFTV_CACHE_DIR environment variable names a directory, on disk.
sim::Trace run_reference(const sim::SimulationConfig& config, const sim::EntityRegistry& registry);
std::size_t reference_cache_hits();
void clear_reference_cache();

struct InjectionRun {
  sim::Trace trace;
  std::optional<std::string> error;  // BTM action failure or entity fault
};

InjectionRun run_injection(const sim::SimulationConfig& config, const sim::EntityRegistry& registry,
                           const std::vector<btm::BtmDefinition>& btms);

/// `run_config` must already trace every monitored signal.
Verdict execute_test(const tg::TestCase& tc, const sim::Trace& ref, const sim::SimulationConfig& run_config,
                     const sim::EntityRegistry& registry, const tg::BtmLibrary& library,
                     sim::Trace* full_trace = nullptr);

/// Suggested edits for an unpredicted effect, restricted to `scope`.
std::vector<SuggestedEdit> suggest_edits(const SystemModel& model, const std::vector<std::string>& scope,
                                         const std::vector<std::string>& literals, const std::string& ofm);

/// Config with the monitored signals of the suite added to the trace list.
sim::SimulationConfig run_config_for(const tg::TestSuite& suite, const sim::SimulationConfig& config);

VerificationReport assemble_report(std::vector<Verdict> verdicts, const tg::TestSuite& suite,
                                   const sim::SimulationConfig& config);

VerificationReport verify_suite(const tg::TestSuite& suite, const sim::SimulationConfig& config,
                                const sim::EntityRegistry& registry, const VerifyOptions& options = {});

}  // namespace cftv::ver
