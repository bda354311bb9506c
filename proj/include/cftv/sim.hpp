#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cftv/errors.hpp"
#include "cftv/time.hpp"
#include "cftv/value.hpp"
#include "json.hpp"

namespace cftv::sim {

// --- configuration ------------------------------------------------------------

struct EntityConfig {
  std::string type;
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

/// Port-to-port link "instance.outport" -> "instance.inport". Direct links
/// deliver with function-call semantics (same timestamp, synchronously).
struct BindingConfig {
  std::string from;
  std::string to;
};

struct SimulationConfig {
  std::vector<EntityConfig> entities;
  std::vector<BindingConfig> bindings;
  /// Signal names to record. "*" records everything, "inst.*" one instance.
  std::vector<std::string> trace;
  Time stop_time = kSecond;
  std::uint64_t seed = 0;

  /// Throws BadParameter on malformed documents.
  static SimulationConfig from_json(const nlohmann::json& doc);
  static SimulationConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
  /// Hex digest of the canonical JSON form.
  std::string hash() const;

  const EntityConfig* entity(const std::string& name) const;
};

// --- traces -------------------------------------------------------------------

struct TraceRecord {
  Time t = 0;
  std::string signal;
  Value value;  // canonical (byte arrays already digested)

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Timestamped record of every traced signal write and port message, in
/// commit order.
struct Trace {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> signals;  // declared traced signals, sorted
  std::vector<TraceRecord> records;

  /// Records of one signal in order.
  std::vector<TraceRecord> of(const std::string& signal) const;
  bool declares(const std::string& signal) const;

  /// JSON lines: a header line, then one {"t_ps","sig","v"} object per record.
  std::string to_jsonl() const;
  static Trace from_jsonl(const std::string& text);
  std::string digest() const;
};

// --- injectable primitives ----------------------------------------------------

/// Index selection on an array variable: a single index or a half-open
/// range with optional step, e.g. `[5]`, `[10:20]`, `[0:100:7]`.
struct Slice {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t step = 1;
  bool single = false;
};

/// "inst.var[slice]" split into base path and optional slice.
struct InjectorPath {
  std::string base;
  std::optional<Slice> slice;

  /// Throws UnknownInjectable for malformed paths.
  static InjectorPath parse(const std::string& text);
};

/// Wrapper around a simulation primitive that supports force/release.
/// Reads return the forced value while forced, the shadow value otherwise;
/// writes always go to the shadow.
class Injectable {
 public:
  virtual ~Injectable() = default;
  virtual Value read(const std::optional<Slice>& slice) const = 0;
  virtual void force(const std::optional<Slice>& slice, const Value& value) = 0;
  virtual void release(const std::optional<Slice>& slice) = 0;
};

class ScalarVar final : public Injectable {
 public:
  enum class Kind { Int, Real, Bool, String, Any };

  ScalarVar(Kind kind, Value initial);

  /// Observable value.
  const Value& get() const { return forced_ ? *forced_ : shadow_; }
  std::int64_t get_int() const { return get().as_int(); }
  double get_real() const { return get().as_number(); }
  void set(Value v);
  bool is_forced() const { return forced_.has_value(); }

  Value read(const std::optional<Slice>& slice) const override;
  void force(const std::optional<Slice>& slice, const Value& value) override;
  void release(const std::optional<Slice>& slice) override;

 private:
  Value convert(const Value& v) const;

  Kind kind_;
  Value shadow_;
  std::optional<Value> forced_;
};

/// Byte array with per-element force masks (e.g. an image buffer).
class ByteArrayVar final : public Injectable {
 public:
  explicit ByteArrayVar(std::size_t size, std::uint8_t fill = 0);

  std::size_t size() const { return shadow_.size(); }
  std::span<std::uint8_t> shadow() { return shadow_; }
  std::uint8_t get(std::size_t i) const { return mask_[i] ? forced_[i] : shadow_[i]; }
  std::size_t forced_count() const { return forced_count_; }
  /// Copy of the observable contents.
  Bytes snapshot() const;

  Value read(const std::optional<Slice>& slice) const override;
  void force(const std::optional<Slice>& slice, const Value& value) override;
  void release(const std::optional<Slice>& slice) override;

 private:
  template <typename Fn>
  void for_each_index(const std::optional<Slice>& slice, Fn fn) const;

  std::vector<std::uint8_t> shadow_;
  std::vector<std::uint8_t> forced_;
  std::vector<std::uint8_t> mask_;
  std::size_t forced_count_ = 0;
};

// --- entities -----------------------------------------------------------------

class Simulation;

/// Handle given to entity callbacks. All state mutations go through it.
class Context {
 public:
  Context(Simulation& sim, std::size_t entity) : sim_(sim), entity_(entity) {}

  Time now() const;
  const std::string& name() const;
  void send(const std::string& outport, const Value& payload);
  void schedule(Time delay, int tag);
  void publish(const std::string& signal, const Value& value);
  std::mt19937_64& rng();
  [[noreturn]] void fault(const std::string& message);

 private:
  Simulation& sim_;
  std::size_t entity_;
};

class Entity {
 public:
  virtual ~Entity() = default;
  virtual void on_start(Context&) {}
  virtual void on_timer(Context&, int /*tag*/) {}
  virtual void on_message(Context&, const std::string& /*inport*/, const Value& /*payload*/) {}
};

/// Declaration surface handed to entity factories: ports, published
/// signals, injectable variables and typed parameter access.
class EntitySetup {
 public:
  EntitySetup(std::string name, const nlohmann::json& params) : name_(std::move(name)), params_(params) {}

  const std::string& name() const { return name_; }
  void inport(const std::string& port) { inports_.push_back(port); }
  void outport(const std::string& port) { outports_.push_back(port); }
  void signal(const std::string& sig) { signals_.push_back(sig); }
  void injectable(const std::string& var, Injectable& target) { injectables_.emplace_back(var, &target); }

  // Parameter access; BadParameter on type errors.
  Time time(const std::string& key, Time fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  double real(const std::string& key, double fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  const nlohmann::json& params() const { return params_; }

 private:
  friend class Simulation;
  std::string name_;
  const nlohmann::json& params_;
  std::vector<std::string> inports_;
  std::vector<std::string> outports_;
  std::vector<std::string> signals_;
  std::vector<std::pair<std::string, Injectable*>> injectables_;
};

using EntityFactory = std::function<std::unique_ptr<Entity>(EntitySetup&)>;

class EntityRegistry {
 public:
  void add(const std::string& type, EntityFactory factory) { factories_[type] = std::move(factory); }
  const EntityFactory* find(const std::string& type) const;
  std::vector<std::string> types() const;

 private:
  std::map<std::string, EntityFactory> factories_;
};

/// Something evaluated by the kernel at every evaluation point (before the
/// events of a timestamp, after every callback, and at requested wake-ups).
class EvaluationHook {
 public:
  virtual ~EvaluationHook() = default;
  virtual void evaluate(Simulation& sim) = 0;
  /// Earliest time strictly after `now` at which evaluation is wanted.
  virtual std::optional<Time> next_wakeup(Time now) const = 0;
};

/// Raised when an entity callback fails; carries the trace up to the fault.
class EntityFault : public Error {
 public:
  EntityFault(const std::string& message, Trace partial)
      : Error("EntityFault", message), partial_(std::move(partial)) {}
  const Trace& partial() const { return partial_; }

 private:
  Trace partial_;
};

// --- simulation instance ------------------------------------------------------

/// A configured world. Strictly single-threaded; independent instances may
/// run on different threads.
class Simulation {
 public:
  /// Throws UnknownEntityType, BadParameter, UnboundPort.
  Simulation(const SimulationConfig& config, const EntityRegistry& registry);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  Time now() const { return now_; }
  const SimulationConfig& config() const { return config_; }
  std::size_t entity_count() const { return entities_.size(); }

  /// Dispatches every event with time <= t_stop. Returns the trace so far.
  const Trace& run_until(Time t_stop);
  const Trace& run() { return run_until(config_.stop_time); }
  const Trace& trace() const { return trace_; }

  /// Throws UnknownInjectable, TypeMismatch.
  void force(const std::string& path, const Value& value);
  void release(const std::string& path);
  bool has_injectable(const std::string& path) const;
  std::vector<std::string> injectable_paths() const;

  /// Observable value of an injectable or last published signal value.
  /// Throws UnknownSignal.
  Value read_signal(const std::string& path) const;
  bool has_signal(const std::string& signal) const;

  /// Non-owning; the hook must outlive the run.
  void add_hook(EvaluationHook* hook) { hooks_.push_back(hook); }

 private:
  friend class Context;

  struct Slot {
    std::string name;
    std::unique_ptr<Entity> entity;
    std::mt19937_64 rng;
  };
  struct InportState {
    std::unique_ptr<ScalarVar> payload;
    std::unique_ptr<ScalarVar> enabled;
    std::unique_ptr<ScalarVar> delay;
  };
  struct Event {
    Time t;
    std::uint64_t seq;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
  };

  Injectable& resolve(const InjectorPath& p) const;
  void push(Time t, std::function<void()> action);
  void send(std::size_t from, const std::string& port, const Value& payload);
  void deliver(std::size_t to, const std::string& port, const Value& payload);
  void publish(std::size_t from, const std::string& signal, const Value& value);
  void evaluate_hooks();
  void guarded(const std::function<void()>& fn);

  SimulationConfig config_;
  std::vector<Slot> entities_;
  std::map<std::string, std::size_t> by_name_;
  std::map<std::string, Injectable*> injectables_;
  std::map<std::string, std::unique_ptr<InportState>> inports_;  // "inst.port"
  std::map<std::string, std::vector<std::pair<std::size_t, std::string>>> links_;
  std::map<std::string, bool> traced_;  // declared signal -> traced?
  std::map<std::string, Value> last_values_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::vector<EvaluationHook*> hooks_;
  Trace trace_;
  Time now_ = 0;
  bool started_ = false;
};

}  // namespace cftv::sim
