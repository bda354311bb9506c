#include "cftv/sim.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cftv/hash.hpp"

namespace cftv::sim {

using nlohmann::json;

// --- configuration ------------------------------------------------------------

namespace {

Time json_time(const json& j, const std::string& what) {
  if (j.is_number_integer()) return j.get<Time>();
  if (j.is_string()) return parse_time(j.get<std::string>());
  throw BadParameter(what + " must be a time string or integer picoseconds");
}

std::pair<std::string, std::string> split_port(const std::string& ref) {
  auto dot = ref.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size())
    throw UnboundPort("port reference '" + ref + "' must be 'instance.port'");
  return {ref.substr(0, dot), ref.substr(dot + 1)};
}

}  // namespace

SimulationConfig SimulationConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw BadParameter("simulation config must be a JSON object");
  SimulationConfig cfg;
  try {
    for (const auto& e : doc.value("entities", json::array())) {
      EntityConfig ec;
      ec.type = e.at("type").get<std::string>();
      ec.name = e.at("name").get<std::string>();
      if (e.contains("params")) ec.params = e.at("params");
      if (!ec.params.is_object()) throw BadParameter(ec.name + ": params must be an object");
      cfg.entities.push_back(std::move(ec));
    }
    for (const auto& b : doc.value("bindings", json::array()))
      cfg.bindings.push_back({b.at("from").get<std::string>(), b.at("to").get<std::string>()});
    for (const auto& t : doc.value("trace", json::array())) cfg.trace.push_back(t.get<std::string>());
    if (doc.contains("stop_time")) cfg.stop_time = json_time(doc.at("stop_time"), "stop_time");
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw BadParameter(std::string("malformed simulation config: ") + e.what());
  }
  if (cfg.stop_time < 0) throw BadParameter("stop_time must not be negative");
  return cfg;
}

SimulationConfig SimulationConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadParameter("cannot open " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw BadParameter(path + ": " + e.what());
  }
}

json SimulationConfig::to_json() const {
  json ents = json::array();
  for (const auto& e : entities) ents.push_back({{"type", e.type}, {"name", e.name}, {"params", e.params}});
  json binds = json::array();
  for (const auto& b : bindings) binds.push_back({{"from", b.from}, {"to", b.to}});
  return {{"entities", ents}, {"bindings", binds}, {"trace", trace},
          {"stop_time", stop_time}, {"seed", seed}};
}

std::string SimulationConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

const EntityConfig* SimulationConfig::entity(const std::string& name) const {
  for (const auto& e : entities)
    if (e.name == name) return &e;
  return nullptr;
}

// --- traces -------------------------------------------------------------------

std::vector<TraceRecord> Trace::of(const std::string& signal) const {
  std::vector<TraceRecord> out;
  for (const auto& r : records)
    if (r.signal == signal) out.push_back(r);
  return out;
}

bool Trace::declares(const std::string& signal) const {
  return std::binary_search(signals.begin(), signals.end(), signal);
}

std::string Trace::to_jsonl() const {
  std::string out = json{{"config_hash", config_hash}, {"seed", seed}, {"signals", signals}}.dump();
  out += '\n';
  for (const auto& r : records) {
    out += json{{"t_ps", r.t}, {"sig", r.signal}, {"v", cftv::to_json(r.value)}}.dump();
    out += '\n';
  }
  return out;
}

Trace Trace::from_jsonl(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (header) {
      t.config_hash = j.value("config_hash", "");
      t.seed = j.value("seed", std::uint64_t{0});
      t.signals = j.value("signals", std::vector<std::string>{});
      header = false;
      continue;
    }
    t.records.push_back({j.at("t_ps").get<Time>(), j.at("sig").get<std::string>(), from_json(j.at("v"))});
  }
  return t;
}

std::string Trace::digest() const { return hex64(fnv1a64(to_jsonl())); }

// --- injectable primitives ----------------------------------------------------

InjectorPath InjectorPath::parse(const std::string& text) {
  auto trim = [](std::string s) {
    auto a = s.find_first_not_of(" \t");
    auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  InjectorPath p;
  auto open = text.find('[');
  p.base = trim(text.substr(0, open));
  if (p.base.empty()) throw UnknownInjectable("empty injector path '" + text + "'");
  if (open == std::string::npos) return p;
  auto close = text.find(']', open);
  if (close == std::string::npos || !trim(text.substr(close + 1)).empty())
    throw UnknownInjectable("malformed index in '" + text + "'");
  std::string inner = text.substr(open + 1, close - open - 1);
  std::vector<std::int64_t> parts;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ':')) {
    item = trim(item);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
      throw UnknownInjectable("malformed index in '" + text + "'");
    parts.push_back(v);
  }
  Slice s;
  if (parts.size() == 1) {
    s = {parts[0], parts[0] + 1, 1, true};
  } else if (parts.size() == 2 || parts.size() == 3) {
    s = {parts[0], parts[1], parts.size() == 3 ? parts[2] : 1, false};
    if (s.step <= 0) throw UnknownInjectable("slice step must be positive in '" + text + "'");
  } else {
    throw UnknownInjectable("malformed index in '" + text + "'");
  }
  if (s.begin < 0 || s.end < s.begin) throw UnknownInjectable("bad range in '" + text + "'");
  p.slice = s;
  return p;
}

ScalarVar::ScalarVar(Kind kind, Value initial) : kind_(kind), shadow_(convert(initial)) {}

Value ScalarVar::convert(const Value& v) const {
  switch (kind_) {
    case Kind::Any:
      return v;
    case Kind::Int:
      if (v.is_int()) return v;
      if (v.is_bool()) return static_cast<std::int64_t>(v.as_bool());
      if (v.is_real() && v.as_number() == static_cast<double>(static_cast<std::int64_t>(v.as_number())))
        return static_cast<std::int64_t>(v.as_number());
      break;
    case Kind::Real:
      if (v.is_number()) return v.as_number();
      break;
    case Kind::Bool:
      if (v.is_bool()) return v;
      if (v.is_int() && (v.as_int() == 0 || v.as_int() == 1)) return v.as_int() == 1;
      break;
    case Kind::String:
      if (v.is_string()) return v;
      break;
  }
  throw TypeMismatch("value of type " + v.type_name() + " not convertible to variable type");
}

void ScalarVar::set(Value v) { shadow_ = convert(v); }

Value ScalarVar::read(const std::optional<Slice>& slice) const {
  if (slice) throw TypeMismatch("scalar variable cannot be indexed");
  return get();
}

void ScalarVar::force(const std::optional<Slice>& slice, const Value& value) {
  if (slice) throw TypeMismatch("scalar variable cannot be indexed");
  forced_ = convert(value);
}

void ScalarVar::release(const std::optional<Slice>& slice) {
  if (slice) throw TypeMismatch("scalar variable cannot be indexed");
  forced_.reset();
}

ByteArrayVar::ByteArrayVar(std::size_t size, std::uint8_t fill)
    : shadow_(size, fill), forced_(size, 0), mask_(size, 0) {}

template <typename Fn>
void ByteArrayVar::for_each_index(const std::optional<Slice>& slice, Fn fn) const {
  if (!slice) {
    for (std::size_t i = 0; i < shadow_.size(); ++i) fn(i);
    return;
  }
  if (static_cast<std::size_t>(slice->end) > shadow_.size())
    throw UnknownInjectable("index " + std::to_string(slice->end - 1) + " out of range (size " +
                            std::to_string(shadow_.size()) + ")");
  for (std::int64_t i = slice->begin; i < slice->end; i += slice->step) fn(static_cast<std::size_t>(i));
}

Bytes ByteArrayVar::snapshot() const {
  auto out = std::make_shared<std::vector<std::uint8_t>>(shadow_);
  if (forced_count_ > 0)
    for (std::size_t i = 0; i < shadow_.size(); ++i)
      if (mask_[i]) (*out)[i] = forced_[i];
  return out;
}

Value ByteArrayVar::read(const std::optional<Slice>& slice) const {
  if (!slice) return snapshot();
  if (slice->single) {
    Value out;
    for_each_index(slice, [&](std::size_t i) { out = static_cast<std::int64_t>(get(i)); });
    return out;
  }
  auto out = std::make_shared<std::vector<std::uint8_t>>();
  for_each_index(slice, [&](std::size_t i) { out->push_back(get(i)); });
  return Bytes(out);
}

void ByteArrayVar::force(const std::optional<Slice>& slice, const Value& value) {
  std::size_t count = 0;
  for_each_index(slice, [&](std::size_t) { ++count; });
  std::vector<std::uint8_t> values;
  if (value.is_int()) {
    if (value.as_int() < 0 || value.as_int() > 255)
      throw TypeMismatch("byte value out of range: " + std::to_string(value.as_int()));
    values.assign(count, static_cast<std::uint8_t>(value.as_int()));
  } else if (value.is_bytes() && value.as_bytes() && value.as_bytes()->size() == count) {
    values = *value.as_bytes();
  } else if (value.is_list() && value.as_list().size() == count) {
    for (const auto& e : value.as_list()) {
      if (!e.is_int() || e.as_int() < 0 || e.as_int() > 255)
        throw TypeMismatch("list element not a byte value");
      values.push_back(static_cast<std::uint8_t>(e.as_int()));
    }
  } else {
    throw TypeMismatch("cannot force byte array selection of " + std::to_string(count) +
                       " elements with " + value.type_name());
  }
  std::size_t k = 0;
  for_each_index(slice, [&](std::size_t i) {
    if (!mask_[i]) ++forced_count_;
    mask_[i] = 1;
    forced_[i] = values[k++];
  });
}

void ByteArrayVar::release(const std::optional<Slice>& slice) {
  for_each_index(slice, [&](std::size_t i) {
    if (mask_[i]) --forced_count_;
    mask_[i] = 0;
  });
}

// --- entity setup -------------------------------------------------------------

Time EntitySetup::time(const std::string& key, Time fallback) const {
  if (!params_.contains(key)) return fallback;
  try {
    return json_time(params_.at(key), name_ + "." + key);
  } catch (const BadParameter& e) {
    throw BadParameter(name_ + "." + key + ": " + e.what());
  }
}

std::int64_t EntitySetup::integer(const std::string& key, std::int64_t fallback) const {
  if (!params_.contains(key)) return fallback;
  if (!params_.at(key).is_number_integer())
    throw BadParameter(name_ + "." + key + " must be an integer");
  return params_.at(key).get<std::int64_t>();
}

double EntitySetup::real(const std::string& key, double fallback) const {
  if (!params_.contains(key)) return fallback;
  if (!params_.at(key).is_number()) throw BadParameter(name_ + "." + key + " must be a number");
  return params_.at(key).get<double>();
}

std::string EntitySetup::text(const std::string& key, const std::string& fallback) const {
  if (!params_.contains(key)) return fallback;
  if (!params_.at(key).is_string()) throw BadParameter(name_ + "." + key + " must be a string");
  return params_.at(key).get<std::string>();
}

const EntityFactory* EntityRegistry::find(const std::string& type) const {
  auto it = factories_.find(type);
  return it == factories_.end() ? nullptr : &it->second;
}

std::vector<std::string> EntityRegistry::types() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : factories_) out.push_back(k);
  return out;
}

// --- context ------------------------------------------------------------------

Time Context::now() const { return sim_.now_; }
const std::string& Context::name() const { return sim_.entities_[entity_].name; }
void Context::send(const std::string& outport, const Value& payload) { sim_.send(entity_, outport, payload); }
void Context::publish(const std::string& signal, const Value& value) { sim_.publish(entity_, signal, value); }
std::mt19937_64& Context::rng() { return sim_.entities_[entity_].rng; }

void Context::schedule(Time delay, int tag) {
  if (delay < 0) fault("negative timer delay");
  Time t = (delay > kTimeMax - sim_.now_) ? kTimeMax : sim_.now_ + delay;
  std::size_t e = entity_;
  Simulation* sim = &sim_;
  sim_.push(t, [sim, e, tag] {
    Context ctx(*sim, e);
    sim->entities_[e].entity->on_timer(ctx, tag);
  });
}

void Context::fault(const std::string& message) {
  throw EntityFault(name() + ": " + message, sim_.trace_);
}

// --- simulation ---------------------------------------------------------------

namespace {

bool matches(const std::vector<std::string>& patterns, const std::string& signal) {
  for (const auto& p : patterns) {
    if (p == "*" || p == signal) return true;
    if (p.size() > 2 && p.ends_with(".*") && signal.rfind(p.substr(0, p.size() - 1), 0) == 0)
      return true;
  }
  return false;
}

}  // namespace

Simulation::Simulation(const SimulationConfig& config, const EntityRegistry& registry)
    : config_(config) {
  trace_.config_hash = config_.hash();
  trace_.seed = config_.seed;
  std::vector<std::pair<std::string, std::vector<std::string>>> outports;  // per entity
  std::vector<std::vector<std::string>> inport_lists;
  for (const auto& ec : config_.entities) {
    const EntityFactory* factory = registry.find(ec.type);
    if (!factory) throw UnknownEntityType("unknown entity type '" + ec.type + "'");
    if (by_name_.count(ec.name) || ec.name.empty() || ec.name.find('.') != std::string::npos)
      throw BadParameter("instance name '" + ec.name + "' is empty, dotted or duplicated");
    EntitySetup setup(ec.name, ec.params);
    std::unique_ptr<Entity> entity = (*factory)(setup);
    std::size_t idx = entities_.size();
    by_name_[ec.name] = idx;
    std::mt19937_64 rng(config_.seed ^ fnv1a64(ec.name));
    entities_.push_back({ec.name, std::move(entity), rng});

    for (auto& [var, target] : setup.injectables_) injectables_[ec.name + "." + var] = target;
    for (const auto& port : setup.inports_) {
      auto st = std::make_unique<InportState>();
      st->payload = std::make_unique<ScalarVar>(ScalarVar::Kind::Any, Value{});
      st->enabled = std::make_unique<ScalarVar>(ScalarVar::Kind::Int, Value(1));
      st->delay = std::make_unique<ScalarVar>(ScalarVar::Kind::Int, Value(0));
      std::string key = ec.name + "." + port;
      injectables_[key] = st->payload.get();
      injectables_[key + ".enabled"] = st->enabled.get();
      injectables_[key + ".delay"] = st->delay.get();
      inports_[key] = std::move(st);
    }
    for (const auto& port : setup.outports_) traced_[ec.name + "." + port] = false;
    for (const auto& sig : setup.signals_) traced_[ec.name + "." + sig] = false;
  }

  std::set<std::string> fed;
  for (const auto& b : config_.bindings) {
    auto [fi, fp] = split_port(b.from);
    auto [ti, tp] = split_port(b.to);
    if (!by_name_.count(fi) || !traced_.count(b.from) || inports_.count(b.from))
      throw UnboundPort("binding source '" + b.from + "' is not a declared outport");
    if (!by_name_.count(ti) || !inports_.count(b.to))
      throw UnboundPort("binding target '" + b.to + "' is not a declared inport");
    if (!fed.insert(b.to).second) throw BadParameter("inport '" + b.to + "' bound twice");
    links_[b.from].emplace_back(by_name_.at(ti), tp);
  }

  for (auto& [sig, traced] : traced_) {
    traced = matches(config_.trace, sig);
    if (traced) trace_.signals.push_back(sig);
  }
}

Simulation::~Simulation() = default;

void Simulation::push(Time t, std::function<void()> action) {
  queue_.push(Event{t, seq_++, std::move(action)});
}

void Simulation::guarded(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const EntityFault&) {
    throw;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EntityFault(e.what(), trace_);
  }
}

void Simulation::send(std::size_t from, const std::string& port, const Value& payload) {
  std::string key = entities_[from].name + "." + port;
  auto it = traced_.find(key);
  if (it == traced_.end() || inports_.count(key))
    throw EntityFault(entities_[from].name + ": send on undeclared outport '" + port + "'", trace_);
  last_values_[key] = payload;
  if (it->second) trace_.records.push_back({now_, key, canonical(payload)});
  if (auto l = links_.find(key); l != links_.end())
    for (const auto& [to, inport] : l->second) deliver(to, inport, payload);
}

void Simulation::deliver(std::size_t to, const std::string& port, const Value& payload) {
  InportState& st = *inports_.at(entities_[to].name + "." + port);
  const Value& enabled = st.enabled->get();
  if (enabled.is_int() && enabled.as_int() == 0) return;
  Time delay = st.delay->get_int();
  auto receive = [this, to, port, payload] {
    InportState& s = *inports_.at(entities_[to].name + "." + port);
    s.payload->set(payload);
    Value effective = s.payload->get();
    Context ctx(*this, to);
    entities_[to].entity->on_message(ctx, port, effective);
  };
  if (delay > 0) push(now_ + delay, receive);
  else receive();
}

void Simulation::publish(std::size_t from, const std::string& signal, const Value& value) {
  std::string key = entities_[from].name + "." + signal;
  auto it = traced_.find(key);
  if (it == traced_.end())
    throw EntityFault(entities_[from].name + ": publish of undeclared signal '" + signal + "'", trace_);
  last_values_[key] = value;
  if (it->second) trace_.records.push_back({now_, key, canonical(value)});
}

void Simulation::evaluate_hooks() {
  for (EvaluationHook* h : hooks_) h->evaluate(*this);
}

const Trace& Simulation::run_until(Time t_stop) {
  if (t_stop < now_) throw BadParameter("run_until target lies in the past");
  if (!started_) {
    started_ = true;
    evaluate_hooks();
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      guarded([&] {
        Context ctx(*this, i);
        entities_[i].entity->on_start(ctx);
      });
      evaluate_hooks();
    }
  }
  while (true) {
    Time next = queue_.empty() ? kTimeMax : queue_.top().t;
    for (const EvaluationHook* h : hooks_)
      if (auto w = h->next_wakeup(now_); w && *w > now_) next = std::min(next, *w);
    if (next > t_stop) break;
    now_ = next;
    evaluate_hooks();
    while (!queue_.empty() && queue_.top().t == now_) {
      Event ev = queue_.top();
      queue_.pop();
      guarded(ev.action);
      evaluate_hooks();
    }
  }
  now_ = t_stop;
  return trace_;
}

Injectable& Simulation::resolve(const InjectorPath& p) const {
  auto it = injectables_.find(p.base);
  if (it == injectables_.end()) throw UnknownInjectable("no injectable '" + p.base + "'");
  return *it->second;
}

void Simulation::force(const std::string& path, const Value& value) {
  InjectorPath p = InjectorPath::parse(path);
  resolve(p).force(p.slice, value);
}

void Simulation::release(const std::string& path) {
  InjectorPath p = InjectorPath::parse(path);
  resolve(p).release(p.slice);
}

bool Simulation::has_injectable(const std::string& path) const {
  try {
    return injectables_.count(InjectorPath::parse(path).base) > 0;
  } catch (const Error&) {
    return false;
  }
}

std::vector<std::string> Simulation::injectable_paths() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : injectables_) out.push_back(k);
  return out;
}

Value Simulation::read_signal(const std::string& path) const {
  InjectorPath p;
  try {
    p = InjectorPath::parse(path);
  } catch (const UnknownInjectable& e) {
    throw UnknownSignal(e.what());
  }
  if (auto it = injectables_.find(p.base); it != injectables_.end()) return it->second->read(p.slice);
  if (!p.slice && traced_.count(path)) {
    auto v = last_values_.find(path);
    return v == last_values_.end() ? Value{} : v->second;
  }
  throw UnknownSignal("no signal or injectable '" + path + "'");
}

bool Simulation::has_signal(const std::string& signal) const { return traced_.count(signal) > 0; }

}  // namespace cftv::sim
