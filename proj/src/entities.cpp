#include "cftv/entities.hpp"

#include <algorithm>
#include <map>

namespace cftv::sim {

using nlohmann::json;

std::int64_t decode_frame_id(const std::vector<std::uint8_t>& image) {
  std::int64_t id = 0;
  for (int i = 3; i >= 0; --i) id = (id << 4) | (image.size() > static_cast<std::size_t>(i) ? image[i] & 0xf : 0);
  return id;
}

namespace {

ImageGeometry geometry(const EntitySetup& s) {
  ImageGeometry g;
  g.rows = s.integer("rows", g.rows);
  g.cols = s.integer("cols", g.cols);
  if (g.rows < 2 || g.cols < 4) throw BadParameter(s.name() + ": image too small");
  return g;
}

std::int64_t permille(const EntitySetup& s, const std::string& key, double fallback) {
  double v = s.real(key, fallback);
  if (v < 0.0 || v > 1.0) throw BadParameter(s.name() + "." + key + " must lie in [0, 1]");
  return static_cast<std::int64_t>(v * 1000.0 + 0.5);
}

// --- Camera ---------------------------------------------------------------------

// Renders a background frame with a square traffic sign that appears at
// sign_appear, grows by sign_growth pixels per frame period and disappears at
// sign_vanish. Sends the observable pixel buffer on `image` every period.
class Camera final : public Entity {
 public:
  explicit Camera(EntitySetup& s)
      : geo_(geometry(s)),
        pixel_(geo_.size(), 0),
        period_(ScalarVar::Kind::Int, Value(s.time("period", 100 * kMillisecond))),
        background_(s.integer("background", 64)),
        sign_value_(s.integer("sign_value", 200)),
        appear_(s.time("sign_appear", 28500 * kMillisecond)),
        vanish_(s.time("sign_vanish", 31 * kSecond)),
        step_(s.time("sign_step", 100 * kMillisecond)),
        initial_(s.integer("sign_initial", 6)),
        growth_(s.integer("sign_growth", 8)),
        row_(s.integer("sign_row", 205)),
        col_(s.integer("sign_col", 500)) {
    if (period_.get_int() <= 0 || step_ <= 0) throw BadParameter(s.name() + ": period must be positive");
    for (auto v : {background_, sign_value_})
      if (v < 0 || v > 255) throw BadParameter(s.name() + ": pixel values must be bytes");
    s.outport("image");
    s.signal("frame_id");
    s.injectable("pixel", pixel_);
    s.injectable("period", period_);
  }

  void on_start(Context& ctx) override { ctx.schedule(period_.get_int(), 0); }

  void on_timer(Context& ctx, int) override {
    render(ctx.now());
    Bytes frame = pixel_.snapshot();
    ctx.publish("frame_id", decode_frame_id(*frame));
    ctx.send("image", frame);
    std::int64_t period = period_.get_int();
    if (period <= 0) ctx.fault("non-positive sampling period");
    ctx.schedule(period, 0);
  }

 private:
  void render(Time now) {
    auto px = pixel_.shadow();
    std::fill(px.begin(), px.end(), static_cast<std::uint8_t>(background_));
    ++frame_;
    for (int i = 0; i < 4; ++i) px[i] = static_cast<std::uint8_t>((frame_ >> (4 * i)) & 0xf);
    if (now < appear_ || now >= vanish_) return;
    std::int64_t h = initial_ + growth_ * ((now - appear_) / step_);
    std::int64_t top = std::max<std::int64_t>(row_ - h / 2, 0);
    std::int64_t left = std::max<std::int64_t>(col_ - h / 2, 0);
    std::int64_t bottom = std::min(top + h, geo_.rows);
    std::int64_t right = std::min(left + h, geo_.cols);
    for (std::int64_t r = top; r < bottom; ++r)
      std::fill(px.begin() + r * geo_.cols + left, px.begin() + r * geo_.cols + right,
                static_cast<std::uint8_t>(sign_value_));
  }

  ImageGeometry geo_;
  ByteArrayVar pixel_;
  ScalarVar period_;
  std::int64_t background_, sign_value_;
  Time appear_, vanish_, step_;
  std::int64_t initial_, growth_, row_, col_;
  std::int64_t frame_ = 0;
};

// --- CircleRecog ----------------------------------------------------------------

// Finds the bounding box of sign-coloured pixels. If at least theta_detect of
// the box is sign-coloured, sends a segment record and a distance estimate.
class CircleRecog final : public Entity {
 public:
  explicit CircleRecog(EntitySetup& s)
      : geo_(geometry(s)),
        sign_value_(s.integer("sign_value", 200)),
        theta_(permille(s, "theta_detect", 0.5)),
        distance_scale_(s.integer("distance_scale", 6000)) {
    s.inport("image");
    s.outport("segment");
    s.outport("distance");
  }

  void on_message(Context& ctx, const std::string&, const Value& payload) override {
    if (!payload.is_bytes() || !payload.as_bytes() || payload.as_bytes()->size() != geo_.size()) return;
    const auto& px = *payload.as_bytes();
    std::int64_t top = geo_.rows, bottom = -1, left = geo_.cols, right = -1, count = 0;
    for (std::int64_t r = 0; r < geo_.rows; ++r) {
      const std::uint8_t* row = px.data() + r * geo_.cols;
      for (std::int64_t c = 0; c < geo_.cols; ++c) {
        if (row[c] != sign_value_) continue;
        ++count;
        top = std::min(top, r);
        bottom = std::max(bottom, r);
        left = std::min(left, c);
        right = std::max(right, c);
      }
    }
    if (count == 0) return;
    std::int64_t h = bottom - top + 1;
    std::int64_t w = right - left + 1;
    std::int64_t fill = count * 1000 / (h * w);
    if (fill < theta_) return;
    ctx.send("segment", Record{{"rows", h}, {"cols", w}, {"fill", fill}});
    ctx.send("distance", distance_scale_ / h);
  }

 private:
  ImageGeometry geo_;
  std::int64_t sign_value_;
  std::int64_t theta_;
  std::int64_t distance_scale_;
};

// --- SlClassif ------------------------------------------------------------------

// Emits the configured speed limit for a segment that is tall enough and at
// least theta uncorrupted; nothing otherwise.
class SlClassif final : public Entity {
 public:
  explicit SlClassif(EntitySetup& s)
      : theta_(permille(s, "theta", 0.8)),
        min_rows_(s.integer("min_rows", 30)),
        limit_(s.integer("limit", 80)) {
    s.inport("segment");
    s.outport("limit");
  }

  void on_message(Context& ctx, const std::string&, const Value& payload) override {
    if (!payload.is_record()) return;
    const auto& rec = payload.as_record();
    auto rows = rec.find("rows");
    auto fill = rec.find("fill");
    if (rows == rec.end() || fill == rec.end() || !rows->second.is_int() || !fill->second.is_int()) return;
    if (rows->second.as_int() < min_rows_ || fill->second.as_int() < theta_) return;
    ctx.send("limit", limit_);
  }

 private:
  std::int64_t theta_, min_rows_, limit_;
};

// --- CoastingAssist -------------------------------------------------------------

// Tracks the latest speed limit and distance. Publishes `limit` whenever it
// changes and sends a hint for every limit message once a distance is known.
class CoastingAssist final : public Entity {
 public:
  explicit CoastingAssist(EntitySetup& s) : alive_(ScalarVar::Kind::Int, Value(1)) {
    s.inport("sl");
    s.inport("di");
    s.outport("hint");
    s.signal("limit");
    s.injectable("alive", alive_);
  }

  void on_message(Context& ctx, const std::string& port, const Value& payload) override {
    if (alive_.get_int() == 0) return;
    if (port == "di") {
      distance_ = payload;
      return;
    }
    if (!(payload == limit_)) {
      limit_ = payload;
      ctx.publish("limit", limit_);
    }
    if (!distance_.is_null()) ctx.send("hint", Record{{"limit", limit_}, {"distance", distance_}});
  }

 private:
  ScalarVar alive_;
  Value limit_;
  Value distance_;
};

// --- HMI ------------------------------------------------------------------------

class Hmi final : public Entity {
 public:
  explicit Hmi(EntitySetup& s) {
    s.inport("video");
    s.inport("hint");
    s.outport("display");
    s.signal("video");
    s.signal("limit");
  }

  void on_message(Context& ctx, const std::string& port, const Value& payload) override {
    if (port == "video") {
      ctx.publish("video", payload);
      return;
    }
    Value limit;
    if (payload.is_record())
      if (auto it = payload.as_record().find("limit"); it != payload.as_record().end()) limit = it->second;
    if (!(limit == limit_)) {
      limit_ = limit;
      ctx.publish("limit", limit_);
    }
    ctx.send("display", payload);
  }

 private:
  Value limit_;
};

// --- Channel --------------------------------------------------------------------

// Transaction-level link: forwards `in` to `out` after `latency`, dropping
// messages according to the drop policy or while `loss` is set.
class Channel final : public Entity {
 public:
  explicit Channel(EntitySetup& s)
      : latency_(ScalarVar::Kind::Int, Value(s.time("latency", 0))),
        loss_(ScalarVar::Kind::Int, Value(0)) {
    std::string drop = s.text("drop", "none");
    try {
      parse_drop(drop);
    } catch (const std::logic_error&) {
      throw BadParameter(s.name() + ".drop: expected none, all, every:N or random:P");
    }
    if (latency_.get_int() < 0) throw BadParameter(s.name() + ".latency must not be negative");
    s.inport("in");
    s.outport("out");
    s.injectable("latency", latency_);
    s.injectable("loss", loss_);
  }

  void parse_drop(const std::string& drop) {
    if (drop == "none") {
    } else if (drop == "all") {
      every_ = 1;
    } else if (drop.rfind("every:", 0) == 0) {
      every_ = std::stoll(drop.substr(6));
      if (every_ <= 0) throw std::out_of_range("N");
    } else if (drop.rfind("random:", 0) == 0) {
      random_ = std::stod(drop.substr(7));
      if (random_ < 0.0 || random_ > 1.0) throw std::out_of_range("P");
    } else {
      throw std::invalid_argument(drop);
    }
  }

  void on_message(Context& ctx, const std::string&, const Value& payload) override {
    ++count_;
    if (loss_.get_int() != 0) return;
    if (every_ > 0 && count_ % every_ == 0) return;
    if (random_ > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(ctx.rng()) < random_) return;
    Time latency = latency_.get_int();
    if (latency <= 0) {
      ctx.send("out", payload);
      return;
    }
    int tag = next_tag_++;
    pending_[tag] = payload;
    ctx.schedule(latency, tag);
  }

  void on_timer(Context& ctx, int tag) override {
    auto it = pending_.find(tag);
    if (it == pending_.end()) return;
    Value v = std::move(it->second);
    pending_.erase(it);
    ctx.send("out", v);
  }

 private:
  ScalarVar latency_;
  ScalarVar loss_;
  std::int64_t every_ = 0;
  double random_ = 0.0;
  std::int64_t count_ = 0;
  int next_tag_ = 0;
  std::map<int, Value> pending_;
};

// --- Logic ----------------------------------------------------------------------

// Boolean component for small fixtures. Params:
//   inports: [names], flags: [fault flag names], period,
//   outputs: {port: rule}, rule = name | 0/1 | {"and":[rules]} | {"or":[rules]}
// Every period each output is recomputed from the flags and the latest
// input values and sent as 0/1.
class Logic final : public Entity {
 public:
  explicit Logic(EntitySetup& s) : period_(s.time("period", 100 * kMillisecond)) {
    if (period_ <= 0) throw BadParameter(s.name() + ".period must be positive");
    const json& p = s.params();
    for (const auto& name : p.value("inports", json::array())) {
      s.inport(name.get<std::string>());
      inputs_[name.get<std::string>()] = 0;
    }
    for (const auto& name : p.value("flags", json::array())) {
      auto var = std::make_unique<ScalarVar>(ScalarVar::Kind::Int, Value(0));
      s.injectable(name.get<std::string>(), *var);
      flags_[name.get<std::string>()] = std::move(var);
    }
    const json outputs_doc = p.value("outputs", json::object());
    for (const auto& [port, rule] : outputs_doc.items()) {
      check(s, rule);
      s.outport(port);
      outputs_.emplace_back(port, rule);
    }
  }

  void on_start(Context& ctx) override { ctx.schedule(period_, 0); }

  void on_message(Context&, const std::string& port, const Value& payload) override {
    inputs_[port] = payload.is_number() && payload.as_number() != 0.0 ? 1 : 0;
  }

  void on_timer(Context& ctx, int) override {
    for (const auto& [port, rule] : outputs_) ctx.send(port, eval(rule));
    ctx.schedule(period_, 0);
  }

 private:
  void check(const EntitySetup& s, const json& rule) const {
    if (rule.is_number_integer()) return;
    if (rule.is_string()) {
      auto n = rule.get<std::string>();
      if (!inputs_.count(n) && !flags_.count(n))
        throw BadParameter(s.name() + ": rule references unknown name '" + n + "'");
      return;
    }
    if (rule.is_object() && rule.size() == 1 && (rule.contains("and") || rule.contains("or"))) {
      for (const auto& r : rule.begin().value()) check(s, r);
      return;
    }
    throw BadParameter(s.name() + ": malformed rule " + rule.dump());
  }

  std::int64_t eval(const json& rule) const {
    if (rule.is_number_integer()) return rule.get<std::int64_t>() != 0;
    if (rule.is_string()) {
      auto n = rule.get<std::string>();
      if (auto f = flags_.find(n); f != flags_.end()) return f->second->get_int() != 0;
      return inputs_.at(n);
    }
    bool is_and = rule.contains("and");
    for (const auto& r : rule.begin().value()) {
      bool v = eval(r) != 0;
      if (is_and && !v) return 0;
      if (!is_and && v) return 1;
    }
    return is_and ? 1 : 0;
  }

  Time period_;
  std::map<std::string, std::int64_t> inputs_;
  std::map<std::string, std::unique_ptr<ScalarVar>> flags_;
  std::vector<std::pair<std::string, json>> outputs_;
};

template <typename T>
EntityFactory factory() {
  return [](EntitySetup& s) -> std::unique_ptr<Entity> { return std::make_unique<T>(s); };
}

}  // namespace

EntityRegistry standard_registry() {
  EntityRegistry r;
  r.add("Camera", factory<Camera>());
  r.add("CircleRecog", factory<CircleRecog>());
  r.add("SlClassif", factory<SlClassif>());
  r.add("CoastingAssist", factory<CoastingAssist>());
  r.add("HMI", factory<Hmi>());
  r.add("Channel", factory<Channel>());
  r.add("Logic", factory<Logic>());
  return r;
}

}  // namespace cftv::sim
