#include "cftv/case_study.hpp"

#include <filesystem>

#include "cftv/io.hpp"

namespace cftv::cs {

using nlohmann::json;

namespace {

json fm(const std::string& id, const std::string& cls, const std::string& port, const std::string& source = "") {
  json j{{"id", id}, {"class", cls}, {"port", port}};
  if (!source.empty()) j["source"] = source;
  return j;
}

json be(const std::string& id, double fit) { return {{"id", id}, {"fit", fit}}; }

json edge(const std::string& src, const std::string& dst) { return {{"src", src}, {"dst", dst}}; }

json camera() {
  return {{"id", "camera"},
          {"inports", json::array()},
          {"outports", {"image"}},
          {"cft",
           {{"basic_events",
             {be("camera_defect", 100), be("content_failure", 50), be("pixel_failure", 200),
              be("samptime_deviation", 20)}},
            {"ofms",
             {fm("omission_of_image", "halt", "image"), fm("frozen_image", "content", "image"),
              fm("wrong_pixels", "content", "image"), fm("image_timing", "late", "image")}},
            {"edges",
             {edge("camera_defect", "omission_of_image"), edge("content_failure", "frozen_image"),
              edge("pixel_failure", "wrong_pixels"), edge("samptime_deviation", "image_timing")}}}}};
}

json circle_recog() {
  return {{"id", "circleRecog"},
          {"inports", {"image"}},
          {"outports", {"segment", "distance"}},
          {"cft",
           {{"ifms",
             {fm("img_omission", "halt", "image", "omission_of_image"),
              fm("img_frozen", "content", "image", "frozen_image"),
              fm("img_corrupt", "content", "image", "wrong_pixels"),
              fm("img_timing", "late", "image", "image_timing")}},
            {"ofms",
             {fm("segment_omission", "halt", "segment"), fm("erroneous_circle_recognition", "content", "segment"),
              fm("segment_late", "late", "segment"), fm("distance_omission", "halt", "distance")}},
            {"gates", {{{"id", "g_erroneous"}, {"kind", "OR"}}}},
            {"edges",
             {edge("img_omission", "segment_omission"), edge("img_frozen", "g_erroneous"),
              edge("img_corrupt", "g_erroneous"), edge("g_erroneous", "erroneous_circle_recognition"),
              edge("img_timing", "segment_late"), edge("img_omission", "distance_omission")}}}}};
}

json sl_classif() {
  return {{"id", "slClassif"},
          {"inports", {"segment"}},
          {"outports", {"limit"}},
          {"cft",
           {{"ifms",
             {fm("segment_omission", "halt", "segment", "segment_omission"),
              fm("erroneous_circle_recognition", "content", "segment", "erroneous_circle_recognition"),
              fm("segment_late", "late", "segment", "segment_late")}},
            {"ofms",
             {fm("sl_omission", "halt", "limit"), fm("erroneous_sl", "content", "limit"),
              fm("sl_information_too_late", "late", "limit")}},
            {"edges",
             {edge("segment_omission", "sl_omission"), edge("erroneous_circle_recognition", "erroneous_sl"),
              edge("segment_late", "sl_information_too_late")}}}}};
}

json coasting_assist() {
  return {{"id", "coastingAssist"},
          {"inports", {"sl", "di"}},
          {"outports", {"hint"}},
          {"cft",
           {{"ifms",
             {fm("sl_omission", "halt", "sl", "sl_omission"), fm("sl_erroneous", "content", "sl", "erroneous_sl"),
              fm("sl_delayed", "late", "sl", "sl_information_too_late"),
              fm("di_omission", "halt", "di", "distance_omission")}},
            {"basic_events", {be("ECU_defect", 300)}},
            {"ofms",
             {fm("missing_hint", "halt", "hint"), fm("erroneous_hint", "content", "hint"),
              fm("sl_late", "late", "hint")}},
            {"gates", {{{"id", "g_missing"}, {"kind", "OR"}}}},
            {"edges",
             {edge("sl_omission", "g_missing"), edge("di_omission", "g_missing"), edge("ECU_defect", "g_missing"),
              edge("g_missing", "missing_hint"), edge("sl_erroneous", "erroneous_hint"),
              edge("sl_delayed", "sl_late")}}}}};
}

json hmi() {
  return {{"id", "HMI"},
          {"inports", {"video", "hint"}},
          {"outports", {"display"}},
          {"cft",
           {{"ifms",
             {fm("video_frozen", "content", "video", "frozen_image"),
              fm("video_corrupt", "content", "video", "wrong_pixels"),
              fm("video_omission", "halt", "video", "omission_of_image"),
              fm("hint_missing", "halt", "hint", "missing_hint"),
              fm("hint_erroneous", "content", "hint", "erroneous_hint"), fm("hint_late", "late", "hint", "sl_late")}},
            {"ofms",
             {fm("image_content_failure", "content", "display"), fm("image_omission", "halt", "display"),
              fm("missing_hint_display", "halt", "display"), fm("erroneous_hint_display", "content", "display"),
              fm("sl_late", "late", "display")}},
            {"gates", {{{"id", "g_image"}, {"kind", "OR"}}}},
            {"edges",
             {edge("video_frozen", "g_image"), edge("video_corrupt", "g_image"),
              edge("g_image", "image_content_failure"), edge("video_omission", "image_omission"),
              edge("hint_missing", "missing_hint_display"), edge("hint_erroneous", "erroneous_hint_display"),
              edge("hint_late", "sl_late")}}}}};
}

json model_json() {
  json cons = json::array();
  for (auto [from, to] : {std::pair{"camera.image", "circleRecog.image"}, std::pair{"camera.image", "HMI.video"},
                          std::pair{"circleRecog.segment", "slClassif.segment"},
                          std::pair{"circleRecog.distance", "coastingAssist.di"},
                          std::pair{"slClassif.limit", "coastingAssist.sl"},
                          std::pair{"coastingAssist.hint", "HMI.hint"}})
    cons.push_back({{"from", from}, {"to", to}});
  return {{"components", {camera(), circle_recog(), sl_classif(), coasting_assist(), hmi()}}, {"connections", cons}};
}

// Simulation instance standing in for each architecture component.
const std::map<std::string, std::string>& instance_of() {
  static const std::map<std::string, std::string> m{{"camera", "m_Camera"},
                                                    {"circleRecog", "m_CircleRecog"},
                                                    {"slClassif", "m_SlClassif"},
                                                    {"coastingAssist", "m_CoastingAssist"},
                                                    {"HMI", "m_HMI"}};
  return m;
}

json config_json() {
  return {{"entities",
           {{{"type", "Camera"}, {"name", "m_Camera"}, {"params", {{"period", "100 ms"}}}},
            {{"type", "CircleRecog"}, {"name", "m_CircleRecog"}, {"params", {{"theta_detect", 0.5}}}},
            {{"type", "SlClassif"},
             {"name", "m_SlClassif"},
             {"params", {{"theta", 0.8}, {"min_rows", 30}, {"limit", 80}}}},
            {{"type", "CoastingAssist"}, {"name", "m_CoastingAssist"}, {"params", json::object()}},
            {{"type", "HMI"}, {"name", "m_HMI"}, {"params", json::object()}}}},
          {"bindings",
           {{{"from", "m_Camera.image"}, {"to", "m_CircleRecog.image"}},
            {{"from", "m_Camera.image"}, {"to", "m_HMI.video"}},
            {{"from", "m_CircleRecog.segment"}, {"to", "m_SlClassif.segment"}},
            {{"from", "m_CircleRecog.distance"}, {"to", "m_CoastingAssist.di"}},
            {{"from", "m_SlClassif.limit"}, {"to", "m_CoastingAssist.sl"}},
            {{"from", "m_CoastingAssist.hint"}, {"to", "m_HMI.hint"}}}},
          {"trace", {"*"}},
          {"stop_time", "32 s"},
          {"seed", 0}};
}

json lit(const std::string& target, std::vector<std::string> templates, json params = json::object()) {
  return {{"target", target}, {"templates", templates}, {"params", params}};
}

json monitor(const std::string& signal, const std::string& eps = "0 s") {
  return {{"signal", signal}, {"eps_t", eps}};
}

json bindings_json() {
  json lits{
      {"camera.camera_defect", lit("m_Camera.period", {"omission"}, {{"value", "3600 s"}})},
      {"camera.content_failure", lit("m_Camera.pixel", {"freeze_frame"}, {{"t_start", "22 s"}})},
      {"camera.pixel_failure",
       lit("m_Camera.pixel", {"pixel_line_h", "pixel_line_v", "pixel_scatter"},
           {{"value", "0x00"}, {"t_start", "23 s"}})},
      {"camera.samptime_deviation",
       lit("m_Camera.period", {"sample_jitter"}, {{"value", "170 ms"}, {"period", "1 s"}})},
      {"circleRecog.img_omission", lit("m_CircleRecog.image.enabled", {"omission"}, {{"value", 0}})},
      {"circleRecog.img_frozen", lit("m_CircleRecog.image", {"freeze_frame"}, {{"t_start", "22 s"}})},
      {"circleRecog.img_corrupt",
       lit("m_Camera.pixel", {"pixel_line_h"}, {{"value", "0x00"}, {"t_start", "23 s"}})},
      {"circleRecog.img_timing", lit("m_CircleRecog.image.delay", {"message_delay"}, {{"value", "500 ms"}})},
      {"slClassif.segment_omission", lit("m_SlClassif.segment.enabled", {"omission"}, {{"value", 0}})},
      {"slClassif.erroneous_circle_recognition",
       lit("m_Camera.pixel", {"pixel_line_h"}, {{"value", "0x00"}, {"t_start", "23 s"}})},
      {"slClassif.segment_late", lit("m_SlClassif.segment.delay", {"message_delay"}, {{"value", "500 ms"}})},
      {"coastingAssist.sl_omission", lit("m_CoastingAssist.sl.enabled", {"omission"}, {{"value", 0}})},
      {"coastingAssist.di_omission", lit("m_CoastingAssist.di.enabled", {"omission"}, {{"value", 0}})},
      {"coastingAssist.ECU_defect", lit("m_CoastingAssist.alive", {"omission"}, {{"value", 0}})},
      {"coastingAssist.sl_erroneous", lit("m_CoastingAssist.sl", {"stuck_at"}, {{"value", 50}})},
      {"coastingAssist.sl_delayed", lit("m_CoastingAssist.sl.delay", {"message_delay"}, {{"value", "500 ms"}})},
      {"HMI.video_frozen", lit("m_HMI.video", {"freeze_frame"}, {{"t_start", "22 s"}})},
      {"HMI.video_corrupt", lit("m_HMI.video", {"stuck_at"}, {{"value", 0}})},
      {"HMI.video_omission", lit("m_HMI.video.enabled", {"omission"}, {{"value", 0}})},
      {"HMI.hint_missing", lit("m_HMI.hint.enabled", {"omission"}, {{"value", 0}})},
      {"HMI.hint_erroneous", lit("m_HMI.hint", {"stuck_at"}, {{"value", "invalid"}})},
      {"HMI.hint_late", lit("m_HMI.hint.delay", {"message_delay"}, {{"value", "500 ms"}})}};
  json mons{{"camera.omission_of_image", monitor("m_Camera.frame_id")},
            {"camera.frozen_image", monitor("m_Camera.frame_id")},
            {"camera.wrong_pixels", monitor("m_Camera.image")},
            // Jitter makes frames lag by seconds; pair frame ids by value over a wide window.
            {"camera.image_timing",
             {{"signal", "m_Camera.frame_id"}, {"eps_t", "0 s"}, {"window", "10 s"}, {"pairing", "value"}}},
            {"circleRecog.segment_omission", monitor("m_CircleRecog.segment")},
            {"circleRecog.erroneous_circle_recognition", monitor("m_CircleRecog.segment")},
            {"circleRecog.segment_late", monitor("m_CircleRecog.segment", "50 ms")},
            {"circleRecog.distance_omission", monitor("m_CircleRecog.distance")},
            {"slClassif.sl_omission", monitor("m_SlClassif.limit")},
            {"slClassif.erroneous_sl", monitor("m_SlClassif.limit", "1 s")},
            {"slClassif.sl_information_too_late", monitor("m_SlClassif.limit", "50 ms")},
            {"coastingAssist.missing_hint", monitor("m_CoastingAssist.hint")},
            {"coastingAssist.erroneous_hint", monitor("m_CoastingAssist.limit", "1 s")},
            {"coastingAssist.sl_late", monitor("m_CoastingAssist.limit", "50 ms")},
            {"HMI.image_content_failure", monitor("m_HMI.video")},
            {"HMI.image_omission", monitor("m_HMI.video")},
            {"HMI.missing_hint_display", monitor("m_HMI.display")},
            {"HMI.erroneous_hint_display", monitor("m_HMI.limit", "1 s")},
            {"HMI.sl_late", monitor("m_HMI.limit", "50 ms")}};
  return {{"literals", lits}, {"monitors", mons}};
}

// --- BTM library ----------------------------------------------------------------

json transition(const std::string& src, const std::string& tgt, const std::string& guard,
                std::vector<std::string> actions) {
  json t{{"src", src}, {"tgt", tgt}, {"actions", actions}};
  if (!guard.empty()) t["guard"] = guard;
  return t;
}

json one_shot(const std::string& name, const std::string& from, const std::string& to) {
  return {{"name", name},
          {"clocks", {"c"}},
          {"placeholders", {"target", "value", "t_start"}},
          {"states", {{{"name", from}, {"initial", true}}, {{"name", to}}}},
          {"transitions", {transition(from, to, "clock(c) == ${t_start}", {"force(${target}, ${value})"})}}};
}

// Row band 200..209 of the 719-column image.
const std::string kRows = "${target}[143800:150990]";

std::vector<std::string> column_slices() {
  std::vector<std::string> out;
  for (int c = 500; c < 510; ++c) out.push_back("${target}[" + std::to_string(c) + ":517680:719]");
  return out;
}

std::vector<json> library_json() {
  std::vector<json> lib;
  lib.push_back({{"name", "freeze_frame"},
                 {"clocks", {"OKTime"}},
                 {"placeholders", {"target", "t_start"}},
                 {"states", {{{"name", "errFree"}, {"initial", true}}, {{"name", "errState1"}}}},
                 {"transitions",
                  {transition("errFree", "errState1", "clock(OKTime) == ${t_start}",
                              {"force(${target}, var(${target}))"})}}});
  lib.push_back({{"name", "pixel_line_h"},
                 {"clocks", {"OKTime"}},
                 {"placeholders", {"target", "value", "t_start"}},
                 {"states", {{{"name", "eInit"}, {"initial", true}}, {{"name", "eFree"}}, {{"name", "eState"}}}},
                 {"transitions",
                  {transition("eInit", "eFree", "", {}),
                   transition("eFree", "eState", "clock(OKTime) == ${t_start}", {"force(" + kRows + ", ${value})"}),
                   transition("eState", "eState", "",
                              {"release(" + kRows + ")", "force(" + kRows + ", ${value})"})}}});
  std::vector<std::string> force_cols, reapply_cols;
  for (const auto& s : column_slices()) {
    force_cols.push_back("force(" + s + ", ${value})");
    reapply_cols.push_back("release(" + s + ")");
  }
  reapply_cols.insert(reapply_cols.end(), force_cols.begin(), force_cols.end());
  lib.push_back({{"name", "pixel_line_v"},
                 {"clocks", {"OKTime"}},
                 {"placeholders", {"target", "value", "t_start"}},
                 {"states", {{{"name", "eInit"}, {"initial", true}}, {{"name", "eFree"}}, {{"name", "eState"}}}},
                 {"transitions",
                  {transition("eInit", "eFree", "", {}),
                   transition("eFree", "eState", "clock(OKTime) == ${t_start}", force_cols),
                   transition("eState", "eState", "", reapply_cols)}}});
  const std::string lattice = "${target}[0:517680:3]";
  lib.push_back({{"name", "pixel_scatter"},
                 {"clocks", {"OKTime"}},
                 {"placeholders", {"target", "value", "t_start"}},
                 {"states", {{{"name", "eFree"}, {"initial", true}}, {{"name", "eState"}}}},
                 {"transitions",
                  {transition("eFree", "eState", "clock(OKTime) == ${t_start}", {"force(" + lattice + ", ${value})"}),
                   transition("eState", "eState", "",
                              {"release(" + lattice + ")", "force(" + lattice + ", ${value})"})}}});
  lib.push_back(one_shot("omission", "running", "omitted"));
  lib.push_back(one_shot("stuck_at", "ok", "stuck"));
  lib.push_back(one_shot("message_delay", "on_time", "delayed"));
  lib.push_back({{"name", "sample_jitter"},
                 {"clocks", {"c"}},
                 {"placeholders", {"target", "value", "t_start", "period"}},
                 {"states", {{{"name", "idle"}, {"initial", true}}, {{"name", "slow"}}, {{"name", "normal"}}}},
                 {"transitions",
                  {transition("idle", "slow", "clock(c) == ${t_start}", {"force(${target}, ${value})", "reset(c)"}),
                   transition("slow", "normal", "clock(c) == ${period}", {"release(${target})", "reset(c)"}),
                   transition("normal", "slow", "clock(c) == ${period}",
                              {"force(${target}, ${value})", "reset(c)"})}}});
  return lib;
}

// --- channel refinement ---------------------------------------------------------

struct Link {
  std::string from, to, channel;
  const char* latency;
};

// Bus role per link: video over MOST, image data over FlexRay, control
// messages over CAN.
const std::vector<Link>& links() {
  static const std::vector<Link> l{
      {"m_Camera.image", "m_CircleRecog.image", "ch_flexray_image", "1 ms"},
      {"m_Camera.image", "m_HMI.video", "ch_most_video", "2 ms"},
      {"m_CircleRecog.segment", "m_SlClassif.segment", "ch_flexray_segment", "1 ms"},
      {"m_CircleRecog.distance", "m_CoastingAssist.di", "ch_can_distance", "5 ms"},
      {"m_SlClassif.limit", "m_CoastingAssist.sl", "ch_can_limit", "5 ms"},
      {"m_CoastingAssist.hint", "m_HMI.hint", "ch_can_hint", "5 ms"}};
  return l;
}

std::string channel_component(const std::string& channel) { return channel.substr(3); }

}  // namespace

sim::SimulationConfig refine_channels(const sim::SimulationConfig& config, Level level) {
  if (level == Level::Direct) return config;
  sim::SimulationConfig out = config;
  out.bindings.clear();
  for (const auto& b : config.bindings) {
    auto it = std::find_if(links().begin(), links().end(),
                           [&](const Link& l) { return l.from == b.from && l.to == b.to; });
    if (it == links().end()) {
      out.bindings.push_back(b);
      continue;
    }
    out.entities.push_back({"Channel", it->channel, {{"latency", it->latency}, {"drop", "none"}}});
    out.bindings.push_back({b.from, it->channel + ".in"});
    out.bindings.push_back({it->channel + ".out", b.to});
  }
  return out;
}

json refine_model(const json& model_doc) {
  json out = model_doc;
  SystemModel model = load_system(model_doc);
  json cons = json::array();
  for (const auto& con : model.connections) {
    std::string from_inst = instance_of().at(con.from.component) + "." + con.from.port;
    std::string to_inst = instance_of().at(con.to.component) + "." + con.to.port;
    auto it = std::find_if(links().begin(), links().end(),
                           [&](const Link& l) { return l.from == from_inst && l.to == to_inst; });
    if (it == links().end()) {
      cons.push_back({{"from", con.from.str()}, {"to", con.to.str()}});
      continue;
    }
    std::string ch = channel_component(it->channel);
    json ifms = json::array(), ofms = json::array(), gates = json::array(), edges = json::array();
    const Component* up = model.component(con.from.component);
    for (const auto& o : up->cft->ofms) {
      if (o.port != con.from.port) continue;
      ifms.push_back(fm("in_" + o.id, o.class_name(), "in", o.id));
      ofms.push_back(fm(o.id, o.class_name(), "out"));
      const char* cause = o.failure_class == FailureClass::Halt   ? "message_loss"
                          : o.failure_class == FailureClass::Late ? "message_delay"
                                                                  : nullptr;
      if (cause) {
        gates.push_back({{"id", "g_" + o.id}, {"kind", "OR"}});
        edges.push_back(edge("in_" + o.id, "g_" + o.id));
        edges.push_back(edge(cause, "g_" + o.id));
        edges.push_back(edge("g_" + o.id, o.id));
      } else {
        edges.push_back(edge("in_" + o.id, o.id));
      }
    }
    out["components"].push_back({{"id", ch},
                                  {"inports", {"in"}},
                                  {"outports", {"out"}},
                                  {"cft",
                                   {{"basic_events", {be("message_delay", 10), be("message_loss", 10)}},
                                    {"ifms", ifms},
                                    {"ofms", ofms},
                                    {"gates", gates},
                                    {"edges", edges}}}});
    cons.push_back({{"from", con.from.str()}, {"to", ch + ".in"}});
    cons.push_back({{"from", ch + ".out"}, {"to", con.to.str()}});
  }
  out["connections"] = cons;
  return out;
}

json refine_bindings(const json& bindings_doc, const json& refined_model) {
  json out = bindings_doc;
  for (const auto& l : links()) {
    std::string ch = channel_component(l.channel);
    out["literals"][ch + ".message_loss"] = lit(l.channel + ".loss", {"omission"}, {{"value", 1}});
    out["literals"][ch + ".message_delay"] =
        lit(l.channel + ".latency", {"message_delay"}, {{"value", "500 ms"}});
  }
  std::map<std::string, const json*> comps;
  for (const auto& c : refined_model.at("components")) comps[c.at("id").get<std::string>()] = &c;
  // Channel OFMs are observed where the channel delivers.
  for (const auto& c : refined_model.at("components")) {
    std::string id = c.at("id").get<std::string>();
    auto link = std::find_if(links().begin(), links().end(),
                             [&](const Link& l) { return channel_component(l.channel) == id; });
    if (link == links().end()) continue;
    // A channel input failure is enacted like the application input failure it feeds.
    for (const auto& con : refined_model.at("connections")) {
      std::string from = con.at("from").get<std::string>(), to = con.at("to").get<std::string>();
      if (from.substr(0, from.find('.')) != id) continue;
      std::string app = to.substr(0, to.find('.')), port = to.substr(to.find('.') + 1);
      const json ifms = comps.at(app)->at("cft").value("ifms", json::array());
      for (const auto& f : ifms) {
        std::string lit = app + "." + f.at("id").get<std::string>();
        if (f.at("port") != port || !bindings_doc.at("literals").contains(lit)) continue;
        std::string src = f.value("source", "");
        src = src.substr(src.rfind('.') + 1);  // npos + 1 == 0 for bare ids
        out["literals"][id + ".in_" + src] = bindings_doc.at("literals").at(lit);
      }
    }
    for (const auto& o : c.at("cft").at("ofms")) {
      std::string cls = o.at("class").get<std::string>();
      std::string eps = cls == "late" ? "50 ms" : cls == "content" ? "0 s" : "0 s";
      out["monitors"][id + "." + o.at("id").get<std::string>()] = monitor(link->channel + ".out", eps);
    }
  }
  return out;
}

CaseStudy build_case_study() {
  CaseStudy cs;
  cs.model_doc = model_json();
  cs.model = load_system(cs.model_doc);
  cs.config = sim::SimulationConfig::from_json(config_json());
  cs.bindings_doc = bindings_json();
  cs.bindings = tg::BindingMap::from_json(cs.bindings_doc);
  cs.btm_docs = library_json();
  for (const auto& d : cs.btm_docs) cs.library.emplace(d.at("name").get<std::string>(), btm::parse_btm(d));
  return cs;
}

std::vector<Scope> overview_scopes(const SystemModel& model) {
  return {Scope::parse("camera", model), Scope::parse("coastingAssist", model),
          Scope::parse("camera,circleRecog,slClassif,coastingAssist", model), Scope::parse("all", model)};
}

std::vector<std::string> export_case_study(const std::string& dir) {
  namespace fs = std::filesystem;
  CaseStudy cs = build_case_study();
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const json& doc) {
    std::string path = (fs::path(dir) / name).string();
    write_file_atomic(path, doc.dump(2) + "\n");
    written.push_back(path);
  };
  put("coasting.cft.json", cs.model_doc);
  put("coasting.sim.json", cs.config.to_json());
  put("coasting.bind.json", cs.bindings_doc);
  json tx_model = refine_model(cs.model_doc);
  put("coasting_tx.cft.json", tx_model);
  put("coasting_tx.sim.json", refine_channels(cs.config, Level::Transaction).to_json());
  put("coasting_tx.bind.json", refine_bindings(cs.bindings_doc, tx_model));
  for (const auto& d : cs.btm_docs) put("btm/" + d.at("name").get<std::string>() + ".btm.json", d);
  return written;
}

}  // namespace cftv::cs
