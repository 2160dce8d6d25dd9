#include "flowvs/scene_io.hpp"

#include <json.hpp>

#include "flowvs/errors.hpp"
#include "flowvs/flow_io.hpp"

namespace flowvs {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("scene file: expected a 3-vector", 0);
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose_json(const Pose& p) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(p.rotation(r, c));
    a.push_back(p.translation(r));
  }
  return a;
}

Pose pose_from(const json& j) {
  if (!j.is_array() || j.size() != 12) throw FormatError("task file: pose must have 12 numbers", 0);
  Pose p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = j[static_cast<std::size_t>(4 * r + c)].get<double>();
    p.translation(r) = j[static_cast<std::size_t>(4 * r + 3)].get<double>();
  }
  if (!p.isValid()) throw InvalidArgument("task file: pose rotation is not orthonormal");
  return p;
}

json params_json(const SceneParams& p) {
  return {{"num_points", p.num_points},
          {"box_min", vec_json(p.box_min)},
          {"box_max", vec_json(p.box_max)},
          {"plane_distance_min", p.plane_distance_min},
          {"plane_distance_max", p.plane_distance_max},
          {"plane_max_tilt_deg", p.plane_max_tilt_deg},
          {"plane_half_extent", p.plane_half_extent},
          {"texture_terms", p.texture_terms},
          {"texture_freq_min", p.texture_freq_min},
          {"texture_freq_max", p.texture_freq_max},
          {"texture_amp_min", p.texture_amp_min},
          {"texture_amp_max", p.texture_amp_max}};
}

// Missing keys keep their defaults so hand-written files can be terse.
SceneParams params_from(const json& j) {
  SceneParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw FormatError("scene file: params must be an object", 0);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("num_points", p.num_points);
  if (j.contains("box_min")) p.box_min = vec_from(j.at("box_min"));
  if (j.contains("box_max")) p.box_max = vec_from(j.at("box_max"));
  get("plane_distance_min", p.plane_distance_min);
  get("plane_distance_max", p.plane_distance_max);
  get("plane_max_tilt_deg", p.plane_max_tilt_deg);
  get("plane_half_extent", p.plane_half_extent);
  get("texture_terms", p.texture_terms);
  get("texture_freq_min", p.texture_freq_min);
  get("texture_freq_max", p.texture_freq_max);
  get("texture_amp_min", p.texture_amp_min);
  get("texture_amp_max", p.texture_amp_max);
  return p;
}

json scene_json(const Scene& s) {
  return {{"variant", to_string(s.variant())}, {"seed", s.seed()}, {"params", params_json(s.params())}};
}

Scene scene_from(const json& j) {
  return generate_scene(j.at("seed").get<std::uint64_t>(),
                        scene_variant_from_string(j.at("variant").get<std::string>()),
                        params_from(j.value("params", json())));
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what(), 0);
  } catch (const InvalidArgument& e) {
    // Well-formed JSON with values the generators reject.
    throw FormatError(std::string("config: ") + e.what(), 0);
  }
}

void check_header(const json& j, const char* format) {
  if (j.value("format", std::string()) != format)
    throw FormatError(std::string("config: expected format \"") + format + "\"", 0);
  if (j.value("version", 0) != 1) throw FormatError("config: unsupported version", 0);
}

}  // namespace

std::string save_scene(const Scene& scene) {
  json j = {{"format", "flowvs-scene"}, {"version", 1}};
  j.update(scene_json(scene));
  return j.dump(2) + "\n";
}

Scene load_scene(const std::string& text) {
  return guarded([&] {
    const json j = json::parse(text);
    check_header(j, "flowvs-scene");
    return scene_from(j);
  });
}

std::string save_task(const ServoTask& task) {
  if (!task.scene) throw InvalidArgument("save_task: task has no scene");
  const json j = {{"format", "flowvs-task"},
                  {"version", 1},
                  {"scene", scene_json(*task.scene)},
                  {"difficulty", to_string(task.difficulty)},
                  {"seed", task.seed},
                  {"initial_pose", pose_json(task.initial_pose)},
                  {"desired_pose", pose_json(task.desired_pose)}};
  return j.dump(2) + "\n";
}

ServoTask load_task(const std::string& text) {
  return guarded([&] {
    const json j = json::parse(text);
    check_header(j, "flowvs-task");
    ServoTask t;
    t.scene = std::make_shared<const Scene>(scene_from(j.at("scene")));
    t.difficulty = difficulty_from_string(j.value("difficulty", std::string("easy")));
    t.seed = j.value("seed", std::uint64_t{0});
    t.initial_pose = pose_from(j.at("initial_pose"));
    t.desired_pose = pose_from(j.at("desired_pose"));
    return t;
  });
}

ServoTask load_task_file(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return load_task(std::string(b.begin(), b.end()));
}

void save_task_file(const std::filesystem::path& path, const ServoTask& task) {
  const std::string s = save_task(task);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace flowvs
