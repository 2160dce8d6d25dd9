#pragma once

#include <filesystem>
#include <string>

#include "flowvs/scene.hpp"

namespace flowvs {

// Scenes and tasks are stored as JSON. A scene is identified by
// {variant, seed, params} and regenerated on load; poses are 3x4 row-major
// [R | t] arrays of 12 numbers.
//
//   {
//     "format": "flowvs-task", "version": 1,
//     "scene": {"variant": "point-cloud", "seed": 3, "params": {...}},
//     "difficulty": "easy", "seed": 7,
//     "initial_pose": [r00, r01, r02, tx, r10, ..., tz],
//     "desired_pose": [...]
//   }

std::string save_scene(const Scene& scene);
Scene load_scene(const std::string& text);

std::string save_task(const ServoTask& task);
ServoTask load_task(const std::string& text);

ServoTask load_task_file(const std::filesystem::path& path);
void save_task_file(const std::filesystem::path& path, const ServoTask& task);

}  // namespace flowvs
