#pragma once

#include <Eigen/Core>
#include <vector>

namespace mprompt {

struct MouseSample {
  double x = 0.0;
  double y = 0.0;
  bool pressed = false;

  Eigen::Vector2d position() const { return {x, y}; }
  bool operator==(const MouseSample&) const = default;
};

// One cursor sample per output frame.
struct MouseRecording {
  double fps = 16.0;
  std::vector<MouseSample> samples;

  int n_frames() const { return static_cast<int>(samples.size()); }
  bool operator==(const MouseRecording&) const = default;
};

}  // namespace mprompt
