#pragma once

#include "cftv/sim.hpp"

namespace cftv::sim {

/// Entity types shipped with the toolkit:
///   Camera, CircleRecog, SlClassif, CoastingAssist, HMI  (coasting pipeline)
///   Channel                                              (transaction-level link)
///   Logic                                                (boolean fixture component)
EntityRegistry standard_registry();

/// Image geometry shared by the coasting entities. Pixels are stored row-major;
/// the first four pixels carry the frame counter as nibbles.
struct ImageGeometry {
  std::int64_t rows = 720;
  std::int64_t cols = 719;
  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

std::int64_t decode_frame_id(const std::vector<std::uint8_t>& image);

}  // namespace cftv::sim
