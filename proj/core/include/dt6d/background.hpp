#pragma once

#include <string>
#include <vector>

#include "dt6d/image.hpp"
#include "dt6d/pose.hpp"

namespace dt6d {

/// Renders one procedural RGBD background: a back wall, a floor plane and a
/// few textured boxes scattered between 0.5 and 5 m.
RgbdFrame make_procedural_background(const CameraIntrinsics& k, RandomStream& rng);

/// Greedy scan: keep a frame when its SSIM against the current reference is
/// below the threshold, then make it the new reference. Always keeps the
/// first frame.
std::vector<RgbdFrame> build_background_pool(const std::vector<RgbdFrame>& frames,
                                             double ssim_threshold);

/// Procedural pool: `count` scenes generated then deduplicated.
std::vector<RgbdFrame> make_procedural_pool(const CameraIntrinsics& k, int count,
                                            double ssim_threshold, uint64_t seed);

/// Imports a directory of paired color_NNNNN.png / depth_NNNNN.png frames.
std::vector<RgbdFrame> import_background_dir(const std::string& dir);

}  // namespace dt6d
