#include <doctest.h>

#include <cmath>

#include "dt6d/check/oracles.hpp"
#include "dt6d/pose.hpp"

using namespace dt6d;

TEST_SUITE("pose") {

TEST_CASE("polar angle formula endpoints") {
  CHECK(rad_to_deg(std::acos(2 * 0.5 - 1)) == doctest::Approx(90.0));
  CHECK(rad_to_deg(std::acos(2 * 1.0 - 1)) == doctest::Approx(0.0));
}

TEST_CASE("observed pose places object on the optical axis") {
  RandomStream rng(123);
  for (int i = 0; i < 200; ++i) {
    const RigidPose p = sample_observed_pose(rng, 0.4, 1.5);
    CHECK(p.is_valid());
    CHECK(p.translation.x == 0.0);
    CHECK(p.translation.y == 0.0);
    CHECK(p.translation.z >= 0.4);
    CHECK(p.translation.z <= 1.5);
  }
  CHECK_THROWS_AS(sample_observed_pose(rng, 1.5, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(sample_observed_pose(rng, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("sphere directions have vanishing mean over many draws") {
  RandomStream rng(7);
  Vec3 mean{0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const RigidPose p = sample_observed_pose(rng, 0.4, 1.5);
    mean += p.rotation.transposed() * Vec3{0, 0, 1};
  }
  CHECK((mean / n).norm() < 0.01);
}

TEST_CASE("pose delta sampler respects ranges") {
  RandomStream rng(11);
  for (int i = 0; i < 10000; ++i) {
    const PoseDelta d = sample_pose_delta(rng);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(d.t_mm[j]) <= 20.0);
      CHECK(std::abs(d.r_deg[j]) <= 10.0);
    }
  }
  const PoseDelta zero = sample_pose_delta(rng, 0, 0);
  for (int j = 0; j < 3; ++j) {
    CHECK(zero.t_mm[j] == 0.0);
    CHECK(zero.r_deg[j] == 0.0);
  }
}

TEST_CASE("delta components are flat") {
  std::vector<double> tx;
  for (int i = 0; i < 100000; ++i) {
    RandomStream rng = RandomStream::substream(3, i, "flat");
    tx.push_back(sample_pose_delta(rng).t_mm[0]);
  }
  CHECK(check::chi2_statistic_uniform(tx, -20, 20, 10) < check::chi2_critical_alpha01(9));
}

TEST_CASE("apply_delta identity and pure translation") {
  RandomStream rng(5);
  const RigidPose p = sample_observed_pose(rng, 0.9, 1.1);
  const RigidPose same = apply_delta(p, PoseDelta{});
  for (int i = 0; i < 9; ++i) CHECK(same.rotation.m[i] == p.rotation.m[i]);

  RigidPose at_one = p;
  at_one.translation = {0, 0, 1.0};
  PoseDelta dz;
  dz.t_mm = {0, 0, 20};
  CHECK(apply_delta(at_one, dz).translation.z == doctest::Approx(1.020));
}

TEST_CASE("apply/invert roundtrip to 1e-9") {
  RandomStream rng(17);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const RigidPose p = sample_observed_pose(rng, 0.4, 1.5);
    const PoseDelta d = sample_pose_delta(rng);
    const RigidPose back = apply_delta(apply_delta(p, d), invert_delta(d));
    for (int j = 0; j < 9; ++j)
      worst = std::max(worst, std::abs(back.rotation.m[j] - p.rotation.m[j]));
    worst = std::max(worst, (back.translation - p.translation).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("invert is an involution") {
  RandomStream rng(19);
  for (int i = 0; i < 100; ++i) {
    const PoseDelta d = sample_pose_delta(rng);
    const PoseDelta dd = invert_delta(invert_delta(d));
    for (int j = 0; j < 3; ++j) {
      CHECK(dd.t_mm[j] == doctest::Approx(d.t_mm[j]).epsilon(1e-12));
      CHECK(dd.r_deg[j] == doctest::Approx(d.r_deg[j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("label codec endpoints and roundtrip") {
  CHECK(encode_label(PoseDelta{}).y == Label6{}.y);

  PoseDelta d;
  d.t_mm = {20, 0, 0};
  const Label6 y = encode_label(d);
  CHECK(y.y[0] == 1.0);
  for (int i = 1; i < 6; ++i) CHECK(y.y[i] == 0.0);

  RandomStream rng(23);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const PoseDelta draw = sample_pose_delta(rng);
    const PoseDelta back = decode_label(encode_label(draw));
    for (int j = 0; j < 3; ++j) {
      worst = std::max(worst, std::abs(back.t_mm[j] - draw.t_mm[j]));
      worst = std::max(worst, std::abs(back.r_deg[j] - draw.r_deg[j]));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("encode rejects out-of-range, decode clamps") {
  PoseDelta big;
  big.t_mm = {25, 0, 0};
  CHECK_THROWS_AS(encode_label(big), std::out_of_range);

  Label6 wild;
  wild.y = {2.0, -3.0, 0, 0, 0, 0};
  const PoseDelta d = decode_label(wild);
  CHECK(d.t_mm[0] == 20.0);
  CHECK(d.t_mm[1] == -20.0);
}

TEST_CASE("euler convention basics") {
  const Mat3 eye = euler_to_matrix(0, 0, 0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(eye(r, c) == doctest::Approx(r == c ? 1.0 : 0.0));

  // 90 degrees about y maps +z onto -x under the chosen convention; the
  // quaternion oracle agrees.
  const Mat3 r90 = euler_to_matrix(0, 90, 0);
  const Vec3 mapped = r90 * Vec3{0, 0, 1};
  CHECK(mapped.x == doctest::Approx(-1.0));
  CHECK(mapped.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mapped.z == doctest::Approx(0.0).epsilon(1e-12));
  const Mat3 oracle = check::euler_matrix_quaternion_oracle(0, 90, 0);
  for (int i = 0; i < 9; ++i) CHECK(r90.m[i] == doctest::Approx(oracle.m[i]).epsilon(1e-12));
}

TEST_CASE("euler roundtrip away from gimbal lock") {
  RandomStream rng(29);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-180, 180);
    const double b = rng.uniform(-80, 80);
    const double c = rng.uniform(-180, 180);
    const auto back = matrix_to_euler(euler_to_matrix(a, b, c));
    worst = std::max({worst, std::abs(back[0] - a), std::abs(back[1] - b), std::abs(back[2] - c)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("gimbal lock canonicalizes with zero third angle") {
  const auto angles = matrix_to_euler(euler_to_matrix(25, 90, 40));
  CHECK(angles[1] == doctest::Approx(90.0));
  CHECK(angles[2] == doctest::Approx(0.0));
  // The matrix itself still matches through the canonicalized angles.
  const Mat3 original = euler_to_matrix(25, 90, 40);
  const Mat3 rebuilt = euler_to_matrix(angles[0], angles[1], angles[2]);
  for (int i = 0; i < 9; ++i) CHECK(original.m[i] == doctest::Approx(rebuilt.m[i]).epsilon(1e-9));
}

TEST_CASE("pose errors") {
  RandomStream rng(31);
  const RigidPose a = sample_observed_pose(rng, 0.5, 1.0);
  const PoseErrors zero = pose_error(a, a);
  CHECK(zero.translation_mm == 0.0);
  CHECK(zero.rotation_deg == doctest::Approx(0.0).epsilon(1e-6));

  RigidPose shifted = a;
  shifted.translation.x += 0.005;
  const PoseErrors five = pose_error(a, shifted);
  CHECK(five.translation_mm == doctest::Approx(5.0));
  CHECK(five.rotation_deg == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(five.center_distance_mm == doctest::Approx(5.0));

  RigidPose flipped = a;
  flipped.rotation = euler_to_matrix(0, 0, 180) * a.rotation;
  CHECK(pose_error(a, flipped).rotation_deg == doctest::Approx(180.0));

  // Symmetry.
  const PoseErrors ab = pose_error(a, shifted);
  const PoseErrors ba = pose_error(shifted, a);
  CHECK(ab.translation_mm == doctest::Approx(ba.translation_mm));
  CHECK(ab.rotation_deg == doctest::Approx(ba.rotation_deg));
}

TEST_CASE("intrinsics validation") {
  const CameraIntrinsics k = CameraIntrinsics::kinect_like(512, 424);
  CHECK(k.fx == doctest::Approx(365.0));
  CHECK_NOTHROW(k.validate());
  CameraIntrinsics bad = k;
  bad.fx = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

}  // TEST_SUITE
