#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfs/geometry.hpp"
#include "dfs/rng.hpp"

namespace dfs::kin {

// Joint tree in topological order: parent(n) < n, root at 0 with parent -1.
struct Skeleton {
    std::vector<int> parents;
    std::vector<Vec3> ref_positions;  // reference pose, meters
    std::vector<std::string> names;

    int joint_count() const { return static_cast<int>(parents.size()); }
    void validate() const;
};

using JointRotations = std::vector<Quat>;  // one per joint, unit

// World-frame bone recursion: the root stays at its reference position and
// each child is placed at
//   y[n] = y[parent(n)] + R(x[n]) * (ref[n] - ref[parent(n)]).
// Note the root's rotation never moves any joint; bone lengths are preserved.
std::vector<Vec3> forward_kinematics(const Skeleton& skel, const JointRotations& rotations);

// Sum of squared coordinate differences (meters^2).
double fk_energy(const std::vector<Vec3>& y_sim, const std::vector<Vec3>& y_obs);

// BVH subset: HIERARCHY with ROOT/JOINT/End Site, OFFSET and CHANNELS
// (X/Y/Z position and rotation, any order), plus an optional MOTION section.
// End Sites become terminal joints. Reference positions are cumulative
// offsets. Rotation channel values are degrees.
struct BvhChannel {
    int joint;
    char axis;      // 'X','Y','Z'
    bool rotation;  // else position (parsed but unused by FK)
};

struct BvhFile {
    Skeleton skeleton;
    std::vector<BvhChannel> channels;
    std::vector<std::vector<double>> frames;  // one value per channel
    double frame_time = 0.0;
};

BvhFile load_bvh(const std::string& text);
BvhFile load_bvh_file(const std::string& path);

// Converts one motion frame from the BVH convention (per-joint rotations in
// the parent's local frame) to the world-frame rotations the recursion above
// expects: x[n] = accumulated rotation of parent(n).
JointRotations bvh_frame_to_rotations(const BvhFile& bvh, std::size_t frame_index);

// Synthetic skeletons standing in for mocap data: a straight chain and a
// random tree, bone lengths uniform in [0.05, 0.5] m.
Skeleton make_chain(int joints, std::uint64_t seed);
Skeleton make_random_tree(int joints, std::uint64_t seed);

}  // namespace dfs::kin
