#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dfs/geometry.hpp"
#include "dfs/kinematics.hpp"
#include "dfs/nn.hpp"
#include "dfs/rasterize.hpp"
#include "dfs/rng.hpp"
#include "dfs/solver.hpp"

namespace dfs::tasks {

using solver::Estimate;
using solver::Observation;

enum class TaskKind { Pose, Light, Ik };
const char* task_name(TaskKind k);
TaskKind task_from_name(const std::string& name);

// Objects sit in front of the camera (which looks down -z from the origin) at
// this anchor; pose translations and light positions are expressed around it.
inline constexpr Vec3 kObjectAnchor{0.0, 0.0, -1.5};

struct NetInput {
    nn::Tensor main;
    nn::Tensor aux;
};

struct EvalResult {
    std::vector<double> metrics;
    bool outlier;
};

// A concrete inverse problem: the forward model plus everything the pipeline
// needs around it (ground-truth sampling, network encoding, metrics).
class Task : public solver::ForwardModel {
  public:
    virtual TaskKind kind() const = 0;
    virtual Estimate sample_ground_truth(Rng& rng) const = 0;
    virtual Estimate initial_estimate() const = 0;
    virtual NetInput encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const = 0;
    virtual nn::Network make_update_network() const = 0;
    virtual std::vector<std::string> metric_names() const = 0;
    virtual EvalResult evaluate(const Estimate& pred, const Estimate& gt) const = 0;
};

// 6-DoF pose from a single binary silhouette. Estimate layout:
// [qw,qx,qy,qz,tx,ty,tz]; the observation is the silhouette row-major.
class PoseTask : public Task {
  public:
    PoseTask(render::TriangleMesh mesh, int resolution);

    Observation simulate(const Estimate& x) const override;
    double data_energy(const Observation& y_sim, const Observation& y_obs) const override;
    Estimate project(Estimate x) const override;
    int estimate_dim() const override { return 7; }
    std::string describe() const override { return "quat(4),trans(3)"; }

    TaskKind kind() const override { return TaskKind::Pose; }
    Estimate sample_ground_truth(Rng& rng) const override;
    Estimate initial_estimate() const override;
    NetInput encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const override;
    nn::Network make_update_network() const override;
    std::vector<std::string> metric_names() const override { return {"trans_err", "rot_err_deg"}; }
    EvalResult evaluate(const Estimate& pred, const Estimate& gt) const override;

    const render::TriangleMesh& mesh() const { return mesh_; }
    const render::Camera& camera() const { return cam_; }
    render::Image observation_to_image(const Observation& y) const;

  private:
    render::TriangleMesh mesh_;
    render::Camera cam_;
};

// Illumination from a Lambertian RGB rendering of a fixed scene. Estimate is
// the light parameter relative to the object anchor: a unit direction toward
// the light, or a point-light offset on the camera-side unit hemisphere.
class LightTask : public Task {
  public:
    LightTask(render::TriangleMesh mesh, int resolution, render::Light::Kind light_kind, double albedo = 0.8,
              double outlier_threshold = 0.5);

    Observation simulate(const Estimate& x) const override;
    double data_energy(const Observation& y_sim, const Observation& y_obs) const override;
    Estimate project(Estimate x) const override;
    int estimate_dim() const override { return 3; }
    std::string describe() const override { return "light(3)"; }

    TaskKind kind() const override { return TaskKind::Light; }
    Estimate sample_ground_truth(Rng& rng) const override;
    Estimate initial_estimate() const override;
    NetInput encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const override;
    nn::Network make_update_network() const override;
    std::vector<std::string> metric_names() const override { return {"mse"}; }
    EvalResult evaluate(const Estimate& pred, const Estimate& gt) const override;

    render::Light::Kind light_kind() const { return light_kind_; }
    render::Image observation_to_image(const Observation& y) const;

  private:
    render::TriangleMesh mesh_;
    render::Camera cam_;
    render::Light::Kind light_kind_;
    double albedo_;
    double outlier_threshold_;
};

// Inverse kinematics: recover per-joint world-frame rotations placing joints
// at observed 3-D positions. Estimate is 4N quaternion values; observation is
// 3N joint coordinates. The root rotation is a gauge freedom the forward
// model ignores; ground truth keeps it at identity.
class IKTask : public Task {
  public:
    explicit IKTask(kin::Skeleton skeleton, double max_angle_deg = 30.0);

    Observation simulate(const Estimate& x) const override;
    double data_energy(const Observation& y_sim, const Observation& y_obs) const override;
    Estimate project(Estimate x) const override;
    int estimate_dim() const override { return 4 * skeleton_.joint_count(); }
    std::string describe() const override;

    TaskKind kind() const override { return TaskKind::Ik; }
    Estimate sample_ground_truth(Rng& rng) const override;
    Estimate initial_estimate() const override;
    NetInput encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const override;
    nn::Network make_update_network() const override;
    std::vector<std::string> metric_names() const override { return {"pos_err_cm", "ang_err_deg"}; }
    EvalResult evaluate(const Estimate& pred, const Estimate& gt) const override;

    const kin::Skeleton& skeleton() const { return skeleton_; }

  private:
    kin::Skeleton skeleton_;
    double max_angle_deg_;
};

// Estimate layout helpers.
Pose6DoF pose_from_estimate(const Estimate& x);
Estimate estimate_from_pose(const Pose6DoF& pose);
kin::JointRotations rotations_from_estimate(const Estimate& x);
Estimate estimate_from_rotations(const kin::JointRotations& rots);

// Sampling per the benchmark protocol: rotation axis uniform on the sphere
// with angle uniform in [-40,40] degrees and translation offsets uniform in
// [-0.2,0.2] m around the anchor; lights uniform on the camera-side unit
// hemisphere (directional lights point at the object, i.e. the estimate is
// the hemisphere point itself).
Pose6DoF sample_pose(Rng& rng);
Vec3 sample_light(Rng& rng, render::Light::Kind kind);
kin::JointRotations sample_ik_rotations(Rng& rng, int joints, double max_angle_deg = 30.0);

struct PoseMetrics {
    double trans_err_m, rot_err_deg;
    bool outlier;  // trans > 0.2 m or rot > 30 deg
};
PoseMetrics pose_metrics(const Estimate& pred, const Estimate& gt);

struct LightMetrics {
    double mse;
    bool outlier;
};
LightMetrics light_metrics(const Estimate& pred, const Estimate& gt, double threshold = 0.5);

struct IkMetrics {
    double pos_err_cm, ang_err_deg;
};
IkMetrics ik_metrics(const Estimate& pred, const Estimate& gt, const kin::Skeleton& skel);

enum class Split { Train, Val, Test };
const char* split_name(Split s);

struct Sample {
    Estimate x_gt;
    Observation y;
    Split split;
};

struct Dataset {
    std::vector<Sample> samples;

    std::vector<int> indices(Split s) const;
};

// Deterministic given seed (per-sample derived streams, so the result does
// not depend on thread count). Split is 70/10/20 with floor proportions and
// the remainder going to train.
Dataset generate_dataset(const Task& task, int count, std::uint64_t seed);

// How to build a task; round-trips through the dataset manifest so training
// and benchmarking reconstruct the exact forward model.
struct TaskSpec {
    TaskKind kind = TaskKind::Pose;
    int resolution = 64;
    std::string mesh = "scene";  // cube|icosphere|cylinder|scene|<path.obj>
    int mesh_param = 2;
    double mesh_size = 0.4;
    std::string light = "directional";  // or "point"
    int ik_joints = 8;
    std::string skeleton = "chain";  // chain|tree|<path.bvh>
    std::uint64_t skeleton_seed = 1;
};

std::unique_ptr<Task> make_task(const TaskSpec& spec);

// Line-oriented dataset manifest ("# key value" header then one row per
// sample). Ground truths are stored with full precision and observations are
// re-simulated on load, which keeps y = f(x_gt) bit-exact; image observations
// are also written as PGM/PPM files for inspection.
void save_dataset(const Dataset& dataset, const TaskSpec& spec, const std::string& dir);
std::pair<TaskSpec, Dataset> load_dataset(const std::string& dir);

// Wraps a trained network as a solver update; task and net must outlive the
// returned function.
solver::UpdateFn make_update_fn(const Task& task, const nn::Network& net);

}  // namespace dfs::tasks
