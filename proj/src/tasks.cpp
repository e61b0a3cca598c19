#include "dfs/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dfs/parallel.hpp"

namespace dfs::tasks {

namespace fs = std::filesystem;

const char* task_name(TaskKind k) {
    switch (k) {
        case TaskKind::Pose: return "pose";
        case TaskKind::Light: return "light";
        case TaskKind::Ik: return "ik";
    }
    return "?";
}

TaskKind task_from_name(const std::string& name) {
    if (name == "pose") return TaskKind::Pose;
    if (name == "light") return TaskKind::Light;
    if (name == "ik") return TaskKind::Ik;
    throw std::invalid_argument("unknown task '" + name + "' (expected pose, light or ik)");
}

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

namespace {

Split split_from_name(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::runtime_error("unknown split tag '" + s + "'");
}

Quat normalized_or_identity(const Quat& q) {
    double n = norm(q);
    return n > 0.0 ? Quat{q.w / n, q.x / n, q.y / n, q.z / n} : Quat::identity();
}

Vec3 sphere_point(Rng& rng, double z_lo, double z_hi) {
    double z = rng.uniform(z_lo, z_hi);
    double phi = rng.uniform(0.0, 2.0 * M_PI);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

nn::Tensor image_stack(const Observation& y_obs, const Observation& y_sim, int channels, int res) {
    const int plane = res * res;
    nn::Tensor t({3 * channels, res, res});
    for (int c = 0; c < channels; ++c) {
        for (int p = 0; p < plane; ++p) {
            float o = static_cast<float>(y_obs[static_cast<std::size_t>(p) * channels + c]);
            float s = static_cast<float>(y_sim[static_cast<std::size_t>(p) * channels + c]);
            t.data[static_cast<std::size_t>(c) * plane + p] = o;
            t.data[static_cast<std::size_t>(channels + c) * plane + p] = s;
            t.data[static_cast<std::size_t>(2 * channels + c) * plane + p] = o - s;
        }
    }
    return t;
}

nn::Tensor aux_from_estimate(const Estimate& x) {
    nn::Tensor t({static_cast<int>(x.size())});
    for (std::size_t i = 0; i < x.size(); ++i) t.data[i] = static_cast<float>(x[i]);
    return t;
}

nn::Network conv_update_network(int in_channels, int res, int aux_dim, int out_dim) {
    return nn::NetBuilder({in_channels, res, res}, aux_dim)
        .conv2d(8, 5)
        .relu()
        .maxpool2d()
        .conv2d(16, 5)
        .relu()
        .maxpool2d()
        .flatten()
        .concat_aux()
        .dense(128)
        .relu()
        .dense(out_dim)
        .build();
}

Observation image_to_observation(const render::Image& img) {
    return Observation(img.data.begin(), img.data.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// PoseTask

PoseTask::PoseTask(render::TriangleMesh mesh, int resolution)
    : mesh_(std::move(mesh)), cam_(render::Camera::standard(resolution, resolution)) {}

render::Image PoseTask::observation_to_image(const Observation& y) const {
    render::Image img(cam_.width, cam_.height, 1);
    if (y.size() != img.data.size()) throw std::invalid_argument("pose: observation size mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) img.data[i] = static_cast<float>(y[i]);
    return img;
}

Observation PoseTask::simulate(const Estimate& x) const {
    return image_to_observation(render::rasterize_silhouette(mesh_, pose_from_estimate(x), cam_));
}

double PoseTask::data_energy(const Observation& y_sim, const Observation& y_obs) const {
    return render::silhouette_energy(observation_to_image(y_sim), observation_to_image(y_obs));
}

Estimate PoseTask::project(Estimate x) const {
    if (x.size() != 7) throw std::invalid_argument("pose: estimate must have 7 values");
    Quat q = normalized_or_identity({x[0], x[1], x[2], x[3]});
    x[0] = q.w;
    x[1] = q.x;
    x[2] = q.y;
    x[3] = q.z;
    return x;
}

Estimate PoseTask::sample_ground_truth(Rng& rng) const { return estimate_from_pose(sample_pose(rng)); }

Estimate PoseTask::initial_estimate() const {
    return {1.0, 0.0, 0.0, 0.0, kObjectAnchor.x, kObjectAnchor.y, kObjectAnchor.z};
}

NetInput PoseTask::encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const {
    if (y_sim.size() != y_obs.size() || static_cast<int>(y_obs.size()) != cam_.width * cam_.height)
        throw std::invalid_argument("pose: observation size mismatch");
    return {image_stack(y_obs, y_sim, 1, cam_.width), aux_from_estimate(x)};
}

nn::Network PoseTask::make_update_network() const { return conv_update_network(3, cam_.width, 7, 7); }

EvalResult PoseTask::evaluate(const Estimate& pred, const Estimate& gt) const {
    PoseMetrics m = pose_metrics(pred, gt);
    return {{m.trans_err_m, m.rot_err_deg}, m.outlier};
}

// ---------------------------------------------------------------------------
// LightTask

LightTask::LightTask(render::TriangleMesh mesh, int resolution, render::Light::Kind light_kind, double albedo,
                     double outlier_threshold)
    : mesh_(std::move(mesh)),
      cam_(render::Camera::standard(resolution, resolution)),
      light_kind_(light_kind),
      albedo_(albedo),
      outlier_threshold_(outlier_threshold) {}

render::Image LightTask::observation_to_image(const Observation& y) const {
    render::Image img(cam_.width, cam_.height, 3);
    if (y.size() != img.data.size()) throw std::invalid_argument("light: observation size mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) img.data[i] = static_cast<float>(y[i]);
    return img;
}

Observation LightTask::simulate(const Estimate& x) const {
    if (x.size() != 3) throw std::invalid_argument("light: estimate must have 3 values");
    render::Light light;
    light.kind = light_kind_;
    light.intensity = 1.0;
    if (light_kind_ == render::Light::Kind::Directional) {
        light.param = {x[0], x[1], x[2]};
    } else {
        light.param = kObjectAnchor + Vec3{x[0], x[1], x[2]};
    }
    Pose6DoF pose{Quat::identity(), kObjectAnchor};
    return image_to_observation(render::rasterize_lambertian(mesh_, pose, cam_, light, albedo_));
}

double LightTask::data_energy(const Observation& y_sim, const Observation& y_obs) const {
    if (y_sim.size() != y_obs.size()) throw std::invalid_argument("light: observation size mismatch");
    double sum = 0;
    for (std::size_t i = 0; i < y_sim.size(); ++i) {
        double d = y_sim[i] - y_obs[i];
        sum += d * d;
    }
    return sum / static_cast<double>(y_sim.size());
}

Estimate LightTask::project(Estimate x) const {
    if (x.size() != 3) throw std::invalid_argument("light: estimate must have 3 values");
    if (light_kind_ == render::Light::Kind::Directional) {
        double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (n > 0.0) {
            x[0] /= n;
            x[1] /= n;
            x[2] /= n;
        } else {
            x = {0.0, 0.0, 1.0};
        }
    }
    return x;
}

Estimate LightTask::sample_ground_truth(Rng& rng) const {
    Vec3 l = sample_light(rng, light_kind_);
    return {l.x, l.y, l.z};
}

Estimate LightTask::initial_estimate() const { return {0.0, 0.0, 1.0}; }

NetInput LightTask::encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const {
    if (y_sim.size() != y_obs.size() || static_cast<int>(y_obs.size()) != cam_.width * cam_.height * 3)
        throw std::invalid_argument("light: observation size mismatch");
    return {image_stack(y_obs, y_sim, 3, cam_.width), aux_from_estimate(x)};
}

nn::Network LightTask::make_update_network() const { return conv_update_network(9, cam_.width, 3, 3); }

EvalResult LightTask::evaluate(const Estimate& pred, const Estimate& gt) const {
    LightMetrics m = light_metrics(pred, gt, outlier_threshold_);
    return {{m.mse}, m.outlier};
}

// ---------------------------------------------------------------------------
// IKTask

IKTask::IKTask(kin::Skeleton skeleton, double max_angle_deg)
    : skeleton_(std::move(skeleton)), max_angle_deg_(max_angle_deg) {
    skeleton_.validate();
}

std::string IKTask::describe() const { return "quat(4)x" + std::to_string(skeleton_.joint_count()); }

Observation IKTask::simulate(const Estimate& x) const {
    auto y = kin::forward_kinematics(skeleton_, rotations_from_estimate(x));
    Observation obs(3 * y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        obs[3 * i] = y[i].x;
        obs[3 * i + 1] = y[i].y;
        obs[3 * i + 2] = y[i].z;
    }
    return obs;
}

double IKTask::data_energy(const Observation& y_sim, const Observation& y_obs) const {
    if (y_sim.size() != y_obs.size()) throw std::invalid_argument("ik: observation size mismatch");
    double sum = 0;
    for (std::size_t i = 0; i < y_sim.size(); ++i) {
        double d = y_sim[i] - y_obs[i];
        sum += d * d;
    }
    return sum;
}

Estimate IKTask::project(Estimate x) const {
    if (static_cast<int>(x.size()) != estimate_dim()) throw std::invalid_argument("ik: estimate size mismatch");
    for (std::size_t j = 0; j + 3 < x.size(); j += 4) {
        Quat q = normalized_or_identity({x[j], x[j + 1], x[j + 2], x[j + 3]});
        x[j] = q.w;
        x[j + 1] = q.x;
        x[j + 2] = q.y;
        x[j + 3] = q.z;
    }
    return x;
}

Estimate IKTask::sample_ground_truth(Rng& rng) const {
    return estimate_from_rotations(sample_ik_rotations(rng, skeleton_.joint_count(), max_angle_deg_));
}

Estimate IKTask::initial_estimate() const {
    return estimate_from_rotations(kin::JointRotations(skeleton_.joint_count(), Quat::identity()));
}

NetInput IKTask::encode_net_input(const Estimate& x, const Observation& y_sim, const Observation& y_obs) const {
    std::size_t n3 = 3 * static_cast<std::size_t>(skeleton_.joint_count());
    if (y_sim.size() != n3 || y_obs.size() != n3) throw std::invalid_argument("ik: observation size mismatch");
    nn::Tensor main({static_cast<int>(3 * n3)});
    for (std::size_t i = 0; i < n3; ++i) {
        main.data[i] = static_cast<float>(y_obs[i]);
        main.data[n3 + i] = static_cast<float>(y_sim[i]);
        main.data[2 * n3 + i] = static_cast<float>(y_obs[i] - y_sim[i]);
    }
    return {std::move(main), aux_from_estimate(x)};
}

nn::Network IKTask::make_update_network() const {
    int n = skeleton_.joint_count();
    return nn::NetBuilder({9 * n}, 4 * n).concat_aux().dense(256).relu().dense(256).relu().dense(4 * n).build();
}

EvalResult IKTask::evaluate(const Estimate& pred, const Estimate& gt) const {
    IkMetrics m = ik_metrics(pred, gt, skeleton_);
    return {{m.pos_err_cm, m.ang_err_deg}, false};
}

// ---------------------------------------------------------------------------
// layout helpers, sampling, metrics

Pose6DoF pose_from_estimate(const Estimate& x) {
    if (x.size() != 7) throw std::invalid_argument("pose estimate must have 7 values");
    return {{x[0], x[1], x[2], x[3]}, {x[4], x[5], x[6]}};
}

Estimate estimate_from_pose(const Pose6DoF& pose) {
    return {pose.rotation.w, pose.rotation.x, pose.rotation.y, pose.rotation.z,
            pose.translation.x, pose.translation.y, pose.translation.z};
}

kin::JointRotations rotations_from_estimate(const Estimate& x) {
    if (x.size() % 4 != 0) throw std::invalid_argument("rotation estimate must have 4 values per joint");
    kin::JointRotations rots(x.size() / 4);
    for (std::size_t j = 0; j < rots.size(); ++j) rots[j] = {x[4 * j], x[4 * j + 1], x[4 * j + 2], x[4 * j + 3]};
    return rots;
}

Estimate estimate_from_rotations(const kin::JointRotations& rots) {
    Estimate x(4 * rots.size());
    for (std::size_t j = 0; j < rots.size(); ++j) {
        x[4 * j] = rots[j].w;
        x[4 * j + 1] = rots[j].x;
        x[4 * j + 2] = rots[j].y;
        x[4 * j + 3] = rots[j].z;
    }
    return x;
}

Pose6DoF sample_pose(Rng& rng) {
    Vec3 axis = sphere_point(rng, -1.0, 1.0);
    double angle = rng.uniform(-40.0, 40.0);
    Quat q = axis_angle_to_quat(axis, angle);
    Vec3 t = kObjectAnchor + Vec3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    return {q, t};
}

Vec3 sample_light(Rng& rng, render::Light::Kind) {
    // camera-side unit hemisphere around the object; for directional lights
    // this point, read as a direction, already points from the object toward
    // the light
    return sphere_point(rng, 0.0, 1.0);
}

kin::JointRotations sample_ik_rotations(Rng& rng, int joints, double max_angle_deg) {
    kin::JointRotations rots(joints, Quat::identity());
    // the root rotation is unobservable through the forward model, keep it
    // at identity
    for (int j = 1; j < joints; ++j) {
        Vec3 axis = sphere_point(rng, -1.0, 1.0);
        rots[j] = axis_angle_to_quat(axis, rng.uniform(-max_angle_deg, max_angle_deg));
    }
    return rots;
}

PoseMetrics pose_metrics(const Estimate& pred, const Estimate& gt) {
    Pose6DoF p = pose_from_estimate(pred);
    Pose6DoF g = pose_from_estimate(gt);
    double trans = norm(p.translation - g.translation);
    double rot = quat_angle(quat_normalize(p.rotation), quat_normalize(g.rotation));
    return {trans, rot, trans > 0.2 || rot > 30.0};
}

LightMetrics light_metrics(const Estimate& pred, const Estimate& gt, double threshold) {
    if (pred.size() != 3 || gt.size() != 3) throw std::invalid_argument("light estimates must have 3 values");
    double sum = 0;
    for (int i = 0; i < 3; ++i) sum += (pred[i] - gt[i]) * (pred[i] - gt[i]);
    double mse = sum / 3.0;
    return {mse, mse > threshold};
}

IkMetrics ik_metrics(const Estimate& pred, const Estimate& gt, const kin::Skeleton& skel) {
    auto pr = rotations_from_estimate(pred);
    auto gr = rotations_from_estimate(gt);
    if (static_cast<int>(pr.size()) != skel.joint_count() || pr.size() != gr.size())
        throw std::invalid_argument("ik_metrics: joint count mismatch");
    auto yp = kin::forward_kinematics(skel, pr);
    auto yg = kin::forward_kinematics(skel, gr);
    double pos = 0, ang = 0;
    for (std::size_t i = 0; i < pr.size(); ++i) {
        pos += norm(yp[i] - yg[i]);
        ang += quat_angle(quat_normalize(pr[i]), quat_normalize(gr[i]));
    }
    double n = static_cast<double>(pr.size());
    return {100.0 * pos / n, ang / n};
}

// ---------------------------------------------------------------------------
// datasets

std::vector<int> Dataset::indices(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].split == s) out.push_back(static_cast<int>(i));
    return out;
}

Dataset generate_dataset(const Task& task, int count, std::uint64_t seed) {
    if (count < 10) throw std::invalid_argument("generate_dataset: count must be >= 10");
    int n_val = count / 10;
    int n_test = count / 5;
    int n_train = count - n_val - n_test;

    Dataset ds;
    ds.samples.resize(count);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        Rng rng = Rng::derived(seed, i);
        Sample& s = ds.samples[i];
        s.x_gt = task.sample_ground_truth(rng);
        s.y = task.simulate(s.x_gt);
        s.split = static_cast<int>(i) < n_train ? Split::Train
                  : static_cast<int>(i) < n_train + n_val ? Split::Val
                                                          : Split::Test;
    });
    return ds;
}

std::unique_ptr<Task> make_task(const TaskSpec& spec) {
    using render::TriangleMesh;
    auto build_mesh = [&]() -> TriangleMesh {
        double s = spec.mesh_size;
        if (spec.mesh == "scene") {
            if (spec.kind == TaskKind::Light) {
                TriangleMesh sphere = render::translated(render::make_icosphere(2, 0.65 * s), {-0.3 * s, 0, 0});
                TriangleMesh cube = render::translated(render::make_cube(0.55 * s), {0.3 * s, 0, 0});
                return render::merge(sphere, cube);
            }
            TriangleMesh cube = render::translated(render::make_cube(0.55 * s), {-0.28 * s, -0.05 * s, 0});
            TriangleMesh sphere =
                render::translated(render::make_icosphere(2, 0.55 * s), {0.25 * s, 0.15 * s, -0.08 * s});
            TriangleMesh cyl = render::translated(render::make_cylinder(16, 0.4 * s), {0.05 * s, -0.3 * s, 0.15 * s});
            return render::merge(render::merge(cube, sphere), cyl);
        }
        if (spec.mesh.size() > 4 && spec.mesh.substr(spec.mesh.size() - 4) == ".obj")
            return render::load_obj_file(spec.mesh);
        return render::make_primitive(spec.mesh, spec.mesh_param, spec.mesh_size);
    };

    switch (spec.kind) {
        case TaskKind::Pose:
            return std::make_unique<PoseTask>(build_mesh(), spec.resolution);
        case TaskKind::Light: {
            render::Light::Kind kind = spec.light == "point" ? render::Light::Kind::Point
                                                             : render::Light::Kind::Directional;
            if (spec.light != "point" && spec.light != "directional")
                throw std::invalid_argument("unknown light kind '" + spec.light + "'");
            return std::make_unique<LightTask>(build_mesh(), spec.resolution, kind);
        }
        case TaskKind::Ik: {
            kin::Skeleton skel;
            if (spec.skeleton.size() > 4 && spec.skeleton.substr(spec.skeleton.size() - 4) == ".bvh")
                skel = kin::load_bvh_file(spec.skeleton).skeleton;
            else if (spec.skeleton == "tree")
                skel = kin::make_random_tree(spec.ik_joints, spec.skeleton_seed);
            else
                skel = kin::make_chain(spec.ik_joints, spec.skeleton_seed);
            return std::make_unique<IKTask>(std::move(skel));
        }
    }
    throw std::logic_error("unreachable");
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_dataset(const Dataset& dataset, const TaskSpec& spec, const std::string& dir) {
    fs::create_directories(dir);
    bool images = spec.kind != TaskKind::Ik;
    if (images) fs::create_directories(fs::path(dir) / "obs");

    auto task = make_task(spec);
    std::ofstream f(fs::path(dir) / "manifest.txt");
    if (!f) throw std::runtime_error("cannot write dataset manifest in " + dir);
    f << "# dfs-dataset v1\n";
    f << "# task " << task_name(spec.kind) << "\n";
    f << "# resolution " << spec.resolution << "\n";
    f << "# mesh " << spec.mesh << "\n";
    f << "# mesh_param " << spec.mesh_param << "\n";
    f << "# mesh_size " << fmt_double(spec.mesh_size) << "\n";
    f << "# light " << spec.light << "\n";
    f << "# ik_joints " << spec.ik_joints << "\n";
    f << "# skeleton " << spec.skeleton << "\n";
    f << "# skeleton_seed " << spec.skeleton_seed << "\n";
    f << "# count " << dataset.samples.size() << "\n";
    f << "# columns: index split x_gt[" << task->estimate_dim() << "] "
      << (images ? "obs_path" : "y_obs[inline]") << "\n";

    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const Sample& s = dataset.samples[i];
        f << i << " " << split_name(s.split);
        for (double v : s.x_gt) f << " " << fmt_double(v);
        if (images) {
            char name[32];
            std::snprintf(name, sizeof name, "obs/obs_%06zu.%s", i, spec.kind == TaskKind::Pose ? "pgm" : "ppm");
            f << " " << name;
        } else {
            for (double v : s.y) f << " " << fmt_double(v);
        }
        f << "\n";
    }
    f.close();

    if (images) {
        parallel_for(dataset.samples.size(), [&](std::size_t i) {
            char name[32];
            std::snprintf(name, sizeof name, "obs_%06zu.%s", i, spec.kind == TaskKind::Pose ? "pgm" : "ppm");
            std::string path = (fs::path(dir) / "obs" / name).string();
            if (spec.kind == TaskKind::Pose) {
                auto* pose = static_cast<const PoseTask*>(task.get());
                render::write_pgm(pose->observation_to_image(dataset.samples[i].y), path);
            } else {
                auto* light = static_cast<const LightTask*>(task.get());
                render::write_ppm(light->observation_to_image(dataset.samples[i].y), path);
            }
        });
    }
}

std::pair<TaskSpec, Dataset> load_dataset(const std::string& dir) {
    std::ifstream f(fs::path(dir) / "manifest.txt");
    if (!f) throw std::runtime_error("no dataset manifest in " + dir);

    TaskSpec spec;
    Dataset ds;
    std::size_t expected = 0;
    std::string line;
    int lineno = 0;
    std::vector<std::pair<Estimate, Split>> rows;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "task") {
                std::string v;
                ls >> v;
                spec.kind = task_from_name(v);
            } else if (key == "resolution") {
                ls >> spec.resolution;
            } else if (key == "mesh") {
                ls >> spec.mesh;
            } else if (key == "mesh_param") {
                ls >> spec.mesh_param;
            } else if (key == "mesh_size") {
                ls >> spec.mesh_size;
            } else if (key == "light") {
                ls >> spec.light;
            } else if (key == "ik_joints") {
                ls >> spec.ik_joints;
            } else if (key == "skeleton") {
                ls >> spec.skeleton;
            } else if (key == "skeleton_seed") {
                ls >> spec.skeleton_seed;
            } else if (key == "count") {
                ls >> expected;
            }
            continue;
        }
        std::istringstream ls(line);
        std::size_t index;
        std::string split_tag;
        if (!(ls >> index >> split_tag))
            throw std::runtime_error("dataset manifest line " + std::to_string(lineno) + ": malformed row");
        rows.emplace_back(Estimate{}, split_from_name(split_tag));
        double v;
        while (ls >> v) rows.back().first.push_back(v);
        // image rows end with a path token that stops the number parse
    }

    auto task = make_task(spec);
    int dim = task->estimate_dim();
    ds.samples.resize(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        auto& [values, split] = rows[i];
        if (static_cast<int>(values.size()) < dim)
            throw std::runtime_error("dataset manifest row " + std::to_string(i) + ": too few values");
        Sample& s = ds.samples[i];
        s.split = split;
        s.x_gt.assign(values.begin(), values.begin() + dim);
        s.y = task->simulate(s.x_gt);  // observations reproduce bit-exactly from x_gt
    });
    if (expected && ds.samples.size() != expected)
        throw std::runtime_error("dataset manifest: row count does not match declared count");
    return {spec, std::move(ds)};
}

solver::UpdateFn make_update_fn(const Task& task, const nn::Network& net) {
    return [&task, &net](const Estimate& x, const Observation& y_sim, const Observation& y_obs) {
        NetInput in = task.encode_net_input(x, y_sim, y_obs);
        nn::Tensor out = nn::forward(net, in.main, in.aux);
        Estimate delta(out.data.size());
        for (std::size_t i = 0; i < out.data.size(); ++i) delta[i] = static_cast<double>(out.data[i]);
        return delta;
    };
}

}  // namespace dfs::tasks
