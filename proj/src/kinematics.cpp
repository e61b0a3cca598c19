#include "dfs/kinematics.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dfs::kin {

void Skeleton::validate() const {
    if (joint_count() < 2) throw std::invalid_argument("skeleton: needs at least 2 joints");
    if (parents[0] != -1) throw std::invalid_argument("skeleton: joint 0 must be the root");
    for (int n = 1; n < joint_count(); ++n)
        if (parents[n] < 0 || parents[n] >= n)
            throw std::invalid_argument("skeleton: parents must precede children (joint " + std::to_string(n) + ")");
    if (ref_positions.size() != parents.size()) throw std::invalid_argument("skeleton: reference positions missing");
}

std::vector<Vec3> forward_kinematics(const Skeleton& skel, const JointRotations& rotations) {
    skel.validate();
    if (static_cast<int>(rotations.size()) != skel.joint_count())
        throw std::invalid_argument("forward_kinematics: rotation count mismatch");
    for (const Quat& q : rotations)
        if (!quat_is_unit(q)) throw std::invalid_argument("forward_kinematics: rotations must be unit quaternions");

    std::vector<Vec3> y(skel.joint_count());
    y[0] = skel.ref_positions[0];
    for (int n = 1; n < skel.joint_count(); ++n) {
        int p = skel.parents[n];
        Vec3 bone = skel.ref_positions[n] - skel.ref_positions[p];
        // y[p] + R*bone, grouped so identity rotations reproduce the
        // reference pose bit-exactly
        y[n] = skel.ref_positions[n] + ((y[p] - skel.ref_positions[p]) + (quat_rotate(rotations[n], bone) - bone));
    }
    return y;
}

double fk_energy(const std::vector<Vec3>& y_sim, const std::vector<Vec3>& y_obs) {
    if (y_sim.size() != y_obs.size()) throw std::invalid_argument("fk_energy: joint count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < y_sim.size(); ++i) {
        Vec3 d = y_sim[i] - y_obs[i];
        sum += dot(d, d);
    }
    return sum;
}

namespace {

struct BvhParser {
    std::istringstream stream;
    int lineno = 1;
    std::string pending;

    explicit BvhParser(const std::string& text) : stream(text) {}

    [[noreturn]] void fail(const std::string& msg) {
        throw std::runtime_error("bvh: line " + std::to_string(lineno) + ": " + msg);
    }

    bool next(std::string& tok) {
        if (!pending.empty()) {
            tok = std::move(pending);
            pending.clear();
            return true;
        }
        while (true) {
            int c = stream.peek();
            if (c == EOF) return false;
            if (c == '\n') {
                ++lineno;
                stream.get();
                continue;
            }
            if (std::isspace(c)) {
                stream.get();
                continue;
            }
            break;
        }
        stream >> tok;
        return true;
    }

    std::string expect_any(const char* what) {
        std::string tok;
        if (!next(tok)) fail(std::string("unexpected end of file, expected ") + what);
        return tok;
    }

    void expect(const std::string& want) {
        std::string tok = expect_any(want.c_str());
        if (tok != want) fail("expected '" + want + "', got '" + tok + "'");
    }

    double number() {
        std::string tok = expect_any("number");
        try {
            std::size_t used;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            fail("malformed number '" + tok + "'");
        }
    }
};

void parse_joint_body(BvhParser& p, BvhFile& out, int joint, Vec3 parent_pos) {
    p.expect("{");
    p.expect("OFFSET");
    Vec3 offset{p.number(), p.number(), p.number()};
    out.skeleton.ref_positions[joint] = parent_pos + offset;

    std::string tok = p.expect_any("CHANNELS, JOINT, End or }");
    if (tok == "CHANNELS") {
        int n = static_cast<int>(p.number());
        for (int i = 0; i < n; ++i) {
            std::string ch = p.expect_any("channel name");
            bool rot = ch.size() == 9 && ch.substr(1) == "rotation";
            bool pos = ch.size() == 9 && ch.substr(1) == "position";
            char axis = ch.empty() ? '?' : ch[0];
            if ((!rot && !pos) || (axis != 'X' && axis != 'Y' && axis != 'Z'))
                p.fail("unknown channel name '" + ch + "'");
            out.channels.push_back({joint, axis, rot});
        }
        tok = p.expect_any("JOINT, End or }");
    }

    while (tok != "}") {
        int child = out.skeleton.joint_count();
        out.skeleton.parents.push_back(joint);
        out.skeleton.ref_positions.push_back({});
        if (tok == "JOINT") {
            out.skeleton.names.push_back(p.expect_any("joint name"));
            parse_joint_body(p, out, child, out.skeleton.ref_positions[joint]);
        } else if (tok == "End") {
            p.expect("Site");
            out.skeleton.names.push_back(out.skeleton.names[joint] + "_end");
            p.expect("{");
            p.expect("OFFSET");
            Vec3 off{p.number(), p.number(), p.number()};
            out.skeleton.ref_positions[child] = out.skeleton.ref_positions[joint] + off;
            p.expect("}");
        } else {
            p.fail("expected JOINT, End or }, got '" + tok + "'");
        }
        tok = p.expect_any("JOINT, End or }");
    }
}

}  // namespace

BvhFile load_bvh(const std::string& text) {
    BvhParser p(text);
    BvhFile out;
    p.expect("HIERARCHY");
    p.expect("ROOT");
    out.skeleton.parents.push_back(-1);
    out.skeleton.ref_positions.push_back({});
    out.skeleton.names.push_back(p.expect_any("root name"));
    parse_joint_body(p, out, 0, Vec3{});

    std::string tok;
    if (p.next(tok)) {
        if (tok != "MOTION") p.fail("expected MOTION, got '" + tok + "'");
        p.expect("Frames:");
        int frames = static_cast<int>(p.number());
        p.expect("Frame");
        p.expect("Time:");
        out.frame_time = p.number();
        for (int f = 0; f < frames; ++f) {
            std::vector<double> row;
            row.reserve(out.channels.size());
            for (std::size_t c = 0; c < out.channels.size(); ++c) row.push_back(p.number());
            out.frames.push_back(std::move(row));
        }
        if (p.next(tok)) p.fail("frame data does not match channel count (extra value '" + tok + "')");
    }
    out.skeleton.validate();
    return out;
}

BvhFile load_bvh_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return load_bvh(ss.str());
}

JointRotations bvh_frame_to_rotations(const BvhFile& bvh, std::size_t frame_index) {
    if (frame_index >= bvh.frames.size()) throw std::out_of_range("bvh: no such frame");
    const auto& frame = bvh.frames[frame_index];
    int n = bvh.skeleton.joint_count();

    // local rotation per joint, channels applied in declared order
    std::vector<Quat> local(n, Quat::identity());
    for (std::size_t c = 0; c < bvh.channels.size(); ++c) {
        const BvhChannel& ch = bvh.channels[c];
        if (!ch.rotation) continue;
        Vec3 axis = ch.axis == 'X' ? Vec3{1, 0, 0} : ch.axis == 'Y' ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
        local[ch.joint] = quat_mul(local[ch.joint], axis_angle_to_quat(axis, frame[c]));
    }

    // accumulate world rotations; bone n moves with its parent's frame
    std::vector<Quat> world(n, Quat::identity());
    JointRotations x(n, Quat::identity());
    for (int j = 0; j < n; ++j) {
        int p = bvh.skeleton.parents[j];
        world[j] = p < 0 ? local[j] : quat_normalize(quat_mul(world[p], local[j]));
        if (p >= 0) x[j] = world[p];
    }
    return x;
}

Skeleton make_chain(int joints, std::uint64_t seed) {
    if (joints < 2) throw std::invalid_argument("make_chain: need at least 2 joints");
    Rng rng(seed);
    Skeleton s;
    s.parents.push_back(-1);
    s.ref_positions.push_back({0, 0, 0});
    s.names.push_back("joint0");
    for (int n = 1; n < joints; ++n) {
        s.parents.push_back(n - 1);
        double len = rng.uniform(0.05, 0.5);
        Vec3 dir = normalized({rng.normal(), rng.normal(), rng.normal()});
        s.ref_positions.push_back(s.ref_positions[n - 1] + dir * len);
        s.names.push_back("joint" + std::to_string(n));
    }
    return s;
}

Skeleton make_random_tree(int joints, std::uint64_t seed) {
    if (joints < 2) throw std::invalid_argument("make_random_tree: need at least 2 joints");
    Rng rng(seed);
    Skeleton s;
    s.parents.push_back(-1);
    s.ref_positions.push_back({0, 0, 0});
    s.names.push_back("joint0");
    for (int n = 1; n < joints; ++n) {
        int parent = static_cast<int>(rng.uniform(0, n));
        s.parents.push_back(parent);
        double len = rng.uniform(0.05, 0.5);
        Vec3 dir = normalized({rng.normal(), rng.normal(), rng.normal()});
        s.ref_positions.push_back(s.ref_positions[parent] + dir * len);
        s.names.push_back("joint" + std::to_string(n));
    }
    return s;
}

}  // namespace dfs::kin
