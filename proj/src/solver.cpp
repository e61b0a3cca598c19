#include "dfs/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dfs::solver {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_finite(const Estimate& v, int stage, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("solve: non-finite ") + what + " at stage " + std::to_string(stage));
}

double step_norm(const Estimate& a, const Estimate& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

AdaptiveStepResult adaptive_step(const Estimate& x, const Estimate& delta, const ForwardModel& f,
                                 const Observation& y_obs, double energy_before, const SolverConfig& cfg) {
    if (x.size() != delta.size()) throw std::invalid_argument("adaptive_step: delta size mismatch");
    double lambda = 1.0;
    int calls = 0;
    while (true) {
        Estimate candidate(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) candidate[i] = x[i] + lambda * delta[i];
        candidate = f.project(std::move(candidate));
        double energy = f.data_energy(f.simulate(candidate), y_obs);
        ++calls;
        if (!std::isfinite(energy)) throw std::runtime_error("adaptive_step: non-finite candidate energy");
        if (energy < energy_before) return {std::move(candidate), lambda, energy, false, calls};
        if (lambda <= cfg.lambda_floor) return {x, cfg.lambda_floor, energy_before, true, calls};
        lambda /= 2.0;
    }
}

Trajectory solve(const Observation& y_obs, const ForwardModel& f, const Estimate& x0,
                 const std::vector<UpdateFn>& updates, const SolverConfig& cfg) {
    if (cfg.stages < 1) throw std::invalid_argument("solve: stage count must be >= 1");
    if (updates.empty()) throw std::invalid_argument("solve: no update functions");
    if (updates.size() != 1 && static_cast<int>(updates.size()) < cfg.stages)
        throw std::invalid_argument("solve: need one update per stage (or a single shared one)");
    if (!(cfg.lambda_floor > 0.0 && cfg.lambda_floor <= 1.0))
        throw std::invalid_argument("solve: lambda floor must be in (0,1]");

    Trajectory traj;
    traj.states.push_back({x0, std::nullopt, 1.0, false, 0.0, 0.0});

    for (int t = 0; t < cfg.stages; ++t) {
        const Estimate& x = traj.states.back().x;

        auto t_fwd = Clock::now();
        Observation y_sim = f.simulate(x);
        double forward_ms = ms_since(t_fwd);
        double energy = f.data_energy(y_sim, y_obs);
        traj.states.back().energy = energy;

        if (cfg.damping && energy <= cfg.energy_stop) break;  // nothing can strictly improve

        const UpdateFn& g = updates.size() == 1 ? updates[0] : updates[t];
        auto t_upd = Clock::now();
        Estimate delta = g(x, y_sim, y_obs);
        double update_ms = ms_since(t_upd);
        if (delta.size() != x.size())
            throw std::invalid_argument("solve: update at stage " + std::to_string(t) + " returned " +
                                        std::to_string(delta.size()) + " values, estimate has " +
                                        std::to_string(x.size()));
        check_finite(delta, t, "update");

        StageRecord next;
        if (cfg.damping) {
            auto t_damp = Clock::now();
            AdaptiveStepResult r = adaptive_step(x, delta, f, y_obs, energy, cfg);
            forward_ms += ms_since(t_damp);
            next.x = std::move(r.x);
            next.energy = r.energy;
            next.lambda = r.lambda;
            next.stalled = r.stalled;
        } else {
            Estimate candidate(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) candidate[i] = x[i] + delta[i];
            next.x = f.project(std::move(candidate));
            next.lambda = 1.0;
        }
        next.forward_ms = forward_ms;
        next.update_ms = update_ms;

        bool converged = cfg.step_tolerance && step_norm(next.x, x) <= *cfg.step_tolerance;
        traj.states.push_back(std::move(next));
        if (converged) break;
    }
    return traj;
}

RuntimeBreakdown runtime_breakdown(const Trajectory& traj) {
    if (traj.states.size() < 2) throw std::invalid_argument("runtime_breakdown: trajectory has no stages");
    double fwd = 0, upd = 0;
    int n = 0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        fwd += traj.states[i].forward_ms;
        upd += traj.states[i].update_ms;
        ++n;
    }
    return {fwd / n, upd / n, (fwd + upd) / n};
}

}  // namespace dfs::solver
