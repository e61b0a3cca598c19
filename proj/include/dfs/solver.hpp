#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dfs::solver {

// Flat parameter vector; the owning ForwardModel knows its decomposition and
// how to project it back onto the valid manifold.
using Estimate = std::vector<double>;
using Observation = std::vector<double>;

// Deterministic forward process f plus its data energy. data_energy(y,y) must
// be 0; project() renormalizes manifold components (e.g. unit quaternions)
// and must be idempotent.
class ForwardModel {
  public:
    virtual ~ForwardModel() = default;
    virtual Observation simulate(const Estimate& x) const = 0;
    virtual double data_energy(const Observation& y_sim, const Observation& y_obs) const = 0;
    virtual Estimate project(Estimate x) const = 0;
    virtual int estimate_dim() const = 0;
    virtual std::string describe() const = 0;  // e.g. "quat(4),trans(3)"
};

// Learned (or hand-built) update g(x^t, y^t, y) -> delta x.
using UpdateFn = std::function<Estimate(const Estimate& x, const Observation& y_sim, const Observation& y_obs)>;

struct SolverConfig {
    int stages = 1;
    bool damping = false;
    double lambda_floor = 0x1p-10;
    // stop when ||x^{t+1} - x^t|| <= step_tolerance (if set)
    std::optional<double> step_tolerance;
    // with damping on, a stage whose incoming energy is <= this stops the
    // trajectory (nothing can strictly improve on zero)
    double energy_stop = 0.0;
};

struct StageRecord {
    Estimate x;
    std::optional<double> energy;  // E_data(f(x), y); unset for the final state of an undamped run
    double lambda = 1.0;           // step scale used to reach this state (1 before any step)
    bool stalled = false;          // damping hit the floor without strict improvement
    double forward_ms = 0.0;       // forward-model time spent in the stage that produced this state
    double update_ms = 0.0;        // network/update time for that stage
};

// States x^0..x^T (shorter on early convergence).
struct Trajectory {
    std::vector<StageRecord> states;

    int steps() const { return static_cast<int>(states.size()) - 1; }
    const Estimate& final_estimate() const { return states.back().x; }
};

// One damped update: lambda starts at 1 and halves until the candidate's data
// energy is strictly below energy_before or lambda reaches the floor; on a
// stall the estimate is returned unchanged. The update network is NOT
// re-evaluated here; only the forward model runs per candidate.
struct AdaptiveStepResult {
    Estimate x;
    double lambda;
    double energy;  // data energy at the returned estimate
    bool stalled;
    int forward_calls;
};

AdaptiveStepResult adaptive_step(const Estimate& x, const Estimate& delta, const ForwardModel& f,
                                 const Observation& y_obs, double energy_before, const SolverConfig& cfg);

// Iterates x^{t+1} = project(x^t + lambda * g_t(x^t, f(x^t), y)) for
// cfg.stages steps. updates[t] supplies stage t's network; a single shared
// update is reused for every stage. With damping off, lambda = 1 and exactly
// cfg.stages forward calls are made.
Trajectory solve(const Observation& y_obs, const ForwardModel& f, const Estimate& x0,
                 const std::vector<UpdateFn>& updates, const SolverConfig& cfg);

struct RuntimeBreakdown {
    double forward_ms;
    double update_ms;
    double total_ms;
};

// Per-stage arithmetic means over a trajectory's timing data.
RuntimeBreakdown runtime_breakdown(const Trajectory& traj);

}  // namespace dfs::solver
