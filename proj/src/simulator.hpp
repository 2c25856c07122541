#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "model.hpp"
#include "routing.hpp"

namespace codedq {

struct SquareWave {
    double low = 0.0;
    double high = 0.0;
    double period = 1.0;
    double high_fraction = 0.5;
    double phase_shift = 0.0;
};

struct ArrivalSchedule {
    bool time_varying = false;
    std::vector<double> fixed;      // per type, when !time_varying
    std::vector<SquareWave> waves;  // per type, when time_varying

    static ArrivalSchedule make_fixed(std::vector<double> rates);
    static ArrivalSchedule make_waves(std::vector<SquareWave> waves);

    double rate_at(int type, double t) const;
    // Next time > t at which the type's rate changes (infinity when fixed).
    double next_change(int type, double t) const;
    std::vector<double> rates_at(double t) const;
    double max_period() const;
};

struct RunConfig {
    long long target_departures = 1000000;
    double horizon = 0.0;            // time-varying runs
    double warmup_fraction = 0.1;    // fixed runs; time-varying warms up one period
    std::uint64_t seed = 42;
    int replications = 20;
    long long occupancy_cap = 1000000;
    double trajectory_dt = 0.0;      // 0 = period / 200
    bool record_trajectory = false;
};

struct TrajectoryPoint {
    double time = 0.0;
    long long total = 0;
    std::vector<long long> per_type;
};

struct SimStats {
    double mean_response = 0.0;
    double std_error = 0.0;  // NaN when replications < 2
    std::vector<double> per_type_mean_response;
    double mean_jobs_in_system = 0.0;
    long long departures_counted = 0;  // post-warmup only
    long long arrivals_total = 0;
    long long departures_total = 0;
    long long final_occupancy = 0;
    std::vector<TrajectoryPoint> trajectory;
};

// Maps the instantaneous rate vector to the policy in force; must stay valid
// for the duration of the run.
using PolicyProvider = std::function<const RoutingPolicy&(const std::vector<double>&)>;

SimStats simulate(const SystemSpec& system, const ArrivalSchedule& schedule,
                  const RoutingPolicy& policy, const RunConfig& config,
                  int replication = 0);

SimStats replicate(const SystemSpec& system, const ArrivalSchedule& schedule,
                   const RoutingPolicy& policy, const RunConfig& config);

SimStats simulate_time_varying(const SystemSpec& system, const ArrivalSchedule& schedule,
                               const PolicyProvider& policies, const RunConfig& config,
                               int replication = 0);

// Injects jobs of one type into an otherwise empty system, one at a time,
// each forced onto the given pattern; returns the mean response.
SimStats run_isolated_jobs(const SystemSpec& system, const RecoveryPattern& pattern,
                           long long injections, std::uint64_t seed);

std::string trajectory_csv(const SimStats& stats, int k);

}  // namespace codedq
