#include "simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <queue>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace codedq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ArrivalSchedule ArrivalSchedule::make_fixed(std::vector<double> rates) {
    ArrivalSchedule s;
    s.time_varying = false;
    s.fixed = std::move(rates);
    for (double r : s.fixed)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw ConfigError("schedule: rates must be finite and non-negative");
    return s;
}

ArrivalSchedule ArrivalSchedule::make_waves(std::vector<SquareWave> waves) {
    ArrivalSchedule s;
    s.time_varying = true;
    s.waves = std::move(waves);
    for (const auto& w : s.waves) {
        if (w.low < 0.0 || w.high < 0.0) throw ConfigError("wave: negative rate");
        if (!(w.period > 0.0)) throw ConfigError("wave: period must be positive");
        if (!(w.high_fraction > 0.0 && w.high_fraction < 1.0))
            throw ConfigError("wave: high_fraction must be in (0,1)");
    }
    return s;
}

double ArrivalSchedule::rate_at(int type, double t) const {
    if (!time_varying) return fixed[type];
    const SquareWave& w = waves[type];
    double pos = std::fmod(t - w.phase_shift, w.period);
    if (pos < 0.0) pos += w.period;
    return pos < w.high_fraction * w.period ? w.high : w.low;
}

double ArrivalSchedule::next_change(int type, double t) const {
    if (!time_varying) return kInf;
    const SquareWave& w = waves[type];
    double rel = t - w.phase_shift;
    double m = std::floor(rel / w.period);
    double pos = rel - m * w.period;
    double cut = w.high_fraction * w.period;
    double next_pos = pos < cut ? cut : w.period;
    double next = w.phase_shift + m * w.period + next_pos;
    if (next <= t) next = w.phase_shift + (m + 1) * w.period + cut;
    return next;
}

std::vector<double> ArrivalSchedule::rates_at(double t) const {
    int k = static_cast<int>(time_varying ? waves.size() : fixed.size());
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = rate_at(i, t);
    return out;
}

double ArrivalSchedule::max_period() const {
    double p = 0.0;
    for (const auto& w : waves) p = std::max(p, w.period);
    return p;
}

namespace {

constexpr int kArrival = 0;
constexpr int kDone = 1;
constexpr int kSample = 2;

struct Event {
    double t;
    std::uint64_t seq;
    int kind;
    int a;
};

struct EventCmp {
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t > y.t;
        return x.seq > y.seq;
    }
};

struct Job {
    double arrival = 0.0;
    int type = 0;
    int remaining = 0;
};

class Engine {
public:
    Engine(const SystemSpec& system, const ArrivalSchedule& schedule,
           const PolicyProvider& policies, const RunConfig& config, int replication)
        : sys_(system), sched_(schedule), policies_(policies), cfg_(config) {
        const int k = sys_.k;
        offsets_.resize(k + 1);
        offsets_[0] = 0;
        for (int i = 0; i < k; ++i) offsets_[i + 1] = offsets_[i] + sys_.systematic[i];
        coded_base_ = sys_.n - sys_.n_coded;
        queues_.resize(sys_.n);
        route_rng_ = Xoshiro256pp::seeded(cfg_.seed, replication, 0);
        server_rng_.reserve(sys_.n);
        for (int s = 0; s < sys_.n; ++s)
            server_rng_.push_back(Xoshiro256pp::seeded(cfg_.seed, replication, 1 + s));
        occ_per_type_.assign(k, 0);
        resp_sum_pt_.assign(k, 0.0);
        resp_cnt_pt_.assign(k, 0);
    }

    void set_isolated(const RecoveryPattern& pattern, long long injections) {
        isolated_ = true;
        iso_pattern_ = pattern;
        iso_injections_ = injections;
        stats_active_ = true;
    }

    SimStats run() {
        const bool tv = sched_.time_varying;
        if (tv) {
            warmup_time_ = sched_.max_period();
            if (cfg_.horizon <= warmup_time_)
                throw ConfigError("run: horizon must exceed one warmup period");
        } else if (!isolated_) {
            warmup_departures_ =
                std::min<long long>(static_cast<long long>(cfg_.warmup_fraction *
                                                           cfg_.target_departures),
                                    cfg_.target_departures - 1);
            if (warmup_departures_ <= 0) {
                stats_active_ = true;
                stats_start_ = 0.0;
            }
        }

        if (isolated_) {
            push(0.0, kArrival, 0);
        } else {
            for (int i = 0; i < sys_.k; ++i) schedule_arrival(i, 0.0);
        }
        if (tv && cfg_.record_trajectory) {
            traj_dt_ = cfg_.trajectory_dt > 0.0 ? cfg_.trajectory_dt
                                                : sched_.waves[0].period / 200.0;
            push(0.0, kSample, 0);
        }

        while (!fel_.empty()) {
            Event ev = fel_.top();
            if (tv && ev.t > cfg_.horizon) break;
            fel_.pop();
            now_ = ev.t;
            switch (ev.kind) {
                case kArrival: on_arrival(ev.a); break;
                case kDone: on_done(ev.a); break;
                case kSample: on_sample(); break;
            }
            if (!tv && !isolated_ && total_departures_ >= cfg_.target_departures) break;
            if (isolated_ && total_departures_ >= iso_injections_) break;
        }

        SimStats out;
        double end_time = tv ? cfg_.horizon : now_;
        if (stats_active_) {
            touch(end_time);
            double span = end_time - stats_start_;
            out.mean_jobs_in_system = span > 0.0 ? occ_integral_ / span : 0.0;
        }
        out.departures_counted = resp_cnt_;
        out.arrivals_total = total_arrivals_;
        out.departures_total = total_departures_;
        out.final_occupancy = occ_;
        out.mean_response = resp_cnt_ > 0 ? resp_sum_ / resp_cnt_ : 0.0;
        out.per_type_mean_response.assign(sys_.k, 0.0);
        for (int i = 0; i < sys_.k; ++i)
            if (resp_cnt_pt_[i] > 0)
                out.per_type_mean_response[i] = resp_sum_pt_[i] / resp_cnt_pt_[i];
        out.std_error = std::numeric_limits<double>::quiet_NaN();
        out.trajectory = std::move(trajectory_);
        return out;
    }

    long long arrivals() const { return total_arrivals_; }
    long long departures() const { return total_departures_; }
    long long occupancy() const { return occ_; }

private:
    void push(double t, int kind, int a) { fel_.push(Event{t, seq_++, kind, a}); }

    void schedule_arrival(int type, double from) {
        double t = from;
        for (;;) {
            double rate = sched_.rate_at(type, t);
            double boundary = sched_.next_change(type, t);
            if (rate <= 0.0) {
                if (boundary == kInf) return;  // silent type
                t = boundary;
                continue;
            }
            double dt = route_rng_.exponential(rate);
            if (t + dt <= boundary) {
                push(t + dt, kArrival, type);
                return;
            }
            t = boundary;  // memorylessness: redraw at the rate switch
        }
    }

    void touch(double t) {
        if (!stats_active_) {
            if (sched_.time_varying && t >= warmup_time_) {
                stats_active_ = true;
                stats_start_ = warmup_time_;
                occ_integral_ = 0.0;
                last_change_ = warmup_time_;
            } else {
                return;
            }
        }
        occ_integral_ += static_cast<double>(occ_) * (t - last_change_);
        last_change_ = t;
    }

    int pick_in_class(int base, int size) {
        return base + static_cast<int>(route_rng_.uniform_int(size));
    }

    void start_service(int server) {
        double s = server_rng_[server].exponential(1.0);
        push(now_ + s, kDone, server);
    }

    void enqueue(int server, int job) {
        queues_[server].push_back(job);
        if (queues_[server].size() == 1) start_service(server);
    }

    int alloc_job(double arrival, int type) {
        int id;
        if (!free_jobs_.empty()) {
            id = free_jobs_.back();
            free_jobs_.pop_back();
        } else {
            id = static_cast<int>(jobs_.size());
            jobs_.push_back({});
        }
        jobs_[id] = Job{arrival, type, 0};
        return id;
    }

    void dispatch(int job, const RecoveryPattern& pat) {
        Job& j = jobs_[job];
        if (pat.num_coded == 0) {
            j.remaining = 1;
            enqueue(pick_in_class(offsets_[j.type], sys_.systematic[j.type]), job);
            return;
        }
        j.remaining = pat.num_coded + static_cast<int>(pat.helper_types.size());
        // distinct coded servers, uniform without replacement
        int chosen[32];
        for (int c = 0; c < pat.num_coded; ++c) {
            int srv;
            bool fresh;
            do {
                srv = pick_in_class(coded_base_, sys_.n_coded);
                fresh = true;
                for (int j2 = 0; j2 < c; ++j2)
                    if (chosen[j2] == srv) fresh = false;
            } while (!fresh);
            chosen[c] = srv;
        }
        for (int c = 0; c < pat.num_coded; ++c) enqueue(chosen[c], job);
        for (int h : pat.helper_types)
            enqueue(pick_in_class(offsets_[h], sys_.systematic[h]), job);
    }

    void on_arrival(int type) {
        if (!isolated_) schedule_arrival(type, now_);
        touch(now_);
        ++occ_;
        ++total_arrivals_;
        if (occ_ > cfg_.occupancy_cap)
            throw UnstableError("simulate: occupancy cap exceeded at t=" +
                                std::to_string(now_));
        if (isolated_) {
            int job = alloc_job(now_, iso_pattern_.job_type);
            ++occ_per_type_[iso_pattern_.job_type];
            dispatch(job, iso_pattern_);
            return;
        }
        ++occ_per_type_[type];
        int job = alloc_job(now_, type);

        const RoutingPolicy& pol = policies_(sched_.rates_at(now_));
        const auto& patterns = pattern_cache(type);
        double u = route_rng_.uniform01();
        std::size_t pick = patterns.size() - 1;
        double acc = 0.0;
        for (std::size_t p = 0; p < patterns.size(); ++p) {
            acc += pol.probs[type][p];
            if (u < acc) {
                pick = p;
                break;
            }
        }
        dispatch(job, patterns[pick]);
    }

    void on_done(int server) {
        assert(!queues_[server].empty());
        int job = queues_[server].front();
        queues_[server].pop_front();
        if (!queues_[server].empty()) start_service(server);

        Job& j = jobs_[job];
        if (--j.remaining > 0) return;

        touch(now_);
        --occ_;
        --occ_per_type_[j.type];
        ++total_departures_;

        if (!sched_.time_varying && !isolated_ && !stats_active_ &&
            total_departures_ >= warmup_departures_) {
            stats_active_ = true;
            stats_start_ = now_;
            last_change_ = now_;
            occ_integral_ = 0.0;
        } else if (counting_now()) {
            double resp = now_ - j.arrival;
            resp_sum_ += resp;
            ++resp_cnt_;
            resp_sum_pt_[j.type] += resp;
            ++resp_cnt_pt_[j.type];
        }
        free_jobs_.push_back(job);

        if (isolated_ && total_departures_ < iso_injections_)
            push(now_, kArrival, 0);
    }

    bool counting_now() const {
        if (isolated_) return true;
        if (sched_.time_varying) return now_ >= warmup_time_;
        return stats_active_;
    }

    void on_sample() {
        TrajectoryPoint pt;
        pt.time = now_;
        pt.total = occ_;
        pt.per_type.assign(occ_per_type_.begin(), occ_per_type_.end());
        trajectory_.push_back(std::move(pt));
        double next = now_ + traj_dt_;
        if (next <= cfg_.horizon + 1e-9) push(next, kSample, 0);
    }

    const std::vector<RecoveryPattern>& pattern_cache(int type) {
        if (patterns_.empty()) {
            patterns_.resize(sys_.k);
            for (int i = 0; i < sys_.k; ++i)
                patterns_[i] = enumerate_recovery_patterns(sys_, i);
        }
        return patterns_[type];
    }

    const SystemSpec& sys_;
    const ArrivalSchedule& sched_;
    const PolicyProvider& policies_;
    const RunConfig& cfg_;

    std::vector<int> offsets_;
    int coded_base_ = 0;
    std::vector<std::deque<int>> queues_;
    std::vector<Job> jobs_;
    std::vector<int> free_jobs_;
    std::vector<std::vector<RecoveryPattern>> patterns_;

    Xoshiro256pp route_rng_;
    std::vector<Xoshiro256pp> server_rng_;

    std::priority_queue<Event, std::vector<Event>, EventCmp> fel_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;

    bool isolated_ = false;
    RecoveryPattern iso_pattern_;
    long long iso_injections_ = 0;

    long long occ_ = 0;
    std::vector<long long> occ_per_type_;
    long long total_arrivals_ = 0;
    long long total_departures_ = 0;
    long long warmup_departures_ = 0;
    double warmup_time_ = 0.0;

    bool stats_active_ = false;
    double stats_start_ = 0.0;
    double last_change_ = 0.0;
    double occ_integral_ = 0.0;
    double resp_sum_ = 0.0;
    long long resp_cnt_ = 0;
    std::vector<double> resp_sum_pt_;
    std::vector<long long> resp_cnt_pt_;

    double traj_dt_ = 0.0;
    std::vector<TrajectoryPoint> trajectory_;
};

void check_policy_feasible(const SystemSpec& system, const RoutingPolicy& policy) {
    if (static_cast<int>(policy.probs.size()) != system.k)
        throw ConfigError("simulate: policy type count mismatch");
    for (int i = 0; i < system.k; ++i) {
        auto patterns = enumerate_recovery_patterns(system, i);
        if (policy.probs[i].size() != patterns.size())
            throw ConfigError("simulate: policy pattern count mismatch");
    }
}

}  // namespace

SimStats simulate(const SystemSpec& system, const ArrivalSchedule& schedule,
                  const RoutingPolicy& policy, const RunConfig& config,
                  int replication) {
    if (schedule.time_varying)
        throw ConfigError("simulate: use simulate_time_varying for square waves");
    if (static_cast<int>(schedule.fixed.size()) != system.k)
        throw ConfigError("simulate: schedule dimension mismatch");
    check_policy_feasible(system, policy);
    PolicyProvider provider = [&policy](const std::vector<double>&) -> const RoutingPolicy& {
        return policy;
    };
    Engine engine(system, schedule, provider, config, replication);
    return engine.run();
}

SimStats replicate(const SystemSpec& system, const ArrivalSchedule& schedule,
                   const RoutingPolicy& policy, const RunConfig& config) {
    if (config.replications < 1) throw ConfigError("replicate: replications >= 1");
    std::vector<SimStats> runs;
    runs.reserve(config.replications);
    for (int r = 0; r < config.replications; ++r)
        runs.push_back(simulate(system, schedule, policy, config, r));

    SimStats out;
    const int r_count = config.replications;
    out.per_type_mean_response.assign(system.k, 0.0);
    for (const auto& s : runs) {
        out.mean_response += s.mean_response;
        out.mean_jobs_in_system += s.mean_jobs_in_system;
        out.departures_counted += s.departures_counted;
        out.arrivals_total += s.arrivals_total;
        out.departures_total += s.departures_total;
        out.final_occupancy += s.final_occupancy;
        for (int i = 0; i < system.k; ++i)
            out.per_type_mean_response[i] += s.per_type_mean_response[i];
    }
    out.mean_response /= r_count;
    out.mean_jobs_in_system /= r_count;
    for (double& v : out.per_type_mean_response) v /= r_count;
    if (r_count >= 2) {
        double ss = 0.0;
        for (const auto& s : runs) {
            double d = s.mean_response - out.mean_response;
            ss += d * d;
        }
        out.std_error = std::sqrt(ss / (r_count - 1)) / std::sqrt(double(r_count));
    } else {
        out.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    out.trajectory = runs.front().trajectory;
    return out;
}

SimStats simulate_time_varying(const SystemSpec& system, const ArrivalSchedule& schedule,
                               const PolicyProvider& policies, const RunConfig& config,
                               int replication) {
    if (!schedule.time_varying)
        throw ConfigError("simulate_time_varying: schedule must be time-varying");
    if (static_cast<int>(schedule.waves.size()) != system.k)
        throw ConfigError("simulate_time_varying: schedule dimension mismatch");
    if (!(config.horizon > 0.0))
        throw ConfigError("simulate_time_varying: horizon must be positive");
    Engine engine(system, schedule, policies, config, replication);
    return engine.run();
}

SimStats run_isolated_jobs(const SystemSpec& system, const RecoveryPattern& pattern,
                           long long injections, std::uint64_t seed) {
    if (injections < 1) throw ConfigError("run_isolated_jobs: injections >= 1");
    ArrivalSchedule idle = ArrivalSchedule::make_fixed(std::vector<double>(system.k, 0.0));
    RunConfig cfg;
    cfg.seed = seed;
    cfg.target_departures = injections;
    cfg.warmup_fraction = 0.0;
    RoutingPolicy dummy = uniform_uncoded_policy(system);
    PolicyProvider provider = [&dummy](const std::vector<double>&) -> const RoutingPolicy& {
        return dummy;
    };
    Engine engine(system, idle, provider, cfg, 0);
    engine.set_isolated(pattern, injections);
    return engine.run();
}

std::string trajectory_csv(const SimStats& stats, int k) {
    std::string out = "time,total_jobs";
    for (int i = 1; i <= k; ++i) out += ",jobs_type_" + std::to_string(i);
    out += '\n';
    char buf[64];
    for (const auto& pt : stats.trajectory) {
        std::snprintf(buf, sizeof(buf), "%.10g", pt.time);
        out += buf;
        out += ',' + std::to_string(pt.total);
        for (long long v : pt.per_type) out += ',' + std::to_string(v);
        out += '\n';
    }
    return out;
}

}  // namespace codedq
