#pragma once
// Monte Carlo certification of the three estimation objectives for a
// (system, channel, scheme) triple, plus empirical capacity-threshold sweeps.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "estent/channels.hpp"
#include "estent/coding.hpp"
#include "estent/systems.hpp"

namespace estent {

// A runnable estimator: produces a trajectory with estimates over a channel.
class Scheme {
 public:
  virtual ~Scheme() = default;
  virtual TrajectoryBlock run(const SystemModel& system, const Channel& channel,
                              int horizon, std::uint64_t seed) const = 0;
  // Earliest step from which the estimate is expected to track the state
  // (start of the everywhere-tail objective); negative when the scheme has no
  // such warm-up notion.
  virtual std::int64_t lock_on() const { return -1; }
  virtual std::int64_t min_horizon() const { return 1; }
  virtual std::int64_t max_horizon() const {
    return std::numeric_limits<std::int64_t>::max();
  }
  virtual std::string name() const = 0;
};

// Ideal reference estimator: copies the true state (noiseless channel with an
// unconstrained alphabet).  Useful as the harness sanity anchor.
class CopyScheme : public Scheme {
 public:
  TrajectoryBlock run(const SystemModel& system, const Channel& channel,
                      int horizon, std::uint64_t seed) const override;
  std::int64_t lock_on() const override { return 0; }
  std::string name() const override { return "copy"; }
};

// Wraps a built spanning-set block-coding scheme.  When the runtime system is
// noisy, the scheme codes the zero-noise skeleton orbit while the recorded
// truth follows the noisy dynamics from the same initial state, so the
// report shows the noise-floor failure honestly.  Horizons beyond the
// scheme's own sampling schedule are covered by continuing the final replay.
class SpanningRunner : public Scheme {
 public:
  explicit SpanningRunner(SpanningScheme scheme) : scheme_(std::move(scheme)) {}
  TrajectoryBlock run(const SystemModel& system, const Channel& channel,
                      int horizon, std::uint64_t seed) const override;
  std::int64_t lock_on() const override { return scheme_.lock_on(); }
  std::int64_t min_horizon() const override { return scheme_.min_horizon(); }
  std::string name() const override { return "spanning"; }
  const SpanningScheme& scheme() const { return scheme_; }

 private:
  SpanningScheme scheme_;
};

// Wraps an adaptive zoom quantizer scheme for linear systems over erasures.
class ZoomRunner : public Scheme {
 public:
  explicit ZoomRunner(ZoomScheme scheme) : scheme_(std::move(scheme)) {}
  TrajectoryBlock run(const SystemModel& system, const Channel& channel,
                      int horizon, std::uint64_t seed) const override;
  std::string name() const override { return "zoom"; }
  const ZoomScheme& scheme() const { return scheme_; }

 private:
  ZoomScheme scheme_;
};

struct ObjectiveReport {
  double epsilon = 0.0;
  int trials = 0;
  int horizon = 0;
  // start of the everywhere-tail objective window; always <= the final-20%
  // window start so that objective 1 implies objective 2
  int tail_start = 0;
  double e1_pass_fraction = 0.0;  // sup over [tail_start, horizon) <= epsilon
  double e2_pass_fraction = 0.0;  // sup over the final 20% window <= epsilon
  double e3_tail_mse = 0.0;       // mean over trials of avg d^2 on the window
  std::vector<double> per_trial_max_tail_error;  // per trial, over the window
};

nlohmann::json objective_report_json(const ObjectiveReport& report);

ObjectiveReport evaluate(const SystemModel& system, const Channel& channel,
                         const Scheme& scheme, double epsilon, int trials,
                         int horizon, std::uint64_t master_seed, int threads = 1);

// One candidate channel in a capacity-ordered family.
struct ChannelGridPoint {
  double capacity_bits = 0.0;
  Channel channel = Channel::noiseless(2);
  std::string label;
};

// Builds a scheme for a given channel, accuracy target and horizon (schemes
// size their block schedules to the horizon).  Throwing budget_error marks
// the candidate as infeasible (counted as a failure at that capacity).
using SchemeFactory = std::function<std::unique_ptr<Scheme>(
    const SystemModel& system, const Channel& channel, double epsilon,
    int horizon, std::uint64_t seed)>;

struct SweepPoint {
  double epsilon = 0.0;
  double capacity_bits = 0.0;  // +infinity when no grid point passes
  int grid_index = -1;
  double pass_fraction = 0.0;  // e2 fraction at the accepted point
};

struct SweepTable {
  std::vector<SweepPoint> rows;  // epsilon descending
};

// For each accuracy target, scans the capacity grid upward and reports the
// smallest capacity whose scheme passes the tail objective in >= 95% of
// trials.  The scan resumes where the previous (larger) epsilon stopped, so
// the reported thresholds are monotone as epsilon shrinks.
SweepTable capacity_sweep(const SystemModel& system, const SchemeFactory& family,
                          const std::vector<ChannelGridPoint>& grid,
                          std::vector<double> epsilons, int trials, int horizon,
                          std::uint64_t master_seed, int threads = 1);

nlohmann::json sweep_table_json(const SweepTable& table,
                                const std::vector<ChannelGridPoint>& grid);

// Largest top block index (>= 2) whose sampling schedule still fits inside
// the horizon.
int spanning_blocks_for_horizon(int horizon);

// Standard families for the sweep: spanning schemes (built on the zero-noise
// skeleton of the supplied system) and per-mode zoom schemes.
SchemeFactory make_spanning_family(SpanningSchemeOptions options = {});
SchemeFactory make_zoom_family(std::vector<int> rates,
                               std::vector<double> initial_halfwidth);

}  // namespace estent
