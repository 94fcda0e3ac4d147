#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcsde/path.hpp"

namespace tcsde {

struct StableSubordinatorConfig {
    double beta = 0.5;
    double step = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    void validate() const;
};

enum class Bracket { Single, Double };

// d plays the role of D (or a general S), e the role of E (or T), with
// e(t) = inf{u : d(u) > t}.
struct TimeChangePair {
    MonotonePath d;
    MonotonePath e;
    Bracket bracket = Bracket::Single;
};

// Random-stream channels; keep stable, they define reproducibility.
inline constexpr std::uint64_t kClockChannel = 0;
inline constexpr std::uint64_t kNoiseChannel = 1;
inline constexpr std::uint64_t kTargetChannel = 2;

MonotonePath simulate_stable_subordinator(const StableSubordinatorConfig& cfg);
// Same stream as above, continued past cfg.horizon until the path exceeds `level`.
MonotonePath simulate_stable_subordinator_until(const StableSubordinatorConfig& cfg, double level);

// strictly_increasing: the caller knows d is strictly increasing even where stored
// values tie in floating point (tiny stable increments on a large level).
MonotonePath generalized_inverse(const MonotonePath& d, std::span<const double> out_grid, bool strictly_increasing = false);

// D induces E. `known` overrides the strict-increase test on stored values.
TimeChangePair make_pair(const MonotonePath& d, std::span<const double> out_grid, std::optional<Bracket> known = {});
// T induces S: the given path is the time change, its inverse is computed on inner_grid.
TimeChangePair make_pair_from_time_change(const MonotonePath& e, std::span<const double> inner_grid);

// z constant (within tol) on every [t(s-), t(s)] where t jumps.
bool is_synchronized(const CadlagPath& z, const MonotonePath& t, double tol = 1e-12);

// Ready-made clocks on an outer grid.
TimeChangePair identity_pair(std::span<const double> grid);
// E_t = rate * t
TimeChangePair scaled_pair(double rate, std::span<const double> out_grid);
// Inverse of a beta-stable subordinator simulated on an inner grid of spacing inner_step.
TimeChangePair inverse_stable_pair(double beta, double inner_step, std::span<const double> out_grid,
                                   std::uint64_t seed, std::uint64_t path_index);
// Rescales the inner clock so that E(horizon) = level; used for bridge clocks.
TimeChangePair normalized_pair(const TimeChangePair& p, double level);
// Inverse stable clock with the outer time rescaled instead: D simulated on [0, level]
// and divided by D(level), so E(out_grid.back()) = level and the inner step is kept.
TimeChangePair pinned_stable_pair(double beta, double inner_step, double level, std::span<const double> out_grid,
                                  std::uint64_t seed, std::uint64_t path_index);
// T_t = 1_{[1,inf)}(t) on the given outer grid, with its inverse on inner_grid (inner_grid within [0,1)).
TimeChangePair unit_step_pair(std::span<const double> out_grid, std::span<const double> inner_grid);

// Fraction of outer cells over which e does not move.
double flat_fraction(const MonotonePath& e);

}  // namespace tcsde
