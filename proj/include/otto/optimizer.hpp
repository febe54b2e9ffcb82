#ifndef OTTO_OPTIMIZER_HPP
#define OTTO_OPTIMIZER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "otto/cycle.hpp"

namespace otto {

struct SearchSpec {
    Target target = Target::Tot;
    double grid = 1.0 / 32.0;
    StrokeDurations initial{0.78125, 1.84375, 0.6875, 2.625};
    StrokeDurations lower{1.0 / 32.0, 1.0 / 32.0, 1.0 / 32.0, 1.0 / 32.0};
    StrokeDurations upper{16.0, 16.0, 16.0, 16.0};
    int initial_step = 8; // in grid units; halved until a single grid step stalls
    int max_evaluations = 400;
    std::uint64_t seed = 0; // permutes the neighbour order, which breaks ties
    bool refine = false;    // continuous Nelder-Mead polish after the grid search
    int refine_evaluations = 60;
};

struct SearchStep {
    StrokeDurations durations;
    double power;
};

struct SearchResult {
    StrokeDurations durations;
    CycleRecord record;
    double power = 0.0;
    std::vector<SearchStep> trace; // accepted moves, starting point first
    int evaluations = 0;
    int failures = 0;
    bool budget_exhausted = false;
    bool refined = false; // the continuous polish ran
};

/// Coordinate pattern search on the duration grid: evaluate the +-step
/// neighbours of every coordinate, move to the best improving one, halve the
/// step when none improves, and stop when a single grid step finds nothing.
/// Each evaluation runs the engine to its steady cycle.
SearchResult maximize_power(const EngineConfig& cfg, const SearchSpec& spec);

struct DephasingSweepRow {
    double coupling;
    double gamma_eff;
    SearchResult sys;
    SearchResult tot;
    std::string status; // "ok" or the failure message
};

/// Optimizes both power targets for each coupling (mode frequency and width fixed).
std::vector<DephasingSweepRow> sweep_dephasing(const EngineConfig& cfg, const std::vector<double>& couplings,
                                               const SearchSpec& spec);

struct WidthSweepRow {
    double width;
    double frequency;
    double gamma_eff;
    CycleRecord record;
    double bound_lower;
    double bound_upper;
    std::string status;
};

/// Fixed durations, mode width moved towards the critical value at constant
/// effective dephasing rate; the mode frequency follows the constant-power curve.
std::vector<WidthSweepRow> sweep_gamma_to_gamma0(const EngineConfig& base, const std::vector<double>& widths);

struct LambdaRow {
    double lambda;
    CycleRecord record;
    double ansatz_distance; // max over the steady cycle
    std::string status;
};

std::vector<LambdaRow> lambda_scan(const EngineConfig& base, const std::vector<double>& lambdas);

void write_sweep_csv(const std::string& path, const std::vector<DephasingSweepRow>& rows);
void write_width_csv(const std::string& path, const std::vector<WidthSweepRow>& rows);
void write_lambda_csv(const std::string& path, const std::vector<LambdaRow>& rows);

} // namespace otto

#endif
