#pragma once

#include "stochlab/model.hpp"
#include "stochlab/phase_grid.hpp"

#include <string>
#include <vector>

namespace stochlab {

struct FpOptions {
    double safety = 0.4;                // fraction of the CFL bound that dt may use
    bool clip_negative = true;          // clip undershoots to zero and report the added mass
    double norm_drift_threshold = 1e-6; // per-step budget mismatch that aborts the run
};

// Mass bookkeeping of one explicit step.
struct FpStepReport {
    double absorbed = 0.0;    // mass that left through the absorbing edges
    double undershoot = 0.0;  // negative mass present before clipping (>= 0)
    double clipped = 0.0;     // mass added by clipping (0 when clipping is off)
    double min_value = 0.0;   // smallest density before clipping
};

// Cumulative budget across a run; grid mass + absorbed - clipped stays at the initial mass.
struct FpBudget {
    double initial_mass = 0.0;
    double absorbed = 0.0;
    double clipped = 0.0;
    double max_undershoot = 0.0;
};

// max stable dt before the safety factor: min(dx/|v|max, dp/|F|max, dp^2/(2 mu P)).
double fp_cfl_limit(const PhaseSpaceGrid& grid, const PhysicalConstants& consts, const FieldSpec& fields);

// One SSP-RK3 step of the conservative upwind/central discretisation.
// Throws StabilityError on a CFL violation and NumericalError on budget drift.
FpStepReport fp_step_inplace(PhaseSpaceGrid& grid, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                             const FpOptions& options = {});

PhaseSpaceGrid fp_step(PhaseSpaceGrid grid, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                       const FpOptions& options = {});

double fp_norm(const PhaseSpaceGrid& grid);

double fp_mean_energy(const PhaseSpaceGrid& grid, const PhysicalConstants& consts, const FieldSpec& fields);

struct FpDiagnostics {
    double time = 0.0;
    double norm = 0.0;
    double mean_energy = 0.0;
    double absorbed = 0.0;     // cumulative
    double clipped = 0.0;      // cumulative
    double undershoot = 0.0;   // this step
};

struct FpRun {
    PhaseSpaceGrid grid;
    FpBudget budget;
    std::vector<FpDiagnostics> diagnostics;
};

// Runs `steps` steps recording diagnostics every `record_every` steps (and at both ends).
FpRun fp_evolve(PhaseSpaceGrid grid, const PhysicalConstants& consts, const FieldSpec& fields, double dt,
                std::size_t steps, std::size_t record_every, const FpOptions& options = {});

// Product Gaussian N(x; x0, sx^2) N(p; p0, sp^2) sampled at cell centres.
PhaseSpaceGrid gaussian_phase_grid(const Axis& x_axis, const Axis& p_axis, double x0, double p0, double sigma_x,
                                   double sigma_p);

// Columns: t,norm,mean_H,absorbed,clipped,undershoot
void write_fp_diagnostics_csv(const std::string& path, const std::vector<FpDiagnostics>& diags);

}  // namespace stochlab
