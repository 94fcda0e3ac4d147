#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tcsde/sde.hpp"

namespace tcsde {

struct FracPdeProblem {
    double beta = 0.5;
    std::function<double(double)> mu_fn;     // empty: zero
    std::function<double(double)> sigma_fn;  // empty: one
    double y_min = -8.0;
    double y_max = 8.0;
    int ny = 512;
    double t_final = 1.0;
    int nt = 512;
    double x_init = 0.0;
    // Snapshot times; t_final is always included.
    std::vector<double> snapshot_times;
    // Widen [y_min, y_max] to at least x_init +- 8 sigma_max sqrt(t_final).
    bool auto_widen = true;

    void validate() const;
};

// Density values at nodes; sum(masses) * cell width is the total mass.
struct DensityGrid {
    std::vector<double> y_nodes;
    std::vector<double> masses;
    double time = 0.0;
    // Mass removed by clipping negative values before renormalization.
    double clipped = 0.0;
    std::string warning;

    double cell_width() const;
    double total_mass() const;
    double mean() const;
    double variance() const;
};

// L1 scheme for the Caputo derivative, implicit finite-volume drift/diffusion with
// zero-flux walls, Dirac start mollified to a Gaussian of two cells.
std::vector<DensityGrid> solve_caputo_fpe(const FracPdeProblem& prob);

struct McDensityConfig {
    double beta = 0.5;
    std::size_t n_paths = 100000;
    double t_final = 1.0;
    int bins = 64;
    double y_min = -8.0;
    double y_max = 8.0;
    double inner_step = 1e-3;
    std::uint64_t seed = 1;
    int threads = 0;
};

// Histogram density of X(t_final) for dX = mu dE + sigma dB_E via the duality solver.
// Samples outside [y_min, y_max] are counted in total_outside.
DensityGrid mc_density(const SdeSpec& spec, const McDensityConfig& cfg, std::size_t* total_outside = nullptr);

struct DensityComparison {
    double l1 = 0.0;
    double ks = 0.0;
};

// Both densities are integrated to cell masses and rebinned onto the coarser of the two
// node sets (mass moved proportionally to overlap); l1 = sum |mass difference|,
// ks = max CDF difference on that grid.
DensityComparison compare_densities(const DensityGrid& a, const DensityGrid& b);

// Gaussian N(mean, var) as cell averages on the cells of `like`.
DensityGrid gaussian_density(const DensityGrid& like, double mean, double var);

}  // namespace tcsde
