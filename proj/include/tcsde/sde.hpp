#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcsde/path.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

// Coefficient of (t, u, x); an empty function means identically zero.
using Coef = std::function<double(double t, double u, double x)>;

struct SdeSpec {
    std::string name;
    Coef rho, mu, sigma;
    double x0 = 0.0;
    std::optional<double> lipschitz_hint;
};

struct DrivingTriple {
    TimeChangePair pair;
    CadlagPath b_of_e;
    std::optional<CadlagPath> inner_b;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
};

enum class Scheme { EulerDirect, Duality };
std::string to_string(Scheme s);

struct SolutionPath {
    CadlagPath path;
    Scheme scheme = Scheme::EulerDirect;
    double step = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::string spec_name;
};

// Brownian motion on the inner grid of the pair (component k of an
// n-dimensional noise uses its own stream).
CadlagPath inner_brownian(const TimeChangePair& pair, std::uint64_t seed, std::uint64_t path_index, unsigned component = 0);

DrivingTriple make_driver(const TimeChangePair& pair, std::uint64_t seed, std::uint64_t path_index = 0,
                          unsigned component = 0);
std::vector<DrivingTriple> make_drivers(const TimeChangePair& pair, unsigned n, std::uint64_t seed,
                                        std::uint64_t path_index = 0);

// Inverse-stable drivers for a ladder of steps (inner step = outer step = steps[j]),
// all sampled from one subordinator and one Brownian path at the finest step so that
// refinement compares like with like. Every step must be an integer multiple of the finest.
std::vector<DrivingTriple> stable_driver_ladder(double beta, std::span<const double> steps, double horizon,
                                                std::uint64_t seed, std::uint64_t path_index);

// The driver resampled on the event grid: outer grid merged with the subordinator
// values inside the horizon. Each event cell carries at most one inner increment of a
// stepped subordinator. outer_index[k] is the position of outer point k.
struct EventDriver {
    DrivingTriple driver;
    std::vector<std::size_t> outer_index;
};
EventDriver refine_to_events(const DrivingTriple& d);
std::vector<EventDriver> refine_to_events(const std::vector<DrivingTriple>& ds);

// Samples a path given on the event grid back at the outer points.
CadlagPath to_outer(const CadlagPath& on_events, const EventDriver& ev, const MonotonePath& outer);

// Euler-Maruyama with left-point coefficients, stepped on the event grid and
// reported on the outer grid.
SolutionPath solve_euler(const SdeSpec& spec, const DrivingTriple& driver);
// The event-grid path itself (solve_euler reports it at the outer points).
SolutionPath solve_euler_events(const SdeSpec& spec, const EventDriver& ev);
// Same scheme on the outer grid only (coarser; one Euler step per outer cell).
SolutionPath solve_euler_outer(const SdeSpec& spec, const DrivingTriple& driver);

// Classical Euler on the inner clock driven by inner_b, then composed with E.
// Requires rho absent; mu and sigma are called with t = D(u).
SolutionPath solve_duality(const SdeSpec& spec, const DrivingTriple& driver);

// Throws ConfigError when a sampled difference quotient in x exceeds 1.1 L.
void check_lipschitz(const SdeSpec& spec, const DrivingTriple& driver);

using MatFn = std::function<Eigen::MatrixXd(double t, double u)>;
using VecFn = std::function<Eigen::VectorXd(double t, double u)>;

// dX = (rho1 + rho2 X) dt + (mu1 + mu2 X) dE + sum_k (sigma1_k + sigma2_k X) dB^k_E.
// Empty functions are zero.
struct LinearMatrixCoeffs {
    int dim = 1;
    MatFn rho2, mu2;
    std::vector<MatFn> sigma2;
    VecFn rho1, mu1;
    std::vector<VecFn> sigma1;
    Eigen::VectorXd x0;
};

struct MatrixSolution {
    std::vector<double> grid;
    std::vector<Eigen::MatrixXd> phi;
    std::vector<Eigen::VectorXd> x;
};

MatrixSolution solve_linear_matrix(const LinearMatrixCoeffs& c, const std::vector<DrivingTriple>& drivers,
                                   double max_condition = 1e12);

}  // namespace tcsde
