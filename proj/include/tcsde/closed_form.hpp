#pragma once

#include <functional>
#include <map>
#include <string>

#include "tcsde/path.hpp"
#include "tcsde/sde.hpp"

namespace tcsde {

// Coefficient of (t, u); empty means zero.
using TUFn = std::function<double(double t, double u)>;

// dX = (rho1 + rho2 X) dt + (mu1 + mu2 X) dE + (sigma1 + sigma2 X) dB_E
struct LinearCoeffs {
    TUFn rho1, rho2, mu1, mu2, sigma1, sigma2;
    double x0 = 1.0;
};

enum class PresetName { BlackScholesAnalogue, MittagLefflerDecay, TimeChangedBridge, OrnsteinUhlenbeckAnalogue, LogisticGrowth };

std::string to_string(PresetName p);
PresetName preset_from_string(const std::string& s);

struct ModelPreset {
    PresetName name = PresetName::BlackScholesAnalogue;
    std::map<std::string, double> params;

    // Parameter or its default; unknown keys are rejected by validate().
    double get(const std::string& key) const;
    void validate() const;
    // The same model as an SDE for the numerical solvers.
    SdeSpec as_spec() const;
};

// Parameter names and defaults of a preset.
const std::map<std::string, double>& preset_defaults(PresetName p);

// x0 * exp{int rho2 ds + int (mu2 - sigma2^2/2) dE + int sigma2 dB_E}; rho1, mu1, sigma1 ignored.
// ds by trapezoid, dE and dB_E by left-point sums, all on the event grid of the driver;
// reported on the outer grid.
CadlagPath fundamental_solution(const LinearCoeffs& c, const DrivingTriple& driver);
// Same exponent with the dE and dB_E parts carried on the inner clock.
CadlagPath fundamental_solution_inner(const LinearCoeffs& c, const DrivingTriple& driver);

// Phi_t [x0 + int rho1/Phi ds + int (mu1 - sigma2 sigma1)/Phi dE + int sigma1/Phi dB_E],
// Phi the fundamental solution with unit start. Throws NumericalError when Phi underflows.
CadlagPath general_linear_solution(const LinearCoeffs& c, const DrivingTriple& driver);
// Inner-clock form: the dE and dB_E integrals become du and dB integrals up to E_t
// with integrands read at D(u-).
CadlagPath general_linear_solution_inner(const LinearCoeffs& c, const DrivingTriple& driver);

// Integrating factor U = exp{int (sigma2^2/2 - mu2) dE - int sigma2 dB_E}, W = U X solved
// path by path: RK4 for the dt part with U and E frozen over each event cell, the dE and
// dB_E parts of affine mu and sigma added as explicit forcing. mu and sigma must be affine in x.
CadlagPath reduce_and_solve(const SdeSpec& spec, const DrivingTriple& driver, int ode_substeps = 4);

// Closed-form solution of the named example, pathwise on the driver.
CadlagPath preset_solution(const ModelPreset& m, const DrivingTriple& driver);

}  // namespace tcsde
