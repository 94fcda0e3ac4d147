#pragma once

#include <functional>

#include "tcsde/path.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

struct IntegralResult {
    CadlagPath path;
    double scheme_step = 0.0;
};

// Verifier output: sup-norm and RMS of LHS - RHS over the outer grid.
struct Residual {
    double sup = 0.0;
    double rms = 0.0;
};

// Running forward sum sum_i h(t_i) (z(t_{i+1}) - z(t_i)). Both paths must share a grid.
IntegralResult ito_sum(const CadlagPath& h, const CadlagPath& z);

// Running sum of squared increments; jumps split into continuous part and jump.
CadlagPath quadratic_variation(const CadlagPath& z);

// a*y + b*z on the union grid.
CadlagPath combine(const CadlagPath& y, double a, const CadlagPath& z, double b);
// Pointwise product on the union grid.
CadlagPath multiply(const CadlagPath& y, const CadlagPath& z);
// [y, z] by polarization.
CadlagPath covariation(const CadlagPath& y, const CadlagPath& z);

CadlagPath compose(const CadlagPath& z, const MonotonePath& e);

// D(u-), with D(0-) = 0.
double left_limit_at(const MonotonePath& d, double u);
// Inner-clock integrand K_{D(u-)} for the inner cell starting at u: K at its last
// grid point not after D(u-).
double at_inverse_clock(const CadlagPath& k, const MonotonePath& d, double u);

// t -> int_0^{T_t} K_{S(u-)} dZ_u on the outer grid of the pair: the running inner
// sum with integrand read through the inverse clock. z lives on the inner clock.
CadlagPath integrate_on_inner_clock(const CadlagPath& k, const CadlagPath& z, const TimeChangePair& pair);

// int_0^{T_t} H dZ  vs  int_0^t H_{T(s-)} dZ_{T_s}
Residual verify_first_cov(const CadlagPath& h, const CadlagPath& z, const TimeChangePair& pair);
// int_0^t K dZ_{T_s}  vs  int_0^{T_t} K_{S(s-)} dZ_s
Residual verify_second_cov(const CadlagPath& k, const CadlagPath& z, const TimeChangePair& pair);
// [Z o T, Z o T]  vs  [Z, Z] o T
Residual verify_qv_composition(const CadlagPath& z, const TimeChangePair& pair);

struct C2Function {
    std::function<double(double)> f, df, d2f;
};

// Outer-clock integrands of X = int A ds + int F dE + int G dZ_E.
struct ItoIntegrands {
    CadlagPath a, f, g;
};

// Running sums on the outer grid of X per the integrands above.
CadlagPath assemble_x(const ItoIntegrands& in, const CadlagPath& z, const TimeChangePair& pair);

// f(X_t) - f(0) against the time-changed Ito expansion with the dE and dZ_E
// parts carried on the inner clock. Double pairs only.
Residual verify_tc_ito(const ItoIntegrands& in, const CadlagPath& z, const TimeChangePair& pair, const C2Function& fn);

Residual residual_between(const std::vector<double>& lhs, const std::vector<double>& rhs);

}  // namespace tcsde
