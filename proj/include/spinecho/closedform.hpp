#pragma once

#include "spinecho/types.hpp"

#include <Eigen/Dense>

namespace spinecho {

/// Analytic Hahn echo of the continuum ensemble.
struct HahnTheory {
    Dimension d{2};
    double t2 = 1.0;

    /// exp(-|t/T2|^(d/3)) for d <= 5, exp(-(t/T2)^2) for d = infinity.
    /// 6 <= d < infinity has no shape-independent form and throws DomainError.
    [[nodiscard]] double value(double t) const;
};

double hahn_analytic(const HahnTheory& theory, double t);

/// Radial factor of the echo exponent,
///   (1/3) int_0^inf (1 - cos z) / z^(d/3 + 1) dz = -(1/3) cos(pi d / 6) Gamma(-d/3),
/// evaluated through the reflection formula so d = 3 gives pi/6 directly.
/// Defined for 0 < d < 6.
double lambda_integral(double d);

/// Same quantity by direct quadrature; independent of the Gamma-function route.
double lambda_quadrature(double d);

/// Angular factor int |b(theta)|^(d/3) dA over the unit (d-1)-sphere with
/// b(theta) = (1 - 3 cos^2 theta) / 4. For d = 2 with the axis normal to the
/// plane, b = 1/4 on the whole circle.
double sphere_factor(int d, AxisMode mode = AxisMode::NormalToPlane);

/// T2 = [f_s Lambda int |b|^(d/3) dA]^(-3/d) for 2 <= d <= 5.
///
/// The angular factor uses b = (1 - 3 cos^2 theta)/4, i.e. the echo phase
/// b t / r^3. The secular Hamiltonian pair term J S_z S_z with
/// J = (1 - 3 cos^2 theta)/r^3 produces the phase J t / 2 = 2 b t / r^3, so the
/// Hahn echo of the simulated model decays on hahn_time_scale * T2.
double t2_from_density(int d, double density, AxisMode mode = AxisMode::NormalToPlane);

/// Ratio of the simulated-model echo time to t2_from_density.
inline constexpr double hahn_time_scale = 0.5;

/// Inverse of t2_from_density.
double density_from_t2(int d, double t2, AxisMode mode = AxisMode::NormalToPlane);

/// Exact infinite-temperature Hahn echo of the reduced (Ising) model:
///   (1/N_s) sum_i prod_{j != i} cos(J_ij t / 2).
/// Local fields are refocused exactly by the ideal pulse at t/2.
double reduced_hahn_product(const Eigen::MatrixXd& couplings, double t);

/// cos^(N_s - 1)(2 J t).
double infinite_d_hahn(int n_spins, double j, double t);

}  // namespace spinecho
