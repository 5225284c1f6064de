// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_PARAMS_HPP
#define BORELFLOW_PARAMS_HPP

#include <algorithm>
#include <stdexcept>

namespace borelflow {

enum class Problem { boussinesq, mhd };

/// Physical coefficients shared by both systems.
///
/// Boussinesq uses (nu, mu_thermal, buoyancy_a); the magnetic system uses
/// (nu, mu_mag, sigma, rho) with magnetic diffusivity 1/(mu_mag*sigma) and
/// Lorentz prefactor 1/(mu_mag*rho).
struct PhysicalParams {
    double nu = 1.0;         // kinematic viscosity
    double mu_thermal = 1.0; // thermal diffusivity
    double buoyancy_a = 0.0; // buoyancy coupling (>= 0)
    double mu_mag = 1.0;     // magnetic permeability
    double sigma = 1.0;      // electric conductivity
    double rho = 1.0;        // density
    int dim = 2;

    void validate() const {
        if (nu <= 0.0) throw std::invalid_argument("PhysicalParams: nu must be positive");
        if (mu_thermal <= 0.0) throw std::invalid_argument("PhysicalParams: mu_thermal must be positive");
        if (buoyancy_a < 0.0) throw std::invalid_argument("PhysicalParams: buoyancy_a must be nonnegative");
        if (mu_mag <= 0.0) throw std::invalid_argument("PhysicalParams: mu_mag must be positive");
        if (sigma <= 0.0) throw std::invalid_argument("PhysicalParams: sigma must be positive");
        if (rho <= 0.0) throw std::invalid_argument("PhysicalParams: rho must be positive");
        if (dim != 2 && dim != 3) throw std::invalid_argument("PhysicalParams: dim must be 2 or 3");
    }

    double m1() const { return std::max(nu, mu_thermal); }
    double m2() const { return std::max(nu, 1.0 / (mu_mag * sigma)); }
    double m3() const { return std::max(1.0, 1.0 / (mu_mag * rho)); }

    /// Magnetic diffusivity of the induction equation.
    double eta_mag() const { return 1.0 / (mu_mag * sigma); }
    /// Lorentz-force prefactor.
    double lorentz() const { return 1.0 / (mu_mag * rho); }

    /// Diffusivity of the companion equation (theta or B).
    double companion_diffusivity(Problem pb) const {
        return pb == Problem::boussinesq ? mu_thermal : eta_mag();
    }
};

} // namespace borelflow

#endif
