#pragma once

#include <variant>

#include "pairpol/random.hpp"
#include "pairpol/vec.hpp"

namespace pairpol {

//! Electron rest energy [keV]. Also the energy of each annihilation photon.
inline constexpr double electron_mass = 511.0;
inline constexpr double annihilation_energy = electron_mass;

inline constexpr double pi = 3.14159265358979323846;

struct Unpolarized
{
    bool operator==(Unpolarized const&) const = default;
};

//! Linear polarization along a unit vector transverse to the flight direction
struct LinearPolarization
{
    Vec3 axis;
    bool operator==(LinearPolarization const&) const = default;
};

using Polarization = std::variant<Unpolarized, LinearPolarization>;

//---------------------------------------------------------------------------//
/*!
 * Energy, direction, and polarization of one photon in flight.
 *
 * Construction validates the invariants: positive energy, unit direction,
 * and (for linear polarization) a unit axis orthogonal to the direction, all
 * within 1e-12. Violations throw std::domain_error.
 */
class PhotonState
{
  public:
    PhotonState(double energy, Vec3 const& direction, Polarization pol);

    double energy() const { return energy_; }
    Vec3 const& direction() const { return direction_; }
    Polarization const& polarization() const { return pol_; }
    bool is_polarized() const
    {
        return std::holds_alternative<LinearPolarization>(pol_);
    }

  private:
    double energy_;
    Vec3 direction_;
    Polarization pol_;
};

//---------------------------------------------------------------------------//
/*!
 * Result of one sampled Compton scatter.
 *
 * `phi` is measured from the incident polarization axis for a polarized
 * photon, and from the deterministic transverse-frame axis
 * (see transverse_frame) for an unpolarized one. `flipped` is set when the
 * final polarization is the basis vector orthogonal to the projection of the
 * incident polarization.
 */
struct ScatterSample
{
    double theta{};
    double phi{};
    double energy_out{};
    double epsilon{};
    double recoil_energy{};
    Vec3 direction_out{Vec3::UnitZ()};
    Polarization polarization_out{Unpolarized{}};
    bool flipped{false};
};

// Scattered photon energy [keV]
double scattered_energy(double energy, double theta);

// Scattering angle producing a given electron recoil energy [rad]
double scatter_angle_for_recoil(double energy, double recoil);

// Polarized Klein-Nishina cross section, r_e = 1, phi from the polarization
double kn_dcs_polarized(double energy, double theta, double phi);

// Azimuth-averaged Klein-Nishina cross section, r_e = 1
double kn_dcs_unpolarized(double energy, double theta);

// Azimuthal asymmetry of polarized scattering at fixed polar angle
double analyzing_power(double energy, double theta);

// Cross section for incident -> final polarization separated by pol_angle
double kn_dcs_pol_to_pol(double energy, double theta, double pol_angle);

// Probability of the orthogonal final polarization at azimuth phi
double flip_fraction(double energy, double theta, double phi);

// flip_fraction for polarization perpendicular to the scattering plane
double flip_probability(double energy, double theta);

//---------------------------------------------------------------------------//
/*!
 * Rejection sampler for Compton scattering at a fixed incident energy.
 *
 * The polar angle can be restricted to [theta_min, theta_max]; a zero-width
 * range fixes the polar angle. Proposals are uniform in (cos theta, phi) and
 * accepted against a global envelope found on a coarse grid and inflated by
 * 1.05. Throws std::logic_error if a proposal ever exceeds the envelope.
 */
class ComptonSampler
{
  public:
    explicit ComptonSampler(double energy,
                            double theta_min = 0.0,
                            double theta_max = pi);

    ScatterSample operator()(PhotonState const& photon, Rng& rng) const;

    //! Sample (theta, phi) only, phi measured from the polarization axis
    std::pair<double, double> sample_angles(Rng& rng) const;

    double energy() const { return energy_; }
    double envelope() const { return envelope_; }

  private:
    double energy_;
    double theta_min_;
    double theta_max_;
    double cos_lo_;
    double cos_hi_;
    double envelope_;
};

// Scatter built from explicit angles; final polarization still sampled
ScatterSample scatter_at(PhotonState const& photon,
                         double theta,
                         double phi,
                         Rng& rng);

// Sample a full scatter for any valid photon
ScatterSample sample_scatter(PhotonState const& photon, Rng& rng);

}  // namespace pairpol
