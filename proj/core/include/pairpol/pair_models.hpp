#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pairpol/compton.hpp"
#include "pairpol/random.hpp"

namespace pairpol {

enum class PairModelKind
{
    entangled_pw,         //!< (|HV> + |VH>)/sqrt2
    mixed_ba,             //!< separable HV/VH mixture, no azimuthal correlation
    mixed_hm,             //!< separable HV/VH mixture with the entangled cross section
    product_fixed_basis,  //!< equal HV/VH mixture of definite lab-basis products
    depolarized_mixture,  //!< (1-w) rho_perp + w rho_par
};

//---------------------------------------------------------------------------//
/*!
 * Joint quantum-state model of an annihilation photon pair.
 *
 * Tags used in configuration files and on the command line:
 * `entangled`, `mixed_hm`, `mixed_ba`, `product`, and `depolarized(w)`.
 */
class PairModel
{
  public:
    static PairModel entangled() { return PairModel{PairModelKind::entangled_pw, 0}; }
    static PairModel mixed_ba() { return PairModel{PairModelKind::mixed_ba, 0}; }
    static PairModel mixed_hm() { return PairModel{PairModelKind::mixed_hm, 0}; }
    static PairModel product_fixed_basis()
    {
        return PairModel{PairModelKind::product_fixed_basis, 0};
    }
    static PairModel depolarized(double weight);

    // Parse a tag; throws std::invalid_argument on unknown tags
    static PairModel parse(std::string_view tag);

    std::string tag() const;
    PairModelKind kind() const { return kind_; }
    //! Parallel-pairing weight w (zero except for depolarized mixtures)
    double weight() const { return weight_; }

    //! True when the density depends on the azimuths only through phi1 - phi2
    bool relative_azimuth_only() const
    {
        return kind_ != PairModelKind::product_fixed_basis;
    }

    bool operator==(PairModel const&) const = default;

  private:
    PairModel(PairModelKind kind, double weight) : kind_(kind), weight_(weight) {}

    PairModelKind kind_;
    double weight_;
};

//! Polar angles of both scattered photons plus lab azimuths of their planes
struct PairKinematics
{
    double theta1{};
    double theta2{};
    double phi1{};
    double phi2{};
    double delta_phi{};  //!< phi1 - phi2 reduced to [0, pi)

    static PairKinematics from_angles(double theta1,
                                      double theta2,
                                      double phi1,
                                      double phi2);

    bool operator==(PairKinematics const&) const = default;
};

// Reduce an azimuth difference to [0, pi)
double reduce_delta_phi(double delta);

//! Closed polar-angle interval [lo, hi] in radians; lo == hi fixes the angle.
struct ThetaWindow
{
    double lo{};
    double hi{};

    static ThetaWindow from_degrees(double lo_deg, double hi_deg);
    bool contains(double theta) const { return theta >= lo && theta <= hi; }
};

// Joint scattering density of both photons (per dOmega1 dOmega2, r_e = 1)
double joint_pdf(PairModel const& model, PairKinematics const& k, double energy);

// Amplitude of cos(2 dphi) in the dphi-marginal of joint_pdf, by quadrature
double marginal_modulation(PairModel const& model,
                           double theta1,
                           double theta2,
                           double energy);

// Closed-form cos(2 dphi) amplitude for point polarimeters at fixed angles
double predicted_modulation(PairModel const& model,
                            double theta1,
                            double theta2,
                            double energy);

//---------------------------------------------------------------------------//
/*!
 * Rejection sampler of pair kinematics restricted to a polar-angle window.
 *
 * Samples (theta1, theta2, phi1, phi2) with density joint_pdf sin(theta1)
 * sin(theta2) for theta_i in the window. With `lattice_points > 0` both
 * azimuths are restricted to the lattice 2 pi j / lattice_points, which is
 * the point-counter limit of a ring of detectors.
 *
 * The fixed-basis product model in continuous mode picks an HV or VH pairing
 * and then samples each photon independently with ComptonSampler.
 */
class PairSampler
{
  public:
    PairSampler(PairModel model,
                double energy,
                ThetaWindow window,
                int lattice_points = 0);

    PairKinematics operator()(Rng& rng) const;

    PairModel const& model() const { return model_; }
    double envelope() const { return envelope_; }

  private:
    PairKinematics sample_joint(Rng& rng) const;
    PairKinematics sample_product(Rng& rng) const;
    double propose_theta(Rng& rng) const;
    double propose_phi(Rng& rng) const;

    PairModel model_;
    double energy_;
    ThetaWindow window_;
    int lattice_;
    double cos_lo_;
    double cos_hi_;
    double envelope_{};
    std::optional<ComptonSampler> single_;
};

// Convenience wrapper building a PairSampler per call
PairKinematics sample_pair(PairModel const& model,
                           double energy,
                           ThetaWindow window,
                           Rng& rng);

}  // namespace pairpol
