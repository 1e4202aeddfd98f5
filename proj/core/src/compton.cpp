#include "pairpol/compton.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace pairpol {
namespace {

constexpr double unit_tol = 1e-12;

void check_energy(double energy)
{
    if (!(energy > 0.0) || !std::isfinite(energy))
        throw std::domain_error("photon energy must be positive, got "
                                + std::to_string(energy));
}

void check_theta(double theta)
{
    if (!(theta >= 0.0 && theta <= pi))
        throw std::domain_error("scattering angle must lie in [0, pi], got "
                                + std::to_string(theta));
}

void check_finite(double value, char const* what)
{
    if (!std::isfinite(value))
        throw std::domain_error(std::string(what) + " must be finite");
}

//! Ratio E1/E of scattered to incident energy
double epsilon_of(double energy, double theta)
{
    return electron_mass / (electron_mass + energy * (1.0 - std::cos(theta)));
}

//! Choose the final polarization for a scatter with incident axis e.
struct FinalPolarization
{
    Vec3 axis;
    bool flipped;
};

FinalPolarization choose_final_polarization(double energy,
                                            double theta,
                                            Vec3 const& e,
                                            Vec3 const& b,
                                            Vec3 const& k_out,
                                            Rng& rng)
{
    Vec3 keep = e - e.dot(k_out) * k_out;
    double const norm = keep.norm();
    if (norm < 1e-9)
    {
        // Incident axis along the outgoing direction: any transverse basis
        // is equivalent, use the incident b axis.
        keep = b;
    }
    else
    {
        keep /= norm;
    }
    Vec3 const flip = k_out.cross(keep).normalized();

    auto angle = [&e](Vec3 const& a) {
        return std::acos(std::clamp(e.dot(a), -1.0, 1.0));
    };
    double const w_keep = kn_dcs_pol_to_pol(energy, theta, angle(keep));
    double const w_flip = kn_dcs_pol_to_pol(energy, theta, angle(flip));
    bool const flipped = uniform01(rng) * (w_keep + w_flip) < w_flip;
    return {flipped ? flip : keep, flipped};
}

ScatterSample build_sample(double energy,
                           Vec3 const& k,
                           Vec3 const& e,
                           double theta,
                           double phi_from_e,
                           Rng& rng)
{
    Vec3 const b = k.cross(e);
    double const st = std::sin(theta);
    Vec3 const k_out
        = (std::cos(theta) * k
           + st * (std::cos(phi_from_e) * e + std::sin(phi_from_e) * b))
              .normalized();

    ScatterSample s;
    s.theta = theta;
    s.phi = phi_from_e;
    s.energy_out = scattered_energy(energy, theta);
    s.epsilon = s.energy_out / energy;
    s.recoil_energy = energy - s.energy_out;
    s.direction_out = k_out;
    auto final_pol = choose_final_polarization(energy, theta, e, b, k_out, rng);
    s.polarization_out = LinearPolarization{final_pol.axis};
    s.flipped = final_pol.flipped;
    return s;
}

double wrap_two_pi(double phi)
{
    double r = std::fmod(phi, 2 * pi);
    if (r < 0)
        r += 2 * pi;
    return r >= 2 * pi ? 0.0 : r;
}

}  // namespace

//---------------------------------------------------------------------------//
PhotonState::PhotonState(double energy, Vec3 const& direction, Polarization pol)
    : energy_(energy), direction_(direction), pol_(std::move(pol))
{
    check_energy(energy);
    if (!direction.allFinite() || std::abs(direction.norm() - 1.0) > unit_tol)
        throw std::domain_error("photon direction must be a unit vector");
    if (auto const* lin = std::get_if<LinearPolarization>(&pol_))
    {
        if (!lin->axis.allFinite()
            || std::abs(lin->axis.norm() - 1.0) > unit_tol)
            throw std::domain_error("polarization axis must be a unit vector");
        if (std::abs(lin->axis.dot(direction)) > unit_tol)
            throw std::domain_error(
                "polarization axis must be orthogonal to the direction");
    }
}

//---------------------------------------------------------------------------//
double scattered_energy(double energy, double theta)
{
    check_energy(energy);
    check_theta(theta);
    return energy * epsilon_of(energy, theta);
}

double scatter_angle_for_recoil(double energy, double recoil)
{
    check_energy(energy);
    double const max_recoil
        = energy * 2 * energy / (electron_mass + 2 * energy);
    if (!(recoil >= 0.0 && recoil <= max_recoil))
        throw std::domain_error("recoil energy outside the Compton range");
    double const e1 = energy - recoil;
    double const one_minus_cos = electron_mass * (1.0 / e1 - 1.0 / energy);
    return std::acos(std::clamp(1.0 - one_minus_cos, -1.0, 1.0));
}

double kn_dcs_polarized(double energy, double theta, double phi)
{
    check_energy(energy);
    check_theta(theta);
    check_finite(phi, "azimuth");
    double const eps = epsilon_of(energy, theta);
    double const st = std::sin(theta);
    double const cp = std::cos(phi);
    return 0.5 * eps * eps * (eps + 1.0 / eps - 2.0 * st * st * cp * cp);
}

double kn_dcs_unpolarized(double energy, double theta)
{
    check_energy(energy);
    check_theta(theta);
    double const eps = epsilon_of(energy, theta);
    double const st = std::sin(theta);
    return 0.5 * eps * eps * (eps + 1.0 / eps - st * st);
}

double analyzing_power(double energy, double theta)
{
    check_energy(energy);
    check_theta(theta);
    double const eps = epsilon_of(energy, theta);
    double const s2 = std::sin(theta) * std::sin(theta);
    return s2 / (eps + 1.0 / eps - s2);
}

double kn_dcs_pol_to_pol(double energy, double theta, double pol_angle)
{
    check_energy(energy);
    check_theta(theta);
    if (!(pol_angle >= 0.0 && pol_angle <= pi))
        throw std::domain_error("polarization angle must lie in [0, pi]");
    double const eps = epsilon_of(energy, theta);
    double const c = std::cos(pol_angle);
    return 0.25 * eps * eps * (eps + 1.0 / eps - 2.0 + 4.0 * c * c);
}

double flip_fraction(double energy, double theta, double phi)
{
    check_energy(energy);
    check_theta(theta);
    check_finite(phi, "azimuth");
    double const eps = epsilon_of(energy, theta);
    double const a = eps + 1.0 / eps - 2.0;
    double const sc = std::sin(theta) * std::cos(phi);
    // Squared cosine between the incident axis and its projection transverse
    // to the outgoing direction; zero in the degenerate in-plane 90 deg case.
    double const keep_cos2 = std::max(0.0, 1.0 - sc * sc);
    return a / (2.0 * a + 4.0 * keep_cos2);
}

double flip_probability(double energy, double theta)
{
    return flip_fraction(energy, theta, pi / 2);
}

//---------------------------------------------------------------------------//
ComptonSampler::ComptonSampler(double energy, double theta_min, double theta_max)
    : energy_(energy), theta_min_(theta_min), theta_max_(theta_max)
{
    check_energy(energy);
    check_theta(theta_min);
    check_theta(theta_max);
    if (theta_min > theta_max)
        throw std::domain_error("empty polar-angle range");
    cos_lo_ = std::cos(theta_max);
    cos_hi_ = std::cos(theta_min);

    constexpr int n_theta = 64;
    constexpr int n_phi = 32;
    double peak = 0.0;
    for (int i = 0; i <= n_theta; ++i)
    {
        double const theta
            = theta_min + (theta_max - theta_min) * i / double(n_theta);
        for (int j = 0; j <= n_phi; ++j)
        {
            double const phi = pi * j / double(n_phi);
            peak = std::max(peak, kn_dcs_polarized(energy, theta, phi));
        }
    }
    envelope_ = 1.05 * peak;
    if (!(envelope_ > 0.0))
        throw std::logic_error("Compton sampler envelope is not positive");
}

std::pair<double, double> ComptonSampler::sample_angles(Rng& rng) const
{
    while (true)
    {
        double const cos_t = cos_lo_ + (cos_hi_ - cos_lo_) * uniform01(rng);
        double const phi = 2 * pi * uniform01(rng);
        double const theta = std::acos(std::clamp(cos_t, -1.0, 1.0));
        double const f = kn_dcs_polarized(energy_, theta, phi);
        if (f > envelope_)
            throw std::logic_error("Compton density exceeds its envelope");
        if (uniform01(rng) * envelope_ < f)
            return {theta, phi};
    }
}

ScatterSample ComptonSampler::operator()(PhotonState const& photon, Rng& rng) const
{
    if (std::abs(photon.energy() - energy_) > 1e-9 * energy_)
        throw std::invalid_argument(
            "photon energy does not match the sampler energy");
    Vec3 const& k = photon.direction();
    if (auto const* lin = std::get_if<LinearPolarization>(&photon.polarization()))
    {
        auto [theta, phi] = this->sample_angles(rng);
        return build_sample(energy_, k, lin->axis, theta, phi, rng);
    }

    // Unpolarized: draw a uniformly oriented axis, then scatter as polarized.
    auto frame = transverse_frame(k);
    double const psi = 2 * pi * uniform01(rng);
    Vec3 const e = std::cos(psi) * frame.u + std::sin(psi) * frame.v;
    auto [theta, phi] = this->sample_angles(rng);
    ScatterSample s = build_sample(energy_, k, e, theta, phi, rng);
    s.phi = wrap_two_pi(phi + psi);
    return s;
}

ScatterSample scatter_at(PhotonState const& photon, double theta, double phi, Rng& rng)
{
    check_theta(theta);
    check_finite(phi, "azimuth");
    Vec3 const& k = photon.direction();
    if (auto const* lin = std::get_if<LinearPolarization>(&photon.polarization()))
        return build_sample(photon.energy(), k, lin->axis, theta, phi, rng);

    // Unpolarized: sample the incident axis conditional on the direction.
    auto frame = transverse_frame(k);
    double const bound = kn_dcs_polarized(photon.energy(), theta, pi / 2);
    double psi = 0.0;
    do
    {
        psi = 2 * pi * uniform01(rng);
    } while (uniform01(rng) * bound
             >= kn_dcs_polarized(photon.energy(), theta, phi - psi));
    Vec3 const e = std::cos(psi) * frame.u + std::sin(psi) * frame.v;
    ScatterSample s = build_sample(photon.energy(), k, e, theta, phi - psi, rng);
    s.phi = wrap_two_pi(phi);
    return s;
}

ScatterSample sample_scatter(PhotonState const& photon, Rng& rng)
{
    // Envelope construction costs a few thousand evaluations; reuse it while
    // the incident energy does not change.
    thread_local std::optional<ComptonSampler> cached;
    if (!cached || cached->energy() != photon.energy())
        cached.emplace(photon.energy());
    return (*cached)(photon, rng);
}

}  // namespace pairpol
