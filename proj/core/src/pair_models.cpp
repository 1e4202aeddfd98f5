#include "pairpol/pair_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pairpol {
namespace {

double wrap_two_pi(double phi)
{
    double r = std::fmod(phi, 2 * pi);
    if (r < 0)
        r += 2 * pi;
    return r >= 2 * pi ? 0.0 : r;
}

std::string format_shortest(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace

//---------------------------------------------------------------------------//
PairModel PairModel::depolarized(double weight)
{
    if (!(weight >= 0.0 && weight <= 1.0))
        throw std::invalid_argument("mixture weight must lie in [0, 1]");
    return PairModel{PairModelKind::depolarized_mixture, weight};
}

PairModel PairModel::parse(std::string_view tag)
{
    if (tag == "entangled" || tag == "entangled_pw")
        return entangled();
    if (tag == "mixed_hm")
        return mixed_hm();
    if (tag == "mixed_ba")
        return mixed_ba();
    if (tag == "product" || tag == "product_fixed_basis")
        return product_fixed_basis();

    constexpr std::string_view prefix = "depolarized(";
    if (tag.starts_with(prefix) && tag.ends_with(")"))
    {
        auto body = tag.substr(prefix.size(), tag.size() - prefix.size() - 1);
        double w = 0;
        auto res = std::from_chars(body.data(), body.data() + body.size(), w);
        if (res.ec != std::errc{} || res.ptr != body.data() + body.size())
            throw std::invalid_argument("bad mixture weight in model tag '"
                                        + std::string(tag) + "'");
        return depolarized(w);
    }
    throw std::invalid_argument("unknown pair model '" + std::string(tag)
                                + "' (expected entangled, mixed_hm, mixed_ba, "
                                  "product, or depolarized(w))");
}

std::string PairModel::tag() const
{
    switch (kind_)
    {
        case PairModelKind::entangled_pw: return "entangled";
        case PairModelKind::mixed_ba: return "mixed_ba";
        case PairModelKind::mixed_hm: return "mixed_hm";
        case PairModelKind::product_fixed_basis: return "product";
        case PairModelKind::depolarized_mixture:
            return "depolarized(" + format_shortest(weight_) + ")";
    }
    return "unknown";
}

//---------------------------------------------------------------------------//
double reduce_delta_phi(double delta)
{
    double r = std::fmod(delta, pi);
    if (r < 0)
        r += pi;
    return r >= pi ? 0.0 : r;
}

PairKinematics PairKinematics::from_angles(double theta1,
                                           double theta2,
                                           double phi1,
                                           double phi2)
{
    return {theta1, theta2, phi1, phi2, reduce_delta_phi(phi1 - phi2)};
}

ThetaWindow ThetaWindow::from_degrees(double lo_deg, double hi_deg)
{
    return {lo_deg * pi / 180.0, hi_deg * pi / 180.0};
}

//---------------------------------------------------------------------------//
double joint_pdf(PairModel const& model, PairKinematics const& k, double energy)
{
    if (model.kind() == PairModelKind::product_fixed_basis)
    {
        // Equal mixture of H1V2 and V1H2 with H along the lab x axis
        double const hv = kn_dcs_polarized(energy, k.theta1, k.phi1)
                          * kn_dcs_polarized(energy, k.theta2, k.phi2 - pi / 2);
        double const vh = kn_dcs_polarized(energy, k.theta1, k.phi1 - pi / 2)
                          * kn_dcs_polarized(energy, k.theta2, k.phi2);
        return 0.5 * (hv + vh);
    }

    double const k1 = kn_dcs_unpolarized(energy, k.theta1);
    double const k2 = kn_dcs_unpolarized(energy, k.theta2);
    if (model.kind() == PairModelKind::mixed_ba)
        return k1 * k2;

    double const corr = analyzing_power(energy, k.theta1)
                        * analyzing_power(energy, k.theta2)
                        * std::cos(2 * (k.phi1 - k.phi2));
    double const perpendicular = k1 * k2 * (1 - corr);
    if (model.kind() != PairModelKind::depolarized_mixture)
        return perpendicular;

    double const parallel = k1 * k2 * (1 + corr);
    double const w = model.weight();
    return (1 - w) * perpendicular + w * parallel;
}

double marginal_modulation(PairModel const& model,
                           double theta1,
                           double theta2,
                           double energy)
{
    // Periodic trapezoid rule: exact for the low-order trigonometric
    // polynomials every catalogued model reduces to.
    constexpr int n = 64;
    double sum0 = 0;
    double sum2 = 0;
    for (int j = 0; j < n; ++j)
    {
        double const delta = 2 * pi * j / n;
        double marginal = 0;
        for (int i = 0; i < n; ++i)
        {
            double const psi = 2 * pi * i / n;
            marginal += joint_pdf(
                model,
                PairKinematics::from_angles(theta1, theta2, psi + delta, psi),
                energy);
        }
        sum0 += marginal;
        sum2 += marginal * std::cos(2 * delta);
    }
    return -2 * sum2 / sum0;
}

//---------------------------------------------------------------------------//
double predicted_modulation(PairModel const& model,
                            double theta1,
                            double theta2,
                            double energy)
{
    double const product = analyzing_power(energy, theta1) * analyzing_power(energy, theta2);
    switch (model.kind())
    {
        case PairModelKind::entangled_pw:
        case PairModelKind::mixed_hm: return product;
        case PairModelKind::mixed_ba: return 0.0;
        case PairModelKind::product_fixed_basis: return 0.5 * product;
        case PairModelKind::depolarized_mixture: return (1 - 2 * model.weight()) * product;
    }
    return product;
}

PairSampler::PairSampler(PairModel model,
                         double energy,
                         ThetaWindow window,
                         int lattice_points)
    : model_(model)
    , energy_(energy)
    , window_(window)
    , lattice_(lattice_points)
    , cos_lo_(std::cos(window.hi))
    , cos_hi_(std::cos(window.lo))
{
    if (!(energy > 0.0))
        throw std::domain_error("pair energy must be positive");
    if (!(window.lo > 0.0 && window.lo <= window.hi && window.hi < pi))
        throw std::domain_error("theta window must satisfy 0 < lo <= hi < pi");
    if (lattice_points < 0)
        throw std::invalid_argument("lattice size must be non-negative");

    if (model_.kind() == PairModelKind::product_fixed_basis && lattice_ == 0)
        single_.emplace(energy, window.lo, window.hi);

    int const n_theta = window.lo == window.hi ? 1 : 9;
    int const n_phi = lattice_ > 0 ? lattice_ : 32;
    auto theta_at = [&](int i) {
        return n_theta == 1 ? window.lo
                            : window.lo + (window.hi - window.lo) * i / (n_theta - 1);
    };
    double peak = 0;
    for (int i1 = 0; i1 < n_theta; ++i1)
    {
        for (int i2 = 0; i2 < n_theta; ++i2)
        {
            for (int j1 = 0; j1 < n_phi; ++j1)
            {
                int const n_phi2 = model_.relative_azimuth_only() ? 1 : n_phi;
                for (int j2 = 0; j2 < n_phi2; ++j2)
                {
                    auto k = PairKinematics::from_angles(theta_at(i1),
                                                         theta_at(i2),
                                                         2 * pi * j1 / n_phi,
                                                         2 * pi * j2 / n_phi);
                    peak = std::max(peak, joint_pdf(model_, k, energy_));
                }
            }
        }
    }
    envelope_ = 1.05 * peak;
    if (!(envelope_ > 0.0))
        throw std::logic_error("pair sampler envelope is not positive");
}

double PairSampler::propose_theta(Rng& rng) const
{
    if (window_.lo == window_.hi)
        return window_.lo;
    double const c = cos_lo_ + (cos_hi_ - cos_lo_) * uniform01(rng);
    return std::clamp(std::acos(c), window_.lo, window_.hi);
}

double PairSampler::propose_phi(Rng& rng) const
{
    if (lattice_ > 0)
    {
        auto const j = static_cast<int>(uniform01(rng) * lattice_);
        return 2 * pi * std::min(j, lattice_ - 1) / lattice_;
    }
    return 2 * pi * uniform01(rng);
}

PairKinematics PairSampler::sample_joint(Rng& rng) const
{
    while (true)
    {
        double const theta1 = this->propose_theta(rng);
        double const theta2 = this->propose_theta(rng);
        double const phi1 = this->propose_phi(rng);
        double const phi2 = this->propose_phi(rng);
        auto k = PairKinematics::from_angles(theta1, theta2, phi1, phi2);
        double const f = joint_pdf(model_, k, energy_);
        if (f > envelope_)
            throw std::logic_error("pair density exceeds its envelope");
        if (uniform01(rng) * envelope_ < f)
            return k;
    }
}

PairKinematics PairSampler::sample_product(Rng& rng) const
{
    // HV: photon 1 polarized along x, photon 2 along y; VH the reverse.
    bool const hv = uniform01(rng) < 0.5;
    double const axis1 = hv ? 0.0 : pi / 2;
    double const axis2 = hv ? pi / 2 : 0.0;
    auto [theta1, rel1] = single_->sample_angles(rng);
    auto [theta2, rel2] = single_->sample_angles(rng);
    return PairKinematics::from_angles(
        theta1, theta2, wrap_two_pi(rel1 + axis1), wrap_two_pi(rel2 + axis2));
}

PairKinematics PairSampler::operator()(Rng& rng) const
{
    if (single_)
        return this->sample_product(rng);
    return this->sample_joint(rng);
}

PairKinematics sample_pair(PairModel const& model,
                           double energy,
                           ThetaWindow window,
                           Rng& rng)
{
    PairSampler const sampler(model, energy, window);
    return sampler(rng);
}

}  // namespace pairpol
