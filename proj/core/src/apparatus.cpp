#include "pairpol/apparatus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "pairpol/errors.hpp"

namespace pairpol {
namespace {

constexpr double deg = pi / 180.0;
constexpr double fwhm_per_sigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)
constexpr double gagg_reference_energy = 170.0;

void require(bool condition, std::string const& what)
{
    if (!condition)
        throw ConfigError("invalid apparatus configuration: " + what);
}

bool in_closed(double x, double lo, double hi)
{
    return x >= lo && x <= hi;
}

}  // namespace

//---------------------------------------------------------------------------//
void ApparatusConfig::validate() const
{
    require(n_counters_per_arm >= 4 && n_counters_per_arm % 4 == 0,
            "n_counters_per_arm must be a positive multiple of 4");
    require(std::abs(n_counters_per_arm * counter_pitch_deg - 360.0) < 1e-9,
            "n_counters_per_arm * counter_pitch must equal 360 deg");
    require(theta_window_deg[0] > 0.0
                && theta_window_deg[0] <= theta_window_deg[1]
                && theta_window_deg[1] < 180.0,
            "theta_window must satisfy 0 < lo <= hi < 180 deg");
    require(nai_window_kev[0] >= 0.0 && nai_window_kev[0] < nai_window_kev[1],
            "nai_window must be ordered");
    require(gagg_threshold_kev > 0.0, "gagg_threshold must be positive");
    require(gagg_max_kev > gagg_threshold_kev,
            "gagg_max must exceed gagg_threshold");
    require(nai_resolution_fwhm_frac_at_511 >= 0.0
                && gagg_resolution_fwhm_frac_at_170 >= 0.0
                && plastic_resolution_fwhm_frac_at_511 >= 0.0,
            "resolutions must be non-negative");
    require(plastic_separation_cm > 0.0, "plastic_separation must be positive");
    require(source_offset_toward_gagg_arm_cm >= 0.0
                && source_offset_toward_gagg_arm_cm < plastic_separation_cm / 2,
            "source offset must lie in [0, plastic_separation / 2)");
    require(in_closed(gagg_interaction_probability, 0.0, 1.0)
                && in_closed(backscatter_probability, 0.0, 1.0)
                && gagg_interaction_probability + backscatter_probability <= 1.0,
            "chain probabilities must lie in [0, 1] and sum to at most 1");
    require(backscatter_theta_min_deg > 90.0
                && backscatter_theta_min_deg <= 180.0,
            "backscatter_theta_min must lie in (90, 180] deg");
    require(bands.a_gagg_max > 0.0, "class a GAGG limit must be positive");
    require(bands.c_nai_min < bands.bc_nai_split
                && bands.bc_nai_split < bands.b_nai_max,
            "class b/c NaI boxes must be ordered");
    require(bands.d_gagg[0] < bands.d_gagg[1] && bands.d_nai[0] < bands.d_nai[1],
            "class d boxes must be ordered");
}

ThetaWindow ApparatusConfig::theta_window() const
{
    return ThetaWindow::from_degrees(theta_window_deg[0], theta_window_deg[1]);
}

double ApparatusConfig::counter_pitch() const
{
    return counter_pitch_deg * deg;
}

//---------------------------------------------------------------------------//
std::string_view to_string(EventClass c)
{
    switch (c)
    {
        case EventClass::entangled_candidate: return "entangled_candidate";
        case EventClass::a: return "a";
        case EventClass::b: return "b";
        case EventClass::c: return "c";
        case EventClass::d: return "d";
        case EventClass::rejected: return "rejected";
    }
    return "rejected";
}

std::optional<EventClass> event_class_from_string(std::string_view s)
{
    for (int i = 0; i < event_class_count; ++i)
    {
        auto c = static_cast<EventClass>(i);
        if (to_string(c) == s)
            return c;
    }
    return std::nullopt;
}

//---------------------------------------------------------------------------//
double detector_response(double true_energy,
                         double fwhm_frac_at_ref,
                         double ref_energy,
                         Rng& rng)
{
    if (!(true_energy >= 0.0))
        throw std::domain_error("deposited energy must be non-negative");
    if (true_energy == 0.0 || fwhm_frac_at_ref == 0.0)
        return true_energy;
    double const sigma
        = fwhm_frac_at_ref * std::sqrt(true_energy * ref_energy) / fwhm_per_sigma;
    std::normal_distribution<double> gauss(true_energy, sigma);
    return std::max(0.0, gauss(rng));
}

GaggOutcome gagg_outcome(PhotonState const& photon,
                         ScatterSample const& scatter,
                         ApparatusConfig const& config,
                         Rng& rng)
{
    double measured = detector_response(scatter.recoil_energy,
                                        config.gagg_resolution_fwhm_frac_at_170,
                                        gagg_reference_energy,
                                        rng);
    if (measured < config.gagg_threshold_kev)
        measured = 0.0;
    PhotonState after(scatter.energy_out,
                      scatter.direction_out,
                      scatter.polarization_out);
    (void)photon;
    return {measured, std::move(after), true, scatter.recoil_energy, scatter.theta};
}

GaggOutcome gagg_prescatter(PhotonState const& photon,
                            ApparatusConfig const& config,
                            Rng& rng)
{
    if (uniform01(rng) >= config.gagg_interaction_probability)
        return {0.0, photon, false, 0.0, 0.0};
    ScatterSample const s = sample_scatter(photon, rng);
    return gagg_outcome(photon, s, config, rng);
}

int counter_index(double phi, ApparatusConfig const& config)
{
    int const n = config.n_counters_per_arm;
    double const x = phi / config.counter_pitch();
    long idx = config.point_detector_mode ? std::lround(x)
                                          : static_cast<long>(std::floor(x));
    idx %= n;
    if (idx < 0)
        idx += n;
    return static_cast<int>(idx);
}

EventClass classify_event(EventRecord const& e, ApparatusConfig const& config)
{
    auto const& nai = config.nai_window_kev;
    auto const& bands = config.bands;
    bool const nai1_in_window = in_closed(e.e_nai1, nai[0], nai[1]);
    bool const nai2_in_window = in_closed(e.e_nai2, nai[0], nai[1]);

    if (e.e_gagg == 0.0)
        return nai1_in_window && nai2_in_window ? EventClass::entangled_candidate
                                                : EventClass::rejected;
    if (!nai2_in_window || e.e_gagg > config.gagg_max_kev)
        return EventClass::rejected;
    if (in_closed(e.e_gagg, bands.d_gagg[0], bands.d_gagg[1])
        && in_closed(e.e_nai1, bands.d_nai[0], bands.d_nai[1]))
        return EventClass::d;
    if (e.e_gagg < bands.a_gagg_max)
        return nai1_in_window ? EventClass::a : EventClass::rejected;
    if (e.e_nai1 >= bands.bc_nai_split && e.e_nai1 <= bands.b_nai_max)
        return EventClass::b;
    if (e.e_nai1 >= bands.c_nai_min && e.e_nai1 < bands.bc_nai_split)
        return EventClass::c;
    return EventClass::rejected;
}

//---------------------------------------------------------------------------//
EventGenerator::EventGenerator(ModelSet models, ApparatusConfig config)
    : models_(models)
    , config_((config.validate(), config))
    , direct_(models.direct,
              annihilation_energy,
              config.theta_window(),
              config.point_detector_mode ? config.n_counters_per_arm : 0)
    , decoherent_(models.decoherent,
                  annihilation_energy,
                  config.theta_window(),
                  config.point_detector_mode ? config.n_counters_per_arm : 0)
    , backscatter_(models.backscatter,
                   annihilation_energy,
                   config.theta_window(),
                   config.point_detector_mode ? config.n_counters_per_arm : 0)
    , gagg_(annihilation_energy)
    , back_(annihilation_energy, config.backscatter_theta_min_deg * deg, pi)
{
}

void EventGenerator::finish(EventRecord& e, Rng& rng) const
{
    double const plastic_res = config_.plastic_resolution_fwhm_frac_at_511;
    double const nai_res = config_.nai_resolution_fwhm_frac_at_511;
    e.e_plastic1 = detector_response(e.truth.plastic1, plastic_res, 511.0, rng);
    e.e_plastic2 = detector_response(e.truth.plastic2, plastic_res, 511.0, rng);
    e.e_nai1 = detector_response(e.truth.nai1, nai_res, 511.0, rng);
    e.e_nai2 = detector_response(e.truth.nai2, nai_res, 511.0, rng);
    e.counter1 = counter_index(e.kin.phi1, config_);
    e.counter2 = counter_index(e.kin.phi2, config_);
    e.class_tag = classify_event(e, config_);
}

EventRecord EventGenerator::direct_event(PairKinematics const& kin, Rng& rng) const
{
    EventRecord e;
    e.kin = kin;
    e.chain = EventChain::direct;
    e.truth.nai1 = scattered_energy(annihilation_energy, kin.theta1);
    e.truth.plastic1 = annihilation_energy - e.truth.nai1;
    e.truth.nai2 = scattered_energy(annihilation_energy, kin.theta2);
    e.truth.plastic2 = annihilation_energy - e.truth.nai2;
    this->finish(e, rng);
    return e;
}

EventRecord EventGenerator::forward_event(PairKinematics const& kin,
                                          GaggOutcome const& gagg,
                                          Rng& rng) const
{
    EventRecord e;
    e.kin = kin;
    e.chain = EventChain::gagg_forward;
    e.gagg_interacted = gagg.interacted;
    e.gagg_theta = gagg.theta;
    e.e_gagg = gagg.deposited;

    // The plastic scattering angle is measured from the deflected direction
    // to the direction reaching the NaI ring.
    double const e_after = gagg.photon_after.energy();
    Vec3 const to_counter = from_spherical(kin.theta1, kin.phi1);
    double const cos_plastic
        = std::clamp(gagg.photon_after.direction().dot(to_counter), -1.0, 1.0);
    double const theta_plastic = std::acos(cos_plastic);

    e.truth.gagg = gagg.true_recoil;
    e.truth.nai1 = scattered_energy(e_after, theta_plastic);
    e.truth.plastic1 = e_after - e.truth.nai1;
    e.truth.nai2 = scattered_energy(annihilation_energy, kin.theta2);
    e.truth.plastic2 = annihilation_energy - e.truth.nai2;
    this->finish(e, rng);
    return e;
}

EventRecord EventGenerator::backscatter_event(PairKinematics const& kin,
                                              double backscatter_theta,
                                              Rng& rng) const
{
    EventRecord e;
    e.kin = kin;
    e.chain = EventChain::backscatter;
    e.gagg_interacted = true;
    e.gagg_theta = kin.theta1;

    double const e_back = scattered_energy(annihilation_energy, backscatter_theta);
    e.truth.plastic1 = annihilation_energy - e_back;
    e.truth.nai1 = scattered_energy(e_back, kin.theta1);
    e.truth.gagg = e_back - e.truth.nai1;
    e.truth.nai2 = scattered_energy(annihilation_energy, kin.theta2);
    e.truth.plastic2 = annihilation_energy - e.truth.nai2;

    double measured = detector_response(e.truth.gagg,
                                        config_.gagg_resolution_fwhm_frac_at_170,
                                        gagg_reference_energy,
                                        rng);
    e.e_gagg = measured < config_.gagg_threshold_kev ? 0.0 : measured;
    this->finish(e, rng);
    return e;
}

std::optional<EventRecord> EventGenerator::operator()(Rng& rng) const
{
    EventChain chain = EventChain::direct;
    if (config_.gagg_enabled)
    {
        double const u = uniform01(rng);
        if (u < config_.gagg_interaction_probability)
            chain = EventChain::gagg_forward;
        else if (u < config_.gagg_interaction_probability
                         + config_.backscatter_probability)
            chain = EventChain::backscatter;
    }

    EventRecord e;
    switch (chain)
    {
        case EventChain::direct: e = this->direct_event(direct_(rng), rng); break;
        case EventChain::gagg_forward: {
            PhotonState const photon(annihilation_energy, Vec3::UnitZ(), Unpolarized{});
            ScatterSample const s = gagg_(photon, rng);
            GaggOutcome const outcome = gagg_outcome(photon, s, config_, rng);
            e = this->forward_event(decoherent_(rng), outcome, rng);
            break;
        }
        case EventChain::backscatter: {
            double const theta_back = back_.sample_angles(rng).first;
            e = this->backscatter_event(backscatter_(rng), theta_back, rng);
            break;
        }
    }
    if (e.class_tag == EventClass::rejected)
        return std::nullopt;
    return e;
}

std::optional<EventRecord> simulate_event(PairModel const& model,
                                          ApparatusConfig const& config,
                                          Rng& rng)
{
    EventGenerator const gen(ModelSet{model, model, model}, config);
    return gen(rng);
}

}  // namespace pairpol
