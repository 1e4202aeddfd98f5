#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "pairpol/compton.hpp"
#include "pairpol/pair_models.hpp"
#include "pairpol/random.hpp"

namespace pairpol {

/*!
 * Energy boxes separating decoherent event classes.
 *
 * The defaults are estimates read off the GAGG/NaI correlation plot and are
 * meant to be overridden. Class "a" uses ApparatusConfig::nai_window for
 * the NaI side.
 */
struct ClassBands
{
    double a_gagg_max{30.0};                //!< a: 0 < E_gagg < this [keV]
    double bc_nai_split{255.0};             //!< b above, c below [keV]
    double b_nai_max{400.0};                //!< upper NaI edge of box b
    double c_nai_min{160.0};                //!< lower NaI edge of box c
    std::array<double, 2> d_gagg{20.0, 70.0};  //!< GAGG box of class d
    std::array<double, 2> d_nai{90.0, 160.0};  //!< NaI box of class d

    bool operator==(ClassBands const&) const = default;
};

//! Parametric description of the two-arm polarimeter.
struct ApparatusConfig
{
    int n_counters_per_arm{16};
    double counter_pitch_deg{22.5};
    std::array<double, 2> theta_window_deg{80.0, 100.0};
    double plastic_separation_cm{70.0};
    double source_offset_toward_gagg_arm_cm{10.0};
    bool gagg_enabled{false};
    double gagg_threshold_kev{2.0};
    double gagg_max_kev{110.0};
    std::array<double, 2> nai_window_kev{235.0, 280.0};
    double nai_resolution_fwhm_frac_at_511{0.09};
    double gagg_resolution_fwhm_frac_at_170{0.10};
    double plastic_resolution_fwhm_frac_at_511{0.0};
    bool point_detector_mode{false};
    //! Probability that the GAGG-arm photon scatters in the GAGG first
    double gagg_interaction_probability{0.25};
    //! Probability of the plastic-backscatter chain (class d), GAGG enabled
    double backscatter_probability{0.05};
    double backscatter_theta_min_deg{170.0};
    ClassBands bands{};

    // Throws ConfigError naming the violated invariant
    void validate() const;

    ThetaWindow theta_window() const;
    double counter_pitch() const;  //!< radians

    bool operator==(ApparatusConfig const&) const = default;
};

enum class EventClass
{
    entangled_candidate,
    a,
    b,
    c,
    d,
    rejected,
};

inline constexpr int event_class_count = 6;

std::string_view to_string(EventClass c);
std::optional<EventClass> event_class_from_string(std::string_view s);

//! Which kinematic chain produced an event
enum class EventChain
{
    direct,        //!< no GAGG interaction
    gagg_forward,  //!< GAGG scatter, then plastic scatter into NaI
    backscatter,   //!< plastic backscatter, then ~90 deg GAGG scatter into NaI
};

//! True (unsmeared) energy bookkeeping of one event [keV]
struct TrueDeposits
{
    double gagg{};
    double plastic1{};
    double plastic2{};
    double nai1{};
    double nai2{};
    double escaping{};

    double total() const
    {
        return gagg + plastic1 + plastic2 + nai1 + nai2 + escaping;
    }
};

//! One simulated coincidence. Arm 1 is the arm carrying the GAGG scatterer.
struct EventRecord
{
    PairKinematics kin{};
    double e_gagg{};
    double e_plastic1{};
    double e_plastic2{};
    double e_nai1{};
    double e_nai2{};
    int counter1{};
    int counter2{};
    EventClass class_tag{EventClass::rejected};

    EventChain chain{EventChain::direct};
    bool gagg_interacted{false};
    double gagg_theta{};  //!< true GAGG scattering angle [rad]
    TrueDeposits truth{};
};

//! Outcome of the GAGG stage for the arm-1 photon
struct GaggOutcome
{
    double deposited{};  //!< measured, thresholded [keV]
    PhotonState photon_after;
    bool interacted{false};
    double true_recoil{};
    double theta{};  //!< deflection angle
};

// Gaussian smearing with FWHM = frac * sqrt(E * ref_energy); clamps at zero
double detector_response(double true_energy,
                         double fwhm_frac_at_ref,
                         double ref_energy,
                         Rng& rng);

// Interact in GAGG with the configured probability
GaggOutcome gagg_prescatter(PhotonState const& photon,
                            ApparatusConfig const& config,
                            Rng& rng);

// Apply the GAGG response and threshold to a given scatter
GaggOutcome gagg_outcome(PhotonState const& photon,
                         ScatterSample const& scatter,
                         ApparatusConfig const& config,
                         Rng& rng);

// Assign a class from measured energies
EventClass classify_event(EventRecord const& e, ApparatusConfig const& config);

// Counter index hit by an azimuth about the arm axis
int counter_index(double phi, ApparatusConfig const& config);

//! Pair-state models used by each kinematic chain
struct ModelSet
{
    PairModel direct{PairModel::entangled()};
    PairModel decoherent{PairModel::mixed_hm()};
    PairModel backscatter{PairModel::depolarized(0.2)};
};

//---------------------------------------------------------------------------//
/*!
 * Event generator for a fixed apparatus and set of models.
 *
 * Pair kinematics are always drawn at 511 keV inside the theta window; the
 * GAGG deflection and the backscatter chain only change the energy
 * bookkeeping, and through it the event class and acceptance.
 * Construction precomputes all sampling envelopes.
 */
class EventGenerator
{
  public:
    EventGenerator(ModelSet models, ApparatusConfig config);

    //! Simulate one attempt; nullopt when the event is rejected
    std::optional<EventRecord> operator()(Rng& rng) const;

    //! Build and classify a forward GAGG-scatter event from given pieces
    EventRecord forward_event(PairKinematics const& kin,
                              GaggOutcome const& gagg,
                              Rng& rng) const;
    //! Build and classify an event without GAGG interaction
    EventRecord direct_event(PairKinematics const& kin, Rng& rng) const;
    //! Build and classify a backscatter-chain event
    EventRecord backscatter_event(PairKinematics const& kin,
                                  double backscatter_theta,
                                  Rng& rng) const;

    ApparatusConfig const& config() const { return config_; }

  private:
    void finish(EventRecord& e, Rng& rng) const;

    ModelSet models_;
    ApparatusConfig config_;
    PairSampler direct_;
    PairSampler decoherent_;
    PairSampler backscatter_;
    ComptonSampler gagg_;
    ComptonSampler back_;
};

// One-shot simulation using `model` for every chain (slow: builds samplers)
std::optional<EventRecord> simulate_event(PairModel const& model,
                                          ApparatusConfig const& config,
                                          Rng& rng);

}  // namespace pairpol
