#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pairpol/apparatus.hpp"
#include "pairpol/errors.hpp"

namespace {

using namespace pairpol;
using oracle::deg;

EventRecord measured(double gagg, double nai1, double nai2)
{
    EventRecord e;
    e.e_gagg = gagg;
    e.e_nai1 = nai1;
    e.e_nai2 = nai2;
    return e;
}

TEST(DetectorResponse, Trivial)
{
    Rng rng(1);
    EXPECT_EQ(detector_response(0, 0.09, 511, rng), 0.0);
    EXPECT_EQ(detector_response(123.4, 0.0, 511, rng), 123.4);
    EXPECT_THROW(detector_response(-1, 0.09, 511, rng), std::domain_error);
}

TEST(DetectorResponse, MeanAndWidth)
{
    Rng rng(2);
    constexpr int n = 100000;
    double sum = 0;
    double sum2 = 0;
    for (int i = 0; i < n; ++i)
    {
        double const v = detector_response(255.5, 0.09, 511, rng);
        sum += v;
        sum2 += v * v;
    }
    double const mean = sum / n;
    double const sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(mean, 255.5, 0.5);
    double const expected_sd = 0.09 * std::sqrt(255.5 * 511) / (2 * std::sqrt(2 * std::log(2.0)));
    EXPECT_NEAR(sd, expected_sd, 0.02 * expected_sd);
}

TEST(DetectorResponse, ClampsAtZero)
{
    Rng rng(3);
    for (int i = 0; i < 10000; ++i)
        EXPECT_GE(detector_response(0.5, 2.0, 511, rng), 0.0);
}

TEST(ClassifyEvent, Examples)
{
    ApparatusConfig const c;
    EXPECT_EQ(classify_event(measured(0, 255, 255), c), EventClass::entangled_candidate);
    EXPECT_EQ(classify_event(measured(15, 250, 255), c), EventClass::a);
    EXPECT_EQ(classify_event(measured(60, 300, 255), c), EventClass::b);
    EXPECT_EQ(classify_event(measured(60, 200, 255), c), EventClass::c);
    EXPECT_EQ(classify_event(measured(43, 127, 255), c), EventClass::d);
}

TEST(ClassifyEvent, Rejections)
{
    ApparatusConfig const c;
    EXPECT_EQ(classify_event(measured(0, 200, 255), c), EventClass::rejected);
    EXPECT_EQ(classify_event(measured(0, 255, 300), c), EventClass::rejected);
    EXPECT_EQ(classify_event(measured(15, 200, 255), c), EventClass::rejected);
    EXPECT_EQ(classify_event(measured(60, 255, 200), c), EventClass::rejected);
    EXPECT_EQ(classify_event(measured(120, 300, 255), c), EventClass::rejected);
    EXPECT_EQ(classify_event(measured(60, 450, 255), c), EventClass::rejected);
    EXPECT_EQ(classify_event(measured(80, 120, 255), c), EventClass::rejected);
}

TEST(EventClass, StringRoundTrip)
{
    for (int i = 0; i < event_class_count; ++i)
    {
        auto const c = static_cast<EventClass>(i);
        EXPECT_EQ(event_class_from_string(to_string(c)), c);
    }
    EXPECT_FALSE(event_class_from_string("e").has_value());
}

TEST(ApparatusConfig, Validation)
{
    ApparatusConfig c;
    EXPECT_NO_THROW(c.validate());
    c.counter_pitch_deg = 20;
    EXPECT_THROW(c.validate(), ConfigError);

    ApparatusConfig w;
    w.theta_window_deg = {100, 80};
    EXPECT_THROW(w.validate(), ConfigError);
    w.theta_window_deg = {0, 80};
    EXPECT_THROW(w.validate(), ConfigError);

    ApparatusConfig n;
    n.nai_window_kev = {280, 235};
    EXPECT_THROW(n.validate(), ConfigError);

    ApparatusConfig t;
    t.gagg_threshold_kev = 0;
    EXPECT_THROW(t.validate(), ConfigError);

    ApparatusConfig p;
    p.gagg_interaction_probability = 0.8;
    p.backscatter_probability = 0.3;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(CounterIndex, FloorAndWrap)
{
    ApparatusConfig c;
    EXPECT_EQ(counter_index(0, c), 0);
    EXPECT_EQ(counter_index(deg(22.4), c), 0);
    EXPECT_EQ(counter_index(deg(22.6), c), 1);
    EXPECT_EQ(counter_index(deg(359.9), c), 15);
    EXPECT_EQ(counter_index(deg(360), c), 0);
    EXPECT_EQ(counter_index(deg(-1), c), 15);
    c.point_detector_mode = true;
    EXPECT_EQ(counter_index(deg(22.4), c), 1);
    EXPECT_EQ(counter_index(deg(359.9), c), 0);
}

TEST(GaggPrescatter, NoInteractionPassesThrough)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    c.gagg_interaction_probability = 0;
    c.backscatter_probability = 0;
    PhotonState const photon(511, Vec3::UnitZ(), Unpolarized{});
    Rng rng(4);
    auto const out = gagg_prescatter(photon, c, rng);
    EXPECT_FALSE(out.interacted);
    EXPECT_EQ(out.deposited, 0.0);
    EXPECT_EQ(out.photon_after.energy(), 511.0);
    EXPECT_EQ(out.photon_after.direction(), Vec3::UnitZ());
}

TEST(GaggPrescatter, InteractsWithGivenProbability)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    PhotonState const photon(511, Vec3::UnitZ(), Unpolarized{});
    Rng rng(5);
    constexpr int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
    {
        auto const out = gagg_prescatter(photon, c, rng);
        if (out.interacted)
        {
            ++hits;
            EXPECT_NEAR(out.photon_after.energy() + out.true_recoil, 511, 1e-9);
        }
    }
    double const p = c.gagg_interaction_probability;
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(GaggPrescatter, SubThresholdRecoilReadsZero)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    c.gagg_resolution_fwhm_frac_at_170 = 0;
    c.nai_resolution_fwhm_frac_at_511 = 0;
    PhotonState const photon(511, Vec3::UnitZ(), Unpolarized{});
    Rng rng(6);
    double const theta = scatter_angle_for_recoil(511, 0.5);
    auto const s = scatter_at(photon, theta, 0.0, rng);
    auto const out = gagg_outcome(photon, s, c, rng);
    EXPECT_TRUE(out.interacted);
    EXPECT_EQ(out.deposited, 0.0);
    EXPECT_NEAR(out.true_recoil, 0.5, 1e-9);

    // A right-angle pair whose GAGG arm is barely deflected looks entangled
    EventGenerator const gen(ModelSet{}, c);
    auto const kin = PairKinematics::from_angles(pi / 2, pi / 2, 0.0, pi / 2);
    auto const e = gen.forward_event(kin, out, rng);
    EXPECT_EQ(e.class_tag, EventClass::entangled_candidate);
    EXPECT_EQ(e.e_gagg, 0.0);
}

std::vector<EventRecord> generate(ApparatusConfig const& c, int attempts, unsigned seed)
{
    EventGenerator const gen(ModelSet{}, c);
    Rng rng(seed);
    std::vector<EventRecord> out;
    for (int i = 0; i < attempts; ++i)
    {
        if (auto e = gen(rng))
            out.push_back(*e);
    }
    return out;
}

TEST(EventGenerator, GaggDisabledGivesOnlyEntangledCandidates)
{
    ApparatusConfig const c;
    auto const events = generate(c, 100000, 7);
    ASSERT_FALSE(events.empty());
    auto const window = c.theta_window();
    for (auto const& e : events)
    {
        EXPECT_EQ(e.class_tag, EventClass::entangled_candidate);
        EXPECT_EQ(e.e_gagg, 0.0);
        EXPECT_TRUE(window.contains(e.kin.theta1));
        EXPECT_TRUE(window.contains(e.kin.theta2));
    }
}

TEST(EventGenerator, CounterDiscretization)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    auto const events = generate(c, 100000, 8);
    double const pitch = deg(22.5);
    for (auto const& e : events)
    {
        EXPECT_EQ(e.counter1, static_cast<int>(std::floor(e.kin.phi1 / pitch)));
        EXPECT_EQ(e.counter2, static_cast<int>(std::floor(e.kin.phi2 / pitch)));
        EXPECT_GE(e.counter1, 0);
        EXPECT_LT(e.counter1, 16);
        // Reconstructed relative azimuth lies within one bin of the truth
        double const reco = (e.counter1 - e.counter2) * pitch;
        double const diff = std::remainder(reco - (e.kin.phi1 - e.kin.phi2), 2 * pi);
        EXPECT_LE(std::abs(diff), pitch + 1e-12);
    }
}

TEST(EventGenerator, EnergyBookkeeping)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    EventGenerator const gen(ModelSet{}, c);
    Rng rng(9);
    int seen[3] = {0, 0, 0};
    for (int i = 0; i < 100000; ++i)
    {
        auto const e = gen(rng);
        if (!e)
            continue;
        ++seen[static_cast<int>(e->chain)];
        EXPECT_NEAR(e->truth.total(), 1022.0, 1e-9);
        EXPECT_GE(e->e_gagg, 0);
        EXPECT_GE(e->e_nai1, 0);
        EXPECT_GE(e->e_plastic1, 0);
        if (e->class_tag == EventClass::entangled_candidate)
            EXPECT_EQ(e->e_gagg, 0.0);
    }
    EXPECT_GT(seen[0], 0);
    EXPECT_GT(seen[1], 0);
    EXPECT_GT(seen[2], 0);
}

TEST(EventGenerator, ClassABoundFromRecoilKinematics)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    c.gagg_resolution_fwhm_frac_at_170 = 0;
    double const bound = oracle::angle_for_recoil(511, c.bands.a_gagg_max);
    auto const events = generate(c, 400000, 10);
    int class_a = 0;
    for (auto const& e : events)
    {
        if (e.class_tag != EventClass::a)
            continue;
        ++class_a;
        ASSERT_EQ(e.chain, EventChain::gagg_forward);
        EXPECT_LT(e.gagg_theta, bound);
    }
    EXPECT_GT(class_a, 100);
}

TEST(EventGenerator, BackscatterChainFeedsClassD)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    c.gagg_interaction_probability = 0;
    c.backscatter_probability = 1;
    auto const events = generate(c, 50000, 11);
    int d = 0;
    for (auto const& e : events)
    {
        EXPECT_EQ(e.chain, EventChain::backscatter);
        d += e.class_tag == EventClass::d ? 1 : 0;
    }
    EXPECT_GT(d, static_cast<int>(0.8 * events.size()));
}

TEST(EventGenerator, DeterministicGivenStream)
{
    ApparatusConfig c;
    c.gagg_enabled = true;
    auto const a = generate(c, 5000, 12);
    auto const b = generate(c, 5000, 12);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        EXPECT_EQ(a[i].kin, b[i].kin);
        EXPECT_EQ(a[i].e_nai1, b[i].e_nai1);
        EXPECT_EQ(a[i].class_tag, b[i].class_tag);
    }
}

TEST(SimulateEvent, UsesModelForEveryChain)
{
    ApparatusConfig const c;
    Rng rng(13);
    int accepted = 0;
    for (int i = 0; i < 200; ++i)
        accepted += simulate_event(PairModel::mixed_ba(), c, rng).has_value() ? 1 : 0;
    EXPECT_GT(accepted, 0);
}

}  // namespace
