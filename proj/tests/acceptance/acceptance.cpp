// Acceptance checks: one PASS/FAIL line per check, one verdict per criterion.
//
//   acceptance                 all criteria
//   acceptance --criterion N   criterion N only

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pairpol/analysis.hpp"
#include "pairpol/compton.hpp"
#include "pairpol/config.hpp"
#include "pairpol/pair_models.hpp"
#include "pairpol/run.hpp"
#include "process.hpp"
#include "unit/oracles.hpp"

namespace {

using namespace pairpol;

constexpr double pi = 3.14159265358979323846;
constexpr double deg = pi / 180;

class Criterion
{
  public:
    explicit Criterion(int id) : id_(id) {}

    template <typename... Args>
    void check(bool pass, char const* label, char const* fmt, Args... args)
    {
        char detail[512];
        std::snprintf(detail, sizeof detail, fmt, args...);
        std::printf("C%-2d %s  %s: %s\n", id_, pass ? "PASS" : "FAIL", label, detail);
        std::fflush(stdout);
        ok_ = ok_ && pass;
    }

    template <typename... Args>
    void note(char const* fmt, Args... args)
    {
        std::printf("C%-2d info  ", id_);
        std::printf(fmt, args...);
        std::printf("\n");
        std::fflush(stdout);
    }

    bool ok() const { return ok_; }
    int id() const { return id_; }

  private:
    int id_;
    bool ok_{true};
};

RunConfig preset_config(std::string const& preset, std::uint64_t attempts)
{
    RunConfig c;
    apply_preset(c, preset);
    c.n_events = attempts;
    c.seed = 1;
    c.workers = 1;
    return c;
}

FitResult fitted(RunSummary const& s, std::string const& selection)
{
    auto const* r = s.find(selection);
    if (!r || !r->fit)
        throw std::runtime_error("no fit for selection " + selection);
    return *r->fit;
}

double combined(double a, double b)
{
    return std::hypot(a, b);
}

// 1. Closed-form point polarimeter at 82 degrees, read from the CLI
void point_anchor(Criterion& c)
{
    auto const r = testutil::run_process(std::string(PAIRPOL_EXE)
                                         + " predict --model entangled --theta1 82 --theta2 82");
    c.check(r.exit_code == 0, "predict exits 0", "exit code %d", r.exit_code);
    auto const ratio = testutil::output_value(r.out, "R");
    auto const mu = testutil::output_value(r.out, "mu");
    if (!ratio || !mu)
    {
        c.check(false, "predict output", "missing R or mu in:\n%s", r.out.c_str());
        return;
    }
    c.check(std::abs(*ratio - 2.85) <= 0.01, "R = 2.85 +- 0.01", "R = %.6f", *ratio);
    c.check(std::abs(*mu - 0.476) <= 0.005, "mu = 0.476 +- 0.005", "mu = %.6f", *mu);
    double const alpha = analyzing_power(511, 82 * deg);
    double const best = [] {
        double m = 0;
        for (double t = 60; t <= 110; t += 0.01)
            m = std::max(m, analyzing_power(511, t * deg));
        return m;
    }();
    c.note("alpha(82 deg) = %.6f, alpha^2 = %.6f, (1+alpha^2)/(1-alpha^2) = %.6f; "
           "largest alpha^2 over theta = %.6f (R = %.6f)",
           alpha, alpha * alpha, (1 + alpha * alpha) / (1 - alpha * alpha), best * best,
           (1 + best * best) / (1 - best * best));
}

// 2. Finite theta window and 22.5 degree counters
void geometry_reduction(Criterion& c)
{
    auto const cfg = preset_config("entangled_baseline", 10'000'000);
    auto const s = simulate(cfg);
    auto const f = fitted(s, "entangled");
    c.note("accepted %llu of %llu attempts, chi2/dof = %.2f/%d",
           static_cast<unsigned long long>(s.accepted_total()),
           static_cast<unsigned long long>(s.attempted), f.chi2, f.dof);
    c.check(f.R >= 2.35 && f.R <= 2.45, "R in [2.35, 2.45]", "R = %.4f +- %.4f", f.R, f.sigma_R);
    c.check(f.mu >= 0.40 && f.mu <= 0.42, "mu in [0.40, 0.42]", "mu = %.4f +- %.4f", f.mu,
            f.sigma_mu);
    c.check(s.wall_seconds < 300, "runtime < 5 min single-threaded", "%.1f s", s.wall_seconds);
}

// 3. Exact 90 degree point polarimeter
void orthogonal_counters(Criterion& c)
{
    auto cfg = preset_config("point_82deg", 4'000'000);
    cfg.apparatus.theta_window_deg = {90.0, 90.0};
    auto const f = fitted(simulate(cfg), "entangled");
    c.check(std::abs(f.R - 2.60) <= 0.02, "R = 2.60 +- 0.02", "R = %.4f +- %.4f", f.R, f.sigma_R);
    c.note("closed form R = %.6f",
           oracle::ratio_from_modulation(predicted_modulation(PairModel::entangled(), pi / 2,
                                                              pi / 2, 511)));
}

// 4. Entangled and decoherent pairs, 10^6 accepted events each
void decoherent_identity(Criterion& c)
{
    constexpr double target = 1'000'000;

    auto const pilot = simulate(preset_config("decoherent_all", 1'000'000));
    double const rate = pilot.find("decoherent")->hist.total() / 1e6;
    auto dec_cfg = preset_config("decoherent_all", static_cast<std::uint64_t>(std::ceil(1.02 * target / rate)));
    auto const dec_run = simulate(dec_cfg);
    auto const dec = fitted(dec_run, "decoherent");
    double const n_dec = dec_run.find("decoherent")->hist.total();

    auto const ent_pilot = simulate(preset_config("entangled_baseline", 200'000));
    double const ent_rate = ent_pilot.find("entangled")->hist.total() / 2e5;
    auto const ent_run = simulate(
        preset_config("entangled_baseline", static_cast<std::uint64_t>(std::ceil(1.02 * target / ent_rate))));
    auto const ent = fitted(ent_run, "entangled");
    double const n_ent = ent_run.find("entangled")->hist.total();

    c.check(n_dec >= target && n_ent >= target, "10^6 accepted events each",
            "decoherent %.0f (%llu attempts), entangled %.0f (%llu attempts)", n_dec,
            static_cast<unsigned long long>(dec_run.attempted), n_ent,
            static_cast<unsigned long long>(ent_run.attempted));
    double const sigma = combined(dec.sigma_mu, ent.sigma_mu);
    double const pull = (dec.mu - ent.mu) / sigma;
    c.check(std::abs(pull) <= 3, "mu equal within 3 combined sigma",
            "decoherent %.4f +- %.4f, entangled %.4f +- %.4f, difference %.2f sigma", dec.mu,
            dec.sigma_mu, ent.mu, ent.sigma_mu, pull);
    c.note("R decoherent = %.4f +- %.4f, R entangled = %.4f +- %.4f", dec.R, dec.sigma_R, ent.R,
           ent.sigma_R);
}

// 5. Mixed separable state with no azimuthal correlation
void mixed_ba(Criterion& c)
{
    auto cfg = preset_config("entangled_baseline", 2'000'000);
    cfg.model = PairModel::mixed_ba();
    auto const f = fitted(simulate(cfg), "entangled");
    c.check(std::abs(f.mu) < 3 * f.sigma_mu, "|mu| < 3 sigma", "mu = %.5f +- %.5f", f.mu,
            f.sigma_mu);
    c.check(std::abs(f.R - 1) < 3 * f.sigma_R, "R consistent with 1", "R = %.4f +- %.4f", f.R,
            f.sigma_R);
}

// 6. Fixed-basis product state gives half the entangled modulation
void product_half(Criterion& c)
{
    for (double t : {82.0, 90.0})
    {
        auto product = [t](double p1, double p2) {
            double const th = t * deg;
            return 0.5 * oracle::product_density(511, th, p1, 0, th, p2, pi / 2)
                   + 0.5 * oracle::product_density(511, th, p1, pi / 2, th, p2, 0);
        };
        double const a = oracle::analyzing_power(511, t * deg);
        double const ratio = oracle::modulation_2d(product) / (a * a);
        c.check(std::abs(ratio - 0.5) < 1e-9, "quadrature factor 1/2",
                "theta = %.0f deg: mu_product / alpha^2 = %.12f", t, ratio);
    }

    auto cfg = preset_config("entangled_baseline", 4'000'000);
    auto const ent = fitted(simulate(cfg), "entangled");
    cfg.model = PairModel::product_fixed_basis();
    auto const prod = fitted(simulate(cfg), "entangled");
    double const sigma = combined(prod.sigma_mu, 0.5 * ent.sigma_mu);
    double const pull = (prod.mu - 0.5 * ent.mu) / sigma;
    c.check(std::abs(pull) <= 3, "mu_product = mu_entangled / 2 within 3 sigma",
            "product %.4f +- %.4f, entangled/2 %.4f +- %.4f, difference %.2f sigma", prod.mu,
            prod.sigma_mu, 0.5 * ent.mu, 0.5 * ent.sigma_mu, pull);
}

// 7. Polarization flips and depolarized mixtures
void depolarization(Criterion& c)
{
    double const flip = flip_probability(511, pi);
    c.check(std::abs(flip - 0.2) < 1e-12, "flip_probability(511, 180) = 0.2", "%.15f", flip);

    double const closed = predicted_modulation(PairModel::depolarized(0.2), 82 * deg, 82 * deg, 511)
                          / predicted_modulation(PairModel::entangled(), 82 * deg, 82 * deg, 511);
    c.note("closed-form reduction factor = %.12f", closed);

    auto cfg = preset_config("entangled_baseline", 10'000'000);
    auto const ent = fitted(simulate(cfg), "entangled");
    cfg.model = PairModel::depolarized(0.2);
    auto const dep = fitted(simulate(cfg), "entangled");
    double const factor = dep.mu / ent.mu;
    double const factor_sigma
        = factor * std::hypot(dep.sigma_mu / dep.mu, ent.sigma_mu / ent.mu);
    c.check(std::abs(factor - 0.60) <= 0.01, "mu reduction factor 0.60 +- 0.01",
            "%.4f +- %.4f (mu %.4f vs %.4f)", factor, factor_sigma, dep.mu, ent.mu);
    c.check(dep.R >= 1.60 && dep.R <= 1.72, "depolarized(0.2) R in [1.60, 1.72]",
            "R = %.4f +- %.4f", dep.R, dep.sigma_R);

    cfg.n_events = 2'000'000;
    cfg.model = PairModel::depolarized(0.5);
    auto const half = fitted(simulate(cfg), "entangled");
    c.check(std::abs(half.R - 1) < 3 * half.sigma_R, "depolarized(0.5) R = 1 within 3 sigma",
            "R = %.4f +- %.4f", half.R, half.sigma_R);

    auto const d_run = simulate(preset_config("class_d", 10'000'000));
    auto const d = d_run.find("d");
    if (d && d->fit)
        c.check(d->fit->R >= 1.60 && d->fit->R <= 1.72, "class d R in [1.60, 1.72]",
                "R = %.4f +- %.4f from %.0f events", d->fit->R, d->fit->sigma_R, d->hist.total());
    else
        c.check(false, "class d fit", "%s", "no class d fit");
}

// 8. CHSH S-function from the entangled run
void s_function(Criterion& c)
{
    auto const s = simulate(preset_config("s_function_entangled", 10'000'000));
    auto const* r = s.find("entangled");
    if (!r || !r->fit || !r->s_fit || !r->chsh)
    {
        c.check(false, "S analysis", "%s", "missing S results");
        return;
    }
    auto const& f = *r->fit;
    auto const& sf = *r->s_fit;
    auto const& ch = *r->chsh;
    double const reduced = sf.chi2 / sf.dof;
    c.check(reduced >= 0.5 && reduced <= 2.0, "S fit chi2/dof in [0.5, 2.0]", "%.3f / %d = %.3f",
            sf.chi2, sf.dof, reduced);
    c.check(std::abs(sf.p0 - f.mu) <= 2 * sf.sigma_p0, "p0 = mu within 2 sigma",
            "p0 = %.4f +- %.4f, mu = %.4f +- %.4f", sf.p0, sf.sigma_p0, f.mu, f.sigma_mu);
    double const expected = 2 * std::sqrt(2.0) * f.mu;
    c.check(std::abs(ch.max_abs_s - expected) <= 2 * ch.max_abs_s_sigma,
            "max|S| = 2 sqrt2 mu within 2 sigma", "max|S| = %.4f +- %.4f at %.1f deg, 2 sqrt2 mu = %.4f",
            ch.max_abs_s, ch.max_abs_s_sigma, ch.angle_of_max / deg, expected);
    c.check(std::abs(ch.normalized_max - 2.83) <= 0.02, "max|S|/p0 = 2.83 +- 0.02", "%.4f",
            ch.normalized_max);
    double ideal = 0;
    for (int i = 0; i <= 3600; ++i)
        ideal = std::max(ideal, std::abs(s_model(0.48, i * 0.05 * deg)));
    c.check(ideal <= 1.4, "ideal mu = 0.48 gives max|S| <= 1.4", "%.4f", ideal);
}

// 9. Scattered photon energies
void energy_anchors(Criterion& c)
{
    double const e90 = scattered_energy(511, pi / 2);
    double const e180 = scattered_energy(511, pi);
    c.check(std::abs(e90 - 255.5) < 0.005, "E(90 deg) = 255.5 keV", "%.4f keV", e90);
    c.check(std::abs(e180 - 170.33) < 0.005, "E(180 deg) = 170.33 keV", "%.4f keV", e180);
    c.check(std::abs(e90 - 255.0) <= 0.3, "E(90 deg) within 0.3 keV of 255", "|%.4f - 255| = %.4f",
            e90, std::abs(e90 - 255.0));
    c.check(std::abs(e180 - 170.5) <= 0.3, "E(180 deg) within 0.3 keV of 170.5",
            "|%.4f - 170.5| = %.4f", e180, std::abs(e180 - 170.5));
}

// 10. Property suites
void properties(Criterion& c)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> energy(1, 3000);
    std::uniform_real_distribution<double> angle(0, pi);
    std::uniform_real_distribution<double> azimuth(0, 2 * pi);
    double worst = 0;
    for (int i = 0; i < 1000; ++i)
    {
        double const e = energy(rng);
        double const t = angle(rng);
        double const p = azimuth(rng);
        auto const g = oracle::geometry(t, p);
        double const c1 = std::clamp(g.pol_in.dot(g.basis1), -1.0, 1.0);
        double const c2 = std::clamp(g.pol_in.dot(g.basis2), -1.0, 1.0);
        double const sum = kn_dcs_pol_to_pol(e, t, std::acos(c1)) + kn_dcs_pol_to_pol(e, t, std::acos(c2));
        double const total = kn_dcs_polarized(e, t, p);
        worst = std::max(worst, std::abs(sum - total) / total);
    }
    c.check(worst < 1e-12, "polarization-sum identity", "max relative error %.2e over 1000 points",
            worst);

    std::uniform_real_distribution<double> amp(10, 1e6);
    std::uniform_real_distribution<double> frac(-0.95, 0.95);
    double worst_fit = 0;
    for (int i = 0; i < 1000; ++i)
    {
        double const a = amp(rng);
        double const b = a * frac(rng);
        std::vector<double> counts(16);
        for (int j = 0; j < 16; ++j)
            counts[j] = a - b * std::cos(2 * (2 * pi * j / 16));
        auto const f = fit_cosine(AngleHistogram::from_counts(counts));
        worst_fit = std::max({worst_fit, std::abs(f.A - a) / a, std::abs(f.B - b) / a});
    }
    c.check(worst_fit < 1e-10, "noiseless fit inversion", "max relative error %.2e", worst_fit);

    auto cfg = preset_config("decoherent_all", 5 * chunk_size + 777);
    cfg.selections = {"entangled", "decoherent", "a", "b", "c", "d"};
    cfg.workers = 1;
    auto const one = summary_json(simulate(cfg));
    cfg.workers = 4;
    auto const four = summary_json(simulate(cfg));
    cfg.workers = 3;
    auto const three = summary_json(simulate(cfg));
    c.check(one == four && one == three, "summaries identical for 1, 3, 4 workers", "%zu bytes",
            one.size());

    constexpr int runs = 200;
    double const truth = predicted_modulation(PairModel::entangled(), pi / 2, pi / 2, 511);
    std::vector<double> pulls;
    auto pcfg = preset_config("point_82deg", 50'000);
    pcfg.apparatus.theta_window_deg = {90.0, 90.0};
    for (int k = 0; k < runs; ++k)
    {
        pcfg.seed = 1000 + k;
        auto const f = fitted(simulate(pcfg), "entangled");
        pulls.push_back((f.mu - truth) / f.sigma_mu);
    }
    double mean = 0;
    for (double p : pulls)
        mean += p / runs;
    double var = 0;
    for (double p : pulls)
        var += (p - mean) * (p - mean) / (runs - 1);
    c.check(std::abs(mean) < 0.2, "pull mean |m| < 0.2", "%.3f over %d runs", mean, runs);
    c.check(var >= 0.7 && var <= 1.4, "pull variance in [0.7, 1.4]", "%.3f", var);
}

std::map<int, std::function<void(Criterion&)>> const criteria{
    {1, point_anchor},    {2, geometry_reduction}, {3, orthogonal_counters}, {4, decoherent_identity},
    {5, mixed_ba},        {6, product_half},       {7, depolarization},      {8, s_function},
    {9, energy_anchors},  {10, properties},
};

}  // namespace

int main(int argc, char** argv)
{
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i)
    {
        std::string const arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc)
            selected.push_back(std::atoi(argv[++i]));
        else
        {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 2;
        }
    }
    if (selected.empty())
        for (auto const& [id, fn] : criteria)
            selected.push_back(id);

    int failures = 0;
    for (int id : selected)
    {
        auto const it = criteria.find(id);
        if (it == criteria.end())
        {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        Criterion crit(id);
        try
        {
            it->second(crit);
        }
        catch (std::exception const& e)
        {
            crit.check(false, "exception", "%s", e.what());
        }
        std::printf("criterion %d: %s\n", id, crit.ok() ? "PASS" : "FAIL");
        failures += crit.ok() ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
