#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pairpol/analysis.hpp"
#include "pairpol/compton.hpp"
#include "pairpol/config.hpp"
#include "pairpol/errors.hpp"
#include "pairpol/listmode.hpp"
#include "pairpol/pair_models.hpp"
#include "pairpol/run.hpp"

namespace {

using namespace pairpol;

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_io = 2;

struct SimulateOptions
{
    std::string config_path;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> events;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    bool listmode{false};
};

struct AnalyzeOptions
{
    std::string listmode_path;
    std::string out_dir;
    int counters{16};
    std::vector<std::string> selections;
};

struct PredictOptions
{
    std::string model;
    double theta1{};
    double theta2{};
    double energy{annihilation_energy};
};

void print_selection(SelectionResult const& r)
{
    std::printf("[%s] events = %.0f\n", r.selection.name.c_str(), r.hist.total());
    if (r.fit)
    {
        std::printf("  R = %.4f +- %.4f\n  mu = %.4f +- %.4f\n  chi2/dof = %.2f / %d\n",
                    r.fit->R,
                    r.fit->sigma_R,
                    r.fit->mu,
                    r.fit->sigma_mu,
                    r.fit->chi2,
                    r.fit->dof);
    }
    if (r.s_fit)
        std::printf("  p0 = %.4f +- %.4f\n", r.s_fit->p0, r.s_fit->sigma_p0);
    if (r.chsh)
        std::printf("  max|S| = %.4f, max|S|/p0 = %.4f\n",
                    r.chsh->max_abs_s,
                    r.chsh->normalized_max);
    for (auto const& w : r.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int do_simulate(SimulateOptions const& opt)
{
    RunConfig config;
    if (!opt.config_path.empty())
        config = load_config(opt.config_path);
    else if (!opt.preset)
        throw ConfigError("simulate needs --config or --preset");
    if (opt.preset)
        apply_preset(config, *opt.preset);
    if (opt.events)
        config.n_events = *opt.events;
    if (opt.seed)
        config.seed = *opt.seed;
    if (opt.workers)
        config.workers = *opt.workers;
    if (opt.out_dir)
        config.outputs.out_dir = *opt.out_dir;
    if (opt.listmode)
        config.outputs.listmode = true;
    config.validate();

    RunSummary const s = run(config);
    std::printf("model = %s\nattempted = %llu\naccepted = %llu\n",
                config.model.tag().c_str(),
                static_cast<unsigned long long>(s.attempted),
                static_cast<unsigned long long>(s.accepted_total()));
    for (auto const& r : s.selections)
        print_selection(r);
    std::printf("outputs written to %s\n", config.outputs.out_dir.c_str());
    return exit_ok;
}

int do_config(SimulateOptions const& opt)
{
    RunConfig config;
    if (!opt.config_path.empty())
        config = load_config(opt.config_path);
    if (opt.preset)
        apply_preset(config, *opt.preset);
    config.validate();
    std::fputs(emit_config(config).c_str(), stdout);
    return exit_ok;
}

int do_analyze(AnalyzeOptions const& opt)
{
    auto const events = read_listmode(opt.listmode_path);
    std::vector<std::string> selections = opt.selections;
    if (selections.empty())
    {
        for (char const* name : {"entangled", "decoherent", "a", "b", "c", "d"})
        {
            Selection const sel = Selection::parse(name);
            for (auto const& e : events)
            {
                if (sel.contains(e.class_tag))
                {
                    selections.emplace_back(name);
                    break;
                }
            }
        }
        if (selections.empty())
            selections.emplace_back("entangled");
    }
    for (auto const& name : selections)
    {
        try
        {
            Selection::parse(name);
        }
        catch (std::invalid_argument const& e)
        {
            throw ConfigError(e.what());
        }
    }
    if (opt.counters < 4 || opt.counters % 4 != 0)
        throw ConfigError("--counters must be a positive multiple of 4");

    RunSummary s = summarize_events(events, selections, opt.counters);
    s.listmode_source = opt.listmode_path;
    write_outputs(s, opt.out_dir);
    std::printf("events = %zu\n", events.size());
    for (auto const& r : s.selections)
        print_selection(r);
    return exit_ok;
}

int do_predict(PredictOptions const& opt)
{
    PairModel model = PairModel::entangled();
    try
    {
        model = PairModel::parse(opt.model);
    }
    catch (std::invalid_argument const& e)
    {
        throw ConfigError(e.what());
    }
    for (double t : {opt.theta1, opt.theta2})
    {
        if (!(t > 0 && t < 180))
            throw ConfigError("scattering angles must lie in (0, 180) deg");
    }
    if (!(opt.energy > 0))
        throw ConfigError("energy must be positive");

    double const t1 = opt.theta1 * pi / 180;
    double const t2 = opt.theta2 * pi / 180;
    double const mu = predicted_modulation(model, t1, t2, opt.energy);
    double const r = (1 + mu) / (1 - mu);
    std::printf("model = %s\n", model.tag().c_str());
    std::printf("theta1_deg = %.6g\ntheta2_deg = %.6g\n", opt.theta1, opt.theta2);
    std::printf("alpha1 = %.6f\nalpha2 = %.6f\n",
                analyzing_power(opt.energy, t1),
                analyzing_power(opt.energy, t2));
    std::printf("mu = %.6f\nR = %.6f\n", mu, r);
    std::printf("S_extremum = %.6f\n", -2 * std::sqrt(2.0) * mu);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo of Compton polarimetry for annihilation photon pairs"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Generate events and analyse them");
    simulate->add_option("--config", sim.config_path, "Configuration file (TOML-style or JSON)");
    simulate->add_option("--preset", sim.preset, "Experiment preset");
    simulate->add_option("--events", sim.events, "Attempted events");
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--workers", sim.workers, "Worker threads");
    simulate->add_option("--out-dir", sim.out_dir, "Output directory");
    simulate->add_flag("--listmode", sim.listmode, "Also write listmode.csv");

    SimulateOptions cfg;
    auto* show = app.add_subcommand("config", "Print the resolved configuration");
    show->add_option("--config", cfg.config_path, "Configuration file (TOML-style or JSON)");
    show->add_option("--preset", cfg.preset, "Experiment preset");

    AnalyzeOptions ana;
    auto* analyze = app.add_subcommand("analyze", "Re-run the analysis on a listmode file");
    analyze->add_option("--listmode", ana.listmode_path, "Listmode CSV")->required();
    analyze->add_option("--out-dir", ana.out_dir, "Output directory")->required();
    analyze->add_option("--counters", ana.counters, "Counters per arm");
    analyze->add_option("--selection", ana.selections,
                        "Selections to analyse (default: all non-empty)");

    PredictOptions pred;
    auto* predict = app.add_subcommand("predict", "Closed-form R, mu, and S extremum");
    predict->add_option("--model", pred.model, "Pair model tag")->required();
    predict->add_option("--theta1", pred.theta1, "Polar angle of photon 1 [deg]")->required();
    predict->add_option("--theta2", pred.theta2, "Polar angle of photon 2 [deg]")->required();
    predict->add_option("--energy", pred.energy, "Photon energy [keV]");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return exit_validation;
    }

    try
    {
        if (*simulate)
            return do_simulate(sim);
        if (*analyze)
            return do_analyze(ana);
        if (*show)
            return do_config(cfg);
        return do_predict(pred);
    }
    catch (IoError const& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io;
    }
    catch (ConfigError const& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    }
    catch (std::exception const& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    }
}
