#include "pairpol/run.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pairpol/errors.hpp"
#include "pairpol/listmode.hpp"
#include "pairpol/plot_output.hpp"

namespace pairpol {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct ChunkResult
{
    std::uint64_t attempted{};
    std::array<std::uint64_t, event_class_count> accepted{};
    std::vector<AngleHistogram> hists;
    std::vector<EventRecord> events;
};

ChunkResult run_chunk(EventGenerator const& gen,
                      std::uint64_t seed,
                      std::uint64_t index,
                      std::uint64_t attempts,
                      bool keep_events)
{
    ChunkResult r;
    int const n = gen.config().n_counters_per_arm;
    r.hists.assign(event_class_count, AngleHistogram(n));
    Rng rng = make_stream(seed, index);
    for (std::uint64_t i = 0; i < attempts; ++i)
    {
        auto e = gen(rng);
        if (!e)
            continue;
        auto const c = static_cast<std::size_t>(e->class_tag);
        ++r.accepted[c];
        r.hists[c].fill_counters(e->counter1, e->counter2);
        if (keep_events)
            r.events.push_back(*e);
    }
    r.attempted = attempts;
    return r;
}

AngleHistogram selection_histogram(std::vector<AngleHistogram> const& by_class,
                                   Selection const& sel,
                                   int n)
{
    AngleHistogram h(n);
    for (int c = 0; c < event_class_count; ++c)
    {
        if (sel.contains(static_cast<EventClass>(c)))
            h.merge(by_class[static_cast<std::size_t>(c)]);
    }
    return h;
}

void analyze_all(RunSummary& s, std::vector<std::string> const& names, int n)
{
    for (auto const& name : names)
    {
        Selection sel = Selection::parse(name);
        AngleHistogram h = selection_histogram(s.class_histograms, sel, n);
        s.selections.push_back(analyze_selection(std::move(sel), std::move(h)));
    }
}

ordered_json number_or_null(std::optional<double> v)
{
    if (v && std::isfinite(*v))
        return *v;
    return nullptr;
}

ordered_json selection_json(SelectionResult const& r, std::string const& model)
{
    ordered_json j;
    j["model"] = model;
    j["class"] = r.selection.name;
    auto fit = r.fit;
    auto sfit = r.s_fit;
    j["A"] = number_or_null(fit ? std::optional(fit->A) : std::nullopt);
    j["B"] = number_or_null(fit ? std::optional(fit->B) : std::nullopt);
    j["R"] = number_or_null(fit ? std::optional(fit->R) : std::nullopt);
    j["sigma_R"] = number_or_null(fit ? std::optional(fit->sigma_R) : std::nullopt);
    j["mu"] = number_or_null(fit ? std::optional(fit->mu) : std::nullopt);
    j["sigma_mu"] = number_or_null(fit ? std::optional(fit->sigma_mu) : std::nullopt);
    j["p0"] = number_or_null(sfit ? std::optional(sfit->p0) : std::nullopt);
    j["sigma_p0"] = number_or_null(sfit ? std::optional(sfit->sigma_p0) : std::nullopt);
    j["chi2"] = number_or_null(fit ? std::optional(fit->chi2) : std::nullopt);
    j["dof"] = fit ? ordered_json(fit->dof) : ordered_json(nullptr);
    j["events"] = r.hist.total();
    j["s_chi2"] = number_or_null(sfit ? std::optional(sfit->chi2) : std::nullopt);
    j["s_dof"] = sfit ? ordered_json(sfit->dof) : ordered_json(nullptr);
    if (r.chsh)
    {
        j["chsh"] = {
            {"max_abs_S", r.chsh->max_abs_s},
            {"sigma_max_abs_S", r.chsh->max_abs_s_sigma},
            {"angle_of_max_deg", r.chsh->angle_of_max * 180 / pi},
            {"raw_violation", r.chsh->raw_violation},
            {"normalized_max", number_or_null(r.chsh->normalized_max)},
            {"normalized_bound", r.chsh->normalized_bound},
        };
    }
    j["warnings"] = r.warnings;
    return j;
}

void write_text(std::filesystem::path const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (out.fail())
        throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

//---------------------------------------------------------------------------//
SelectionResult analyze_selection(Selection selection, AngleHistogram hist)
{
    SelectionResult r{std::move(selection), std::move(hist), {}, {}, {}, {}, {}};
    if (!(r.hist.total() > 0))
    {
        r.warnings.push_back("selection '" + r.selection.name + "' is empty");
        return r;
    }
    try
    {
        r.fit = fit_cosine(r.hist);
    }
    catch (FitDegenerateError const& e)
    {
        r.warnings.push_back(e.what());
    }
    try
    {
        r.correlations = correlation_set(r.hist);
        r.s_fit = fit_s_curve(*r.correlations);
        r.chsh = chsh_report(*r.correlations, *r.s_fit);
    }
    catch (UndefinedCorrelationError const& e)
    {
        r.warnings.push_back(e.what());
    }
    catch (FitDegenerateError const& e)
    {
        r.warnings.push_back(e.what());
    }
    return r;
}

std::uint64_t RunSummary::accepted_total() const
{
    std::uint64_t t = 0;
    for (auto a : accepted)
        t += a;
    return t;
}

SelectionResult const* RunSummary::find(std::string_view selection) const
{
    for (auto const& s : selections)
    {
        if (s.selection.name == selection)
            return &s;
    }
    return nullptr;
}

RunSummary simulate(RunConfig const& config, EventSink const& sink)
{
    config.validate();
    auto const start = std::chrono::steady_clock::now();
    EventGenerator const gen(config.models(), config.apparatus);
    int const n = config.apparatus.n_counters_per_arm;

    RunSummary s;
    s.config = config;
    s.class_histograms.assign(event_class_count, AngleHistogram(n));
    s.n_chunks = (config.n_events + chunk_size - 1) / chunk_size;
    s.workers_used = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.workers), s.n_chunks));
    bool const keep = static_cast<bool>(sink);

    auto attempts_of = [&](std::uint64_t i) {
        return std::min(chunk_size, config.n_events - i * chunk_size);
    };
    auto absorb = [&](ChunkResult&& r) {
        s.attempted += r.attempted;
        for (std::size_t c = 0; c < event_class_count; ++c)
        {
            s.accepted[c] += r.accepted[c];
            s.class_histograms[c].merge(r.hists[c]);
        }
        if (keep)
            sink(r.events);
    };

    auto const batch = static_cast<std::uint64_t>(std::max(1, s.workers_used));
    for (std::uint64_t first = 0; first < s.n_chunks; first += batch)
    {
        std::uint64_t const count = std::min(batch, s.n_chunks - first);
        std::vector<ChunkResult> results(count);
        if (count == 1)
        {
            results[0] = run_chunk(gen, config.seed, first, attempts_of(first), keep);
        }
        else
        {
            std::vector<std::exception_ptr> errors(count);
            std::vector<std::thread> threads;
            threads.reserve(count);
            for (std::uint64_t k = 0; k < count; ++k)
            {
                threads.emplace_back([&, k] {
                    try
                    {
                        results[k] = run_chunk(
                            gen, config.seed, first + k, attempts_of(first + k), keep);
                    }
                    catch (...)
                    {
                        errors[k] = std::current_exception();
                    }
                });
            }
            for (auto& t : threads)
                t.join();
            for (auto const& e : errors)
            {
                if (e)
                    std::rethrow_exception(e);
            }
        }
        for (auto& r : results)
            absorb(std::move(r));
    }

    analyze_all(s, config.selections, n);
    s.wall_seconds
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return s;
}

RunSummary summarize_events(std::span<EventRecord const> events,
                            std::vector<std::string> const& selections,
                            int n_counters)
{
    RunSummary s;
    s.class_histograms.assign(event_class_count, AngleHistogram(n_counters));
    for (auto const& e : events)
    {
        if (e.counter1 >= n_counters || e.counter2 >= n_counters)
            throw IoError("counter index exceeds the configured counter count");
        auto const c = static_cast<std::size_t>(e.class_tag);
        ++s.accepted[c];
        s.class_histograms[c].fill_counters(e.counter1, e.counter2);
    }
    s.attempted = events.size();
    s.config.selections = selections;
    analyze_all(s, selections, n_counters);
    return s;
}

// Tag of the pair model that feeds a selection's classes
std::string selection_model(RunSummary const& s, Selection const& sel)
{
    if (s.listmode_source)
        return "unknown";
    std::vector<std::string> tags;
    auto add = [&](EventClass c, PairModel const& m) {
        if (sel.contains(c) && std::find(tags.begin(), tags.end(), m.tag()) == tags.end())
            tags.push_back(m.tag());
    };
    add(EventClass::entangled_candidate, s.config.model);
    for (auto c : {EventClass::a, EventClass::b, EventClass::c})
        add(c, s.config.decoherent_model);
    add(EventClass::d, s.config.backscatter_model);
    std::string out;
    for (auto const& t : tags)
        out += (out.empty() ? "" : "+") + t;
    return out;
}

std::string summary_json(RunSummary const& s)
{
    ordered_json j;
    if (!s.selections.empty())
    {
        auto const& first = s.selections.front();
        ordered_json const primary = selection_json(first, selection_model(s, first.selection));
        for (auto const& [k, v] : primary.items())
            j[k] = v;
    }
    j["preset"] = s.config.preset ? ordered_json(*s.config.preset) : ordered_json(nullptr);
    j["attempted"] = s.attempted;
    ordered_json accepted;
    for (int c = 0; c < event_class_count; ++c)
        accepted[std::string(to_string(static_cast<EventClass>(c)))] = s.accepted[static_cast<std::size_t>(c)];
    j["accepted"] = accepted;
    ordered_json sels = ordered_json::array();
    for (auto const& r : s.selections)
        sels.push_back(selection_json(r, selection_model(s, r.selection)));
    j["selections"] = sels;
    if (s.listmode_source)
    {
        j["listmode"] = *s.listmode_source;
    }
    else
    {
        j["seed_derivation"] = {
            {"scheme", "chunk i uses mt19937_64(splitmix64(seed + (i + 1) * 0x9e3779b97f4a7c15))"},
            {"seed", s.config.seed},
            {"chunk_size", chunk_size},
            {"n_chunks", s.n_chunks},
        };
        auto config = ordered_json::parse(emit_config_json(s.config));
        config.erase("workers");
        j["config"] = config;
    }
    return j.dump(2) + "\n";
}

std::string run_info_json(RunSummary const& s)
{
    ordered_json j;
    j["wall_seconds"] = s.wall_seconds;
    j["workers"] = s.workers_used;
    j["n_chunks"] = s.n_chunks;
    j["chunk_size"] = chunk_size;
    j["attempted"] = s.attempted;
    j["accepted"] = s.accepted_total();
    ordered_json seeds = ordered_json::array();
    for (std::uint64_t i = 0; i < std::min<std::uint64_t>(s.n_chunks, 16); ++i)
        seeds.push_back(split_seed(s.config.seed, i));
    j["first_chunk_seeds"] = seeds;
    return j.dump(2) + "\n";
}

void write_outputs(RunSummary const& s, std::filesystem::path const& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_text(dir / "summary.json", summary_json(s));
    write_text(dir / "run_info.json", run_info_json(s));
    emit_plot_data(s, dir);
}

RunSummary run(RunConfig const& config)
{
    config.validate();
    std::filesystem::path const dir = config.outputs.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

    RunSummary s;
    if (config.outputs.listmode)
    {
        ListmodeWriter writer(dir / "listmode.csv");
        s = simulate(config, [&writer](std::span<EventRecord const> ev) { writer.write(ev); });
        writer.close();
    }
    else
    {
        s = simulate(config);
    }
    write_outputs(s, dir);
    return s;
}

}  // namespace pairpol
