#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairpol/analysis.hpp"
#include "pairpol/apparatus.hpp"
#include "pairpol/config.hpp"

namespace pairpol {

//! Attempted events per independent random stream
inline constexpr std::uint64_t chunk_size = 65536;

//! Analysis chain output for one event selection
struct SelectionResult
{
    Selection selection;
    AngleHistogram hist;
    std::optional<FitResult> fit;
    std::optional<CorrelationSet> correlations;
    std::optional<SFit> s_fit;
    std::optional<ChshReport> chsh;
    std::vector<std::string> warnings;
};

// Run fit, correlations, and S fit; failures become warnings
SelectionResult analyze_selection(Selection selection, AngleHistogram hist);

struct RunSummary
{
    RunConfig config;
    //! Set when the summary was built from a listmode file
    std::optional<std::string> listmode_source;
    std::uint64_t attempted{};
    std::array<std::uint64_t, event_class_count> accepted{};
    std::vector<AngleHistogram> class_histograms;  //!< indexed by EventClass
    std::vector<SelectionResult> selections;
    std::uint64_t n_chunks{};
    double wall_seconds{};
    int workers_used{};

    std::uint64_t accepted_total() const;
    SelectionResult const* find(std::string_view selection) const;
};

//! Receives accepted events chunk by chunk, in chunk order
using EventSink = std::function<void(std::span<EventRecord const>)>;

/*!
 * Generate config.n_events attempts and analyse the configured selections.
 *
 * Attempts are split into chunks of chunk_size; chunk i always uses the
 * stream make_stream(seed, i), and results are merged in chunk order, so the
 * outcome does not depend on the number of workers.
 */
RunSummary simulate(RunConfig const& config, EventSink const& sink = {});

// Analyse stored events for the given selections
RunSummary summarize_events(std::span<EventRecord const> events,
                            std::vector<std::string> const& selections,
                            int n_counters = 16);

// Deterministic JSON summary (no timing or worker information)
std::string summary_json(RunSummary const& summary);
// Timing and stream bookkeeping
std::string run_info_json(RunSummary const& summary);

// summary.json, run_info.json, and plot data in `dir`
void write_outputs(RunSummary const& summary, std::filesystem::path const& dir);

// simulate + optional listmode + write_outputs to config.outputs.out_dir
RunSummary run(RunConfig const& config);

}  // namespace pairpol
