#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairpol/apparatus.hpp"
#include "pairpol/pair_models.hpp"

namespace pairpol {

struct OutputConfig
{
    std::string out_dir{"out"};
    bool listmode{false};

    bool operator==(OutputConfig const&) const = default;
};

//! Everything needed to reproduce one simulation run
struct RunConfig
{
    PairModel model{PairModel::entangled()};  //!< pairs without GAGG interaction
    PairModel decoherent_model{PairModel::mixed_hm()};
    PairModel backscatter_model{PairModel::depolarized(0.2)};
    ApparatusConfig apparatus{};
    std::uint64_t n_events{1'000'000};  //!< attempted events
    std::uint64_t seed{1};
    int workers{1};
    OutputConfig outputs{};
    std::optional<std::string> preset;
    std::vector<std::string> selections{"entangled"};

    // Throws ConfigError naming the violated invariant
    void validate() const;
    ModelSet models() const;

    bool operator==(RunConfig const&) const = default;
};

// Names accepted by apply_preset
std::vector<std::string> const& preset_names();

// Overwrite models, apparatus, and selections; records the preset name
void apply_preset(RunConfig& config, std::string_view name);

/*!
 * Parse a configuration document.
 *
 * Accepts TOML-style text (flat `key = value` lines plus `[apparatus]`,
 * `[apparatus.bands]`, and `[outputs]` tables) or, when the first
 * non-blank character is `{`, the equivalent JSON object. Unknown keys are
 * errors. A `preset` key is applied after all other keys. The result is
 * validated.
 */
RunConfig parse_config(std::string_view text);

RunConfig load_config(std::filesystem::path const& path);

// TOML-style text that parse_config maps back to an equal RunConfig
std::string emit_config(RunConfig const& config);

// The same document as a JSON object (also accepted by parse_config)
std::string emit_config_json(RunConfig const& config);

// Shortest decimal text that reads back to the same double
std::string format_double(double value);

}  // namespace pairpol
