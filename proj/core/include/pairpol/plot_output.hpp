#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pairpol/run.hpp"

namespace pairpol {

/*!
 * Write CSV tables and SVG quick-looks for every selection.
 *
 * Per selection `<s>`: hist_<s>.csv, hist_<s>_folded.csv, fit_<s>.csv
 * (1 deg grid), corr_<s>.csv, s_<s>.csv, s_fit_<s>.csv, hist_<s>.svg, and
 * s_<s>.svg. Returns the written file names.
 */
std::vector<std::string> emit_plot_data(RunSummary const& summary,
                                        std::filesystem::path const& dir);

}  // namespace pairpol
