#pragma once

#include <string>
#include <vector>

#include "modnav/harness/experiment.hpp"

namespace modnav::harness {

// Learning-curve SVGs rendered from the metrics CSVs: `returns.svg` with a
// seed-mean line and +-1 std band per architecture, and
// `insect_entropies.svg` with the mode/module entropy curves. Output is a
// pure function of the CSV contents. Returns the paths written.
std::vector<std::string> emit_plots(const std::string& runs_root,
                                    const std::string& output_dir);

}  // namespace modnav::harness
