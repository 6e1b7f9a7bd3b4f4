#pragma once

#include <string>
#include <vector>

#include "metacog/trust.hpp"

namespace metacog {

// Control-dynamics chart: VPES, tau and the learning-rate scale against the
// iteration index, as three vertically stacked panels sharing the x axis.
// Pure string generation, no timestamps, so identical inputs give identical
// files.
std::string dynamics_chart_svg(const std::vector<ControllerOutput>& outputs,
                               const std::string& title);

// Grouped bar chart of per-seed values (one group per variant).
std::string grouped_bar_chart_svg(const std::vector<std::string>& group_names,
                                  const std::vector<std::vector<double>>& group_values,
                                  const std::string& title);

}  // namespace metacog
