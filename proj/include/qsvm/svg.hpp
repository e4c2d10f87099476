#pragma once

#include <string>
#include <vector>

#include "qsvm/embedding.hpp"

namespace qsvm {

/// Atom positions with the allowed disk and each atom's index.
std::string register_svg(const Register& reg, const HardwareConstraints& constraints);

struct BarGroup {
  std::string label;
  /// One value per series; NaN leaves a gap (failed cell).
  std::vector<double> means;
  std::vector<double> stds;
};

/// Grouped bars with +-std whiskers on a [0, 1] axis.
std::string grouped_bar_svg(const std::string& title, const std::vector<std::string>& series,
                            const std::vector<BarGroup>& groups);

}  // namespace qsvm
