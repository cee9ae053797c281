#pragma once

#include <string>

namespace occlab {

/// Shortest-stable text form used for every float the tool writes:
/// 17 significant digits, so parsing gives back the identical double.
std::string format_double(double x);

}  // namespace occlab
