#pragma once

#include <string>

namespace pagecurve {

/// Shortest decimal that parses back to the same double ("nan", "inf", "-inf" otherwise).
std::string fmt_double(double v);

}  // namespace pagecurve
