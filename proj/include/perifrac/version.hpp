#pragma once

namespace perifrac {

inline constexpr const char* version_string = "perifrac 0.1.0";

}
