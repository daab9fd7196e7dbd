#pragma once

namespace lentp {
inline constexpr const char* version = "0.1.0";
}
