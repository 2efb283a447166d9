#pragma once

namespace glayers {
inline constexpr const char* kVersion = "0.1.0";
}
