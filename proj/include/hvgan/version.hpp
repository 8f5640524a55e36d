#pragma once

namespace hvgan {
inline constexpr const char* kVersion = "0.1.0";
}
