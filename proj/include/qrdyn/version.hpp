#pragma once

#define QRDYN_VERSION_MAJOR 0
#define QRDYN_VERSION_MINOR 3
#define QRDYN_VERSION_PATCH 0
#define QRDYN_VERSION "0.3.0"

namespace qrdyn {
inline constexpr const char* kVersion = QRDYN_VERSION;
}
