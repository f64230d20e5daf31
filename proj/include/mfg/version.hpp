#pragma once

namespace mfg {

inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace mfg
