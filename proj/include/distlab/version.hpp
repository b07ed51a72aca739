#pragma once

namespace distlab {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace distlab
