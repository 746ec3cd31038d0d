#pragma once

namespace dream {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;

}  // namespace dream
