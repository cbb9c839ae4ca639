#pragma once

namespace sbising {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sbising
