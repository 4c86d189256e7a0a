#pragma once

namespace dynamo {

inline constexpr const char* kToolVersion = "dynamopmu 1.0.0";

}  // namespace dynamo
