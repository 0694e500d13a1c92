#pragma once

namespace holsim {

inline constexpr const char* kToolName = "holsim";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kManifestVersion = 1;

}  // namespace holsim
