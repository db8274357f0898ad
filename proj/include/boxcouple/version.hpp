#pragma once

namespace boxcouple {

#ifndef BOXCOUPLE_VERSION
#define BOXCOUPLE_VERSION "0.0.0"
#endif
#ifndef BOXCOUPLE_GIT_REV
#define BOXCOUPLE_GIT_REV "unknown"
#endif

inline constexpr const char* kVersion = BOXCOUPLE_VERSION;
inline constexpr const char* kGitRevision = BOXCOUPLE_GIT_REV;

}  // namespace boxcouple
