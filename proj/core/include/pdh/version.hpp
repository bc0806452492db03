// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

namespace pdh {

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace pdh
