#pragma once

namespace spinring {

// Recorded in run manifests and state-file sidecars; bump on any change
// that can alter numerical output.
inline constexpr char kVersionString[] = "1.0.0";

}  // namespace spinring
