#pragma once

#include <filesystem>

#include "spinring/state.hpp"

namespace spinring {

// Binary state files: fixed little-endian layout with a header carrying
// (N, J, Delta, sector tag, phase-convention flag, format version) followed
// by the raw re/im amplitude pairs. Round-trips are bit-exact.

struct StateFileInfo {
    // true when the file declares the deterministic global-phase convention
    // (largest-magnitude amplitude real positive)
    bool phase_fixed = false;
};

void save_state(const StateVector& psi, const std::filesystem::path& path,
                bool phase_fixed = false);

StateVector load_state(const std::filesystem::path& path, StateFileInfo* info = nullptr);

}  // namespace spinring
