#pragma once

// Benchmark schemes. Local-only and full-offloading are restricted variants
// of the dual method and live in the solver (see solve_dual_scheme).

#include "wpmec/solver.hpp"

namespace wpmec {

SolveReport solve_local_only(const Instance& inst, const SolveOptions& opts = {});

/// Throws InfeasibleError when some task bits arrive in the last slot.
SolveReport solve_full_offloading(const Instance& inst, const SolveOptions& opts = {});

/// Slot-by-slot design without energy carried across slots: every slot
/// completes its own arrivals, bits offloaded in slot i are executed by the
/// AP in slot i + 1, and the transmit covariance of slot i only powers the
/// computation of slot i.
SolveReport solve_myopic(const Instance& inst, const SolveOptions& opts = {});

/// Users first minimize their own sum energy ignoring the beamforming
/// coupling, then the AP schedules its execution, then the beamforming SDP
/// meets the resulting demands.
SolveReport solve_separate(const Instance& inst, const SolveOptions& opts = {});

}  // namespace wpmec
