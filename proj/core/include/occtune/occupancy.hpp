#pragma once

// Theoretical occupancy: the number of resident blocks per multiprocessor is
// the minimum of the warp, register and shared-memory limits, and occupancy
// is the resulting active warps over the architecture's warp capacity.

#include <cstdint>
#include <string_view>
#include <vector>

#include "occtune/arch.hpp"
#include "occtune/disasm.hpp"

namespace occtune {

// Corrected models per-block register allocation granularity and floors the
// shared-memory quotient. PaperLiteral evaluates the register and shared-
// memory formulas in their uncorrected closed form; it is kept as a
// regression reference.
enum class Mode { Corrected, PaperLiteral };

enum class Limiter { Warps, Registers, SharedMemory, Illegal };

std::string_view to_string(Mode mode);
std::string_view to_string(Limiter limiter);
Mode mode_from_string(std::string_view name);  // "corrected" | "paper-literal"

struct LaunchInput {
  int threads_per_block = 0;
  int regs_per_thread = 0;              // 0 = unspecified
  std::int64_t shared_per_block = 0;    // bytes, 0 = unspecified
};

struct OccupancyResult {
  int threads_per_block = 0;
  int warps_per_block = 0;
  std::int64_t limit_warps = 0;
  std::int64_t limit_regs = 0;
  std::int64_t limit_smem = 0;
  std::int64_t active_blocks = 0;
  std::int64_t active_warps = 0;
  double occupancy = 0;
  Limiter limiter = Limiter::Illegal;
  Mode mode = Mode::Corrected;
};

// ceil(threads / warp_size)
int warps_per_block(const ArchSpec& arch, int threads);

// Throws Error{IllegalLaunch} unless 1 <= threads <= max_threads_per_block.
std::int64_t limit_by_warps(const ArchSpec& arch, int threads);
std::int64_t limit_by_registers(const ArchSpec& arch, int threads, int regs_per_thread,
                                Mode mode = Mode::Corrected);
std::int64_t limit_by_smem(const ArchSpec& arch, std::int64_t shared_per_block,
                           Mode mode = Mode::Corrected);

// Limiter ties resolve Warps > Registers > SharedMemory. A zero limit gives
// limiter Illegal and occupancy 0.
OccupancyResult occupancy(const ArchSpec& arch, const LaunchInput& input,
                          Mode mode = Mode::Corrected);

// Warp-multiple block sizes whose warp limit alone fills every warp slot.
// Depends only on the architecture.
std::vector<int> thread_candidates(const ArchSpec& arch);

struct SuggestionReport {
  std::vector<int> thread_candidates;   // T*
  int registers_used = 0;               // Ru
  int register_headroom = 0;            // R*
  std::int64_t shared_mem_used = 0;     // Su
  std::int64_t smem_budget = 0;         // S*, bytes per block
  double best_occupancy = 0;            // occ*
  int best_threads = 0;                 // block size reaching occ* (smallest on ties)
  std::int64_t best_blocks = 0;
  std::int64_t best_warps = 0;
};

// occ* is the best occupancy over every warp-multiple block size; R* is the
// per-thread register slack at that warp count and S* the per-block shared
// memory that still fits the same number of blocks. A kernel that cannot
// launch at all reports occ* = 0 with zero budgets.
SuggestionReport suggest(const ArchSpec& arch, int regs_per_thread, std::int64_t shared_per_block,
                         Mode mode = Mode::Corrected);
SuggestionReport suggest(const ArchSpec& arch, const KernelResources& resources,
                         Mode mode = Mode::Corrected, std::int64_t dynamic_shared = 0);

}  // namespace occtune
