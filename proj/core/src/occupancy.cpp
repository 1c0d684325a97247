#include "occtune/occupancy.hpp"

#include <algorithm>

#include "occtune/error.hpp"
#include "text.hpp"

namespace occtune {

std::string_view to_string(Mode mode) {
  return mode == Mode::Corrected ? "corrected" : "paper-literal";
}

std::string_view to_string(Limiter limiter) {
  switch (limiter) {
    case Limiter::Warps: return "warps";
    case Limiter::Registers: return "registers";
    case Limiter::SharedMemory: return "shared-memory";
    case Limiter::Illegal: return "illegal";
  }
  return "illegal";
}

Mode mode_from_string(std::string_view name) {
  const auto lower = text::to_lower(text::trim(name));
  if (lower == "corrected") return Mode::Corrected;
  if (lower == "paper-literal" || lower == "paperliteral" || lower == "literal") {
    return Mode::PaperLiteral;
  }
  throw Error(ErrorKind::Parse, "unknown mode '" + std::string(name) +
                                    "' (expected corrected or paper-literal)");
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }
std::int64_t round_up(std::int64_t a, std::int64_t unit) { return ceil_div(a, unit) * unit; }

void check_threads(const ArchSpec& arch, int threads) {
  if (threads < 1 || threads > arch.max_threads_per_block) {
    throw Error(ErrorKind::IllegalLaunch,
                "threads per block " + std::to_string(threads) + " outside [1, " +
                    std::to_string(arch.max_threads_per_block) + "] for " + arch.name);
  }
}

}  // namespace

int warps_per_block(const ArchSpec& arch, int threads) {
  return static_cast<int>(ceil_div(threads, arch.warp_size));
}

std::int64_t limit_by_warps(const ArchSpec& arch, int threads) {
  check_threads(arch, threads);
  const auto wb = warps_per_block(arch, threads);
  return std::min<std::int64_t>(arch.max_blocks_per_mp, arch.max_warps_per_mp / wb);
}

std::int64_t limit_by_registers(const ArchSpec& arch, int threads, int regs, Mode mode) {
  check_threads(arch, threads);
  if (regs < 0) throw Error(ErrorKind::Invariant, "registers per thread must be >= 0", 0, "regs");
  if (regs > arch.max_regs_per_thread) return 0;
  if (regs == 0) return arch.max_blocks_per_mp;

  const std::int64_t wb = warps_per_block(arch, threads);
  if (mode == Mode::PaperLiteral) {
    const std::int64_t per_warp = static_cast<std::int64_t>(regs) * arch.warp_size;
    const std::int64_t r_sm = arch.register_alloc_granularity / per_warp;
    return ceil_div(r_sm, wb) * ceil_div(arch.register_file_size, arch.register_alloc_granularity);
  }
  const auto per_block = round_up(static_cast<std::int64_t>(regs) * arch.warp_size * wb,
                                  arch.register_alloc_granularity);
  return std::min<std::int64_t>(arch.max_blocks_per_mp, arch.register_file_size / per_block);
}

std::int64_t limit_by_smem(const ArchSpec& arch, std::int64_t smem, Mode mode) {
  if (smem < 0) throw Error(ErrorKind::Invariant, "shared memory must be >= 0", 0, "smem");
  if (smem > arch.shared_mem_per_block) return 0;
  if (smem == 0) return arch.max_blocks_per_mp;
  if (mode == Mode::PaperLiteral) return ceil_div(arch.shared_mem_per_block, smem);
  return std::min<std::int64_t>(arch.max_blocks_per_mp, arch.shared_mem_per_block / smem);
}

OccupancyResult occupancy(const ArchSpec& arch, const LaunchInput& in, Mode mode) {
  OccupancyResult r;
  r.mode = mode;
  r.threads_per_block = in.threads_per_block;
  r.limit_warps = limit_by_warps(arch, in.threads_per_block);
  r.warps_per_block = warps_per_block(arch, in.threads_per_block);
  r.limit_regs = limit_by_registers(arch, in.threads_per_block, in.regs_per_thread, mode);
  r.limit_smem = limit_by_smem(arch, in.shared_per_block, mode);

  r.active_blocks = std::min({r.limit_warps, r.limit_regs, r.limit_smem});
  if (r.active_blocks == 0) {
    r.limiter = Limiter::Illegal;
  } else if (r.active_blocks == r.limit_warps) {
    r.limiter = Limiter::Warps;
  } else if (r.active_blocks == r.limit_regs) {
    r.limiter = Limiter::Registers;
  } else {
    r.limiter = Limiter::SharedMemory;
  }
  r.active_warps = std::min<std::int64_t>(r.active_blocks * r.warps_per_block,
                                          arch.max_warps_per_mp);
  r.occupancy = static_cast<double>(r.active_warps) / arch.max_warps_per_mp;
  return r;
}

std::vector<int> thread_candidates(const ArchSpec& arch) {
  std::vector<int> out;
  for (int t = arch.warp_size; t <= arch.max_threads_per_block; t += arch.warp_size) {
    const auto wb = warps_per_block(arch, t);
    const auto blocks = std::min(arch.max_blocks_per_mp, arch.max_warps_per_mp / wb);
    if (blocks >= 1 && wb * blocks == arch.max_warps_per_mp) out.push_back(t);
  }
  return out;
}

SuggestionReport suggest(const ArchSpec& arch, int regs, std::int64_t smem, Mode mode) {
  SuggestionReport s;
  s.thread_candidates = thread_candidates(arch);
  s.registers_used = regs;
  s.shared_mem_used = smem;

  for (int t = arch.warp_size; t <= arch.max_threads_per_block; t += arch.warp_size) {
    const auto r = occupancy(arch, {t, regs, smem}, mode);
    if (r.active_warps > s.best_warps) {
      s.best_warps = r.active_warps;
      s.best_blocks = r.active_blocks;
      s.best_threads = t;
      s.best_occupancy = r.occupancy;
    }
  }
  if (s.best_warps == 0) return s;

  const auto fit = arch.register_file_size / (s.best_warps * arch.warp_size);
  s.register_headroom = static_cast<int>(std::max<std::int64_t>(0, fit - regs));
  s.smem_budget = arch.shared_mem_per_block / s.best_blocks;
  return s;
}

SuggestionReport suggest(const ArchSpec& arch, const KernelResources& res, Mode mode,
                         std::int64_t dynamic_shared) {
  return suggest(arch, res.registers_per_thread, res.static_shared_mem + dynamic_shared, mode);
}

}  // namespace occtune
