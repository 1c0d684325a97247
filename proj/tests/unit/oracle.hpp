#pragma once

// Reference implementations used as test oracles. They are written
// independently of the library code paths they check.

#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "occtune/arch.hpp"
#include "occtune/pruner.hpp"

namespace oracle {

// Places blocks on one multiprocessor until the next one no longer fits.
// Registers are handed out in allocation-granularity units per block.
inline std::int64_t resident_blocks(const occtune::ArchSpec& a, int threads, int regs,
                                    std::int64_t smem) {
  if (threads < 1 || threads > a.max_threads_per_block) return 0;
  if (regs > a.max_regs_per_thread || smem > a.shared_mem_per_block) return 0;
  const int warps = (threads + a.warp_size - 1) / a.warp_size;
  std::int64_t reg_units_needed = 0;
  if (regs > 0) {
    const std::int64_t raw = static_cast<std::int64_t>(regs) * a.warp_size * warps;
    while (reg_units_needed * a.register_alloc_granularity < raw) ++reg_units_needed;
  }
  std::int64_t free_warps = a.max_warps_per_mp;
  std::int64_t free_threads = a.max_threads_per_mp;
  std::int64_t free_slots = a.max_blocks_per_mp;
  std::int64_t free_units = a.register_file_size / a.register_alloc_granularity;
  std::int64_t free_smem = a.shared_mem_per_block;
  std::int64_t placed = 0;
  for (;;) {
    if (free_slots < 1 || free_warps < warps || free_threads < warps * a.warp_size) break;
    if (free_units < reg_units_needed || free_smem < smem) break;
    --free_slots;
    free_warps -= warps;
    free_threads -= warps * a.warp_size;
    free_units -= reg_units_needed;
    free_smem -= smem;
    ++placed;
  }
  return placed;
}

inline double occupancy(const occtune::ArchSpec& a, int threads, int regs, std::int64_t smem) {
  const int warps = (threads + a.warp_size - 1) / a.warp_size;
  return static_cast<double>(resident_blocks(a, threads, regs, smem) * warps) /
         a.max_warps_per_mp;
}

// Block sizes for which the warp slots alone can be filled exactly.
inline std::vector<int> full_warp_block_sizes(const occtune::ArchSpec& a) {
  std::vector<int> out;
  for (int t = 1; t <= a.max_threads_per_block; ++t) {
    if (t % a.warp_size != 0) continue;
    if (resident_blocks(a, t, 0, 0) * (t / a.warp_size) == a.max_warps_per_mp) out.push_back(t);
  }
  return out;
}

using Tuple = std::tuple<int, int, int, int, std::string, int>;

// Nested loops over every parameter; SC is -1 when absent.
inline std::vector<Tuple> all_variants(const occtune::TuningSpace& s) {
  std::vector<Tuple> out;
  const std::vector<int> sc = s.sc.empty() ? std::vector<int>{-1} : s.sc;
  for (int tc : s.tc)
    for (int bc : s.bc)
      for (int uif : s.uif)
        for (int pl : s.pl)
          for (const auto& cf : s.cflags)
            for (int c : sc) out.emplace_back(tc, bc, uif, pl, cf, c);
  return out;
}

// Counts the variants whose TC survives, by filtering the full enumeration.
inline std::int64_t surviving(const occtune::TuningSpace& s, const std::set<int>& kept_tc) {
  std::int64_t n = 0;
  for (const auto& v : all_variants(s)) n += kept_tc.count(std::get<0>(v)) ? 1 : 0;
  return n;
}

}  // namespace oracle
