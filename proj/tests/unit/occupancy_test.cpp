#include <gtest/gtest.h>

#include "occtune/disasm.hpp"
#include "occtune/error.hpp"
#include "occtune/occupancy.hpp"
#include "oracle.hpp"

using namespace occtune;

namespace {

const ArchSpec kFermi = builtin_arch(Family::Fermi);
const ArchSpec kKepler = builtin_arch(Family::Kepler);
const ArchSpec kMaxwell = builtin_arch(Family::Maxwell);
const ArchSpec kPascal = builtin_arch(Family::Pascal);

}  // namespace

TEST(Occupancy, WarpLimit) {
  EXPECT_EQ(limit_by_warps(kKepler, 128), 16);
  EXPECT_EQ(limit_by_warps(kKepler, 1024), 2);
  EXPECT_EQ(limit_by_warps(kFermi, 192), 8);
  EXPECT_EQ(limit_by_warps(kFermi, 33), 8);
  EXPECT_EQ(limit_by_warps(kFermi, 1024), 1);
  EXPECT_THROW(limit_by_warps(kKepler, 0), Error);
  EXPECT_THROW(limit_by_warps(kKepler, 2048), Error);
}

TEST(Occupancy, RegisterLimitCorrected) {
  EXPECT_EQ(limit_by_registers(kKepler, 128, 27), 16);
  EXPECT_EQ(limit_by_registers(kFermi, 192, 27), 6);
  EXPECT_EQ(limit_by_registers(kFermi, 256, 21), 6);
  EXPECT_EQ(limit_by_registers(kFermi, 544, 30), 2);
  EXPECT_EQ(limit_by_registers(kKepler, 128, 0), 16);
  EXPECT_EQ(limit_by_registers(kFermi, 128, 64), 0);
  EXPECT_EQ(limit_by_registers(kKepler, 128, 255), 2);
}

TEST(Occupancy, RegisterLimitPaperLiteral) {
  // The uncorrected formula floors R_B / (R * warp) to zero for any R above 8
  // on Kepler; this pin keeps that behaviour from changing silently.
  EXPECT_EQ(limit_by_registers(kKepler, 128, 27, Mode::PaperLiteral), 0);
  EXPECT_EQ(limit_by_registers(kKepler, 128, 8, Mode::PaperLiteral), 256);
  EXPECT_EQ(limit_by_registers(kFermi, 32, 2, Mode::PaperLiteral), 512);
}

TEST(Occupancy, SharedMemoryLimit) {
  EXPECT_EQ(limit_by_smem(kKepler, 0), 16);
  EXPECT_EQ(limit_by_smem(kKepler, 3072), 16);
  EXPECT_EQ(limit_by_smem(kKepler, 5000), 9);
  EXPECT_EQ(limit_by_smem(kKepler, 49152), 1);
  EXPECT_EQ(limit_by_smem(kKepler, 49153), 0);
  EXPECT_EQ(limit_by_smem(kKepler, 5000, Mode::PaperLiteral), 10);
  EXPECT_EQ(limit_by_smem(kKepler, 100, Mode::PaperLiteral), 492);
  EXPECT_THROW(limit_by_smem(kKepler, -1), Error);
}

TEST(Occupancy, ExamplesAndLimiters) {
  auto r = occupancy(kKepler, {128, 27, 0});
  EXPECT_DOUBLE_EQ(r.occupancy, 1.0);
  EXPECT_EQ(r.limiter, Limiter::Warps);
  EXPECT_EQ(r.active_warps, 64);

  r = occupancy(kFermi, {192, 27, 0});
  EXPECT_DOUBLE_EQ(r.occupancy, 0.75);
  EXPECT_EQ(r.limiter, Limiter::Registers);

  r = occupancy(kKepler, {256, 16, 12288});
  EXPECT_EQ(r.limiter, Limiter::SharedMemory);
  EXPECT_EQ(r.active_blocks, 4);

  r = occupancy(kFermi, {128, 64, 0});
  EXPECT_EQ(r.limiter, Limiter::Illegal);
  EXPECT_DOUBLE_EQ(r.occupancy, 0.0);

  EXPECT_THROW(occupancy(kMaxwell, {2048, 0, 0}), Error);
}

TEST(Occupancy, MatchesBlockPlacementOracle) {
  for (const auto& arch : builtin_archs()) {
    for (int t = 1; t <= arch.max_threads_per_block; t += 31) {
      for (int r = 0; r <= 255; r += 7) {
        for (std::int64_t s = 0; s <= 49152 + 1024; s += 3000) {
          const auto got = occupancy(arch, {t, r, s});
          ASSERT_EQ(got.active_blocks, oracle::resident_blocks(arch, t, r, s))
              << arch.name << " T=" << t << " R=" << r << " S=" << s;
          ASSERT_DOUBLE_EQ(got.occupancy, oracle::occupancy(arch, t, r, s));
        }
      }
    }
  }
}

TEST(Occupancy, LimitsAreMonotone) {
  for (const auto& arch : builtin_archs()) {
    for (int t = 32; t <= 1024; t += 32) {
      for (auto mode : {Mode::Corrected, Mode::PaperLiteral}) {
        // The literal register equation jumps from "unspecified" (R = 0) to a
        // finite count at R = 1, so monotonicity is checked from R = 1 there.
        const int r0 = mode == Mode::Corrected ? 0 : 1;
        for (int r = r0; r < 255; ++r) {
          ASSERT_GE(limit_by_registers(arch, t, r, mode), limit_by_registers(arch, t, r + 1, mode));
        }
      }
      if (t < 1024) ASSERT_GE(limit_by_warps(arch, t), limit_by_warps(arch, t + 32));
    }
    for (auto mode : {Mode::Corrected, Mode::PaperLiteral}) {
      const std::int64_t s0 = mode == Mode::Corrected ? 0 : 1;
      for (std::int64_t s = s0; s < 50000; s += 97) {
        ASSERT_GE(limit_by_smem(arch, s, mode), limit_by_smem(arch, s + 97, mode));
      }
    }
  }
}

TEST(ThreadCandidates, MatchOracle) {
  for (const auto& arch : builtin_archs()) {
    EXPECT_EQ(thread_candidates(arch), oracle::full_warp_block_sizes(arch)) << arch.name;
  }
  EXPECT_EQ(thread_candidates(kFermi), (std::vector<int>{192, 256, 384, 512, 768}));
  EXPECT_EQ(thread_candidates(kKepler), (std::vector<int>{128, 256, 512, 1024}));
  EXPECT_EQ(thread_candidates(kMaxwell), (std::vector<int>{64, 128, 256, 512, 1024}));
  EXPECT_EQ(thread_candidates(kPascal), (std::vector<int>{64, 128, 256, 512, 1024}));
}

TEST(Suggest, ReferenceRows) {
  struct Row {
    const ArchSpec* arch;
    int regs;
    double occ;
    int headroom;
    std::int64_t smem;
  };
  const Row rows[] = {
      {&kFermi, 21, 1.0, 0, 6144},    {&kKepler, 27, 1.0, 5, 3072},
      {&kMaxwell, 30, 1.0, 2, 1536},  {&kKepler, 31, 1.0, 1, 3072},
      {&kKepler, 28, 1.0, 4, 3072},   {&kFermi, 27, 0.75, 1, 8192},
      {&kPascal, 30, 1.0, 2, 1536},
  };
  for (const auto& row : rows) {
    const auto s = suggest(*row.arch, row.regs, 0);
    EXPECT_DOUBLE_EQ(s.best_occupancy, row.occ) << row.arch->name << " R=" << row.regs;
    EXPECT_EQ(s.register_headroom, row.headroom) << row.arch->name << " R=" << row.regs;
    EXPECT_EQ(s.smem_budget, row.smem) << row.arch->name << " R=" << row.regs;
  }
  const auto f30 = suggest(kFermi, 30, 0);
  EXPECT_NEAR(f30.best_occupancy, 0.71, 0.01);
  EXPECT_EQ(f30.best_threads, 544);
  EXPECT_EQ(f30.smem_budget, 24576);
}

TEST(Suggest, BestOccupancyIsTheMaximumOverBlockSizes) {
  for (const auto& arch : builtin_archs()) {
    for (int r : {0, 16, 27, 33, 48, 63, 90, 128, 200}) {
      for (std::int64_t s : {0, 1000, 4096, 20000}) {
        const auto sug = suggest(arch, r, s);
        double best = 0;
        int best_t = 0;
        for (int t = 32; t <= arch.max_threads_per_block; t += 32) {
          const double o = oracle::occupancy(arch, t, r, s);
          if (o > best) {
            best = o;
            best_t = t;
          }
        }
        EXPECT_DOUBLE_EQ(sug.best_occupancy, best) << arch.name << " R=" << r << " S=" << s;
        EXPECT_EQ(sug.best_threads, best_t);
      }
    }
  }
}

TEST(Suggest, UnlaunchableKernel) {
  const auto s = suggest(kFermi, 64, 0);
  EXPECT_DOUBLE_EQ(s.best_occupancy, 0.0);
  EXPECT_EQ(s.register_headroom, 0);
  EXPECT_EQ(s.smem_budget, 0);
  EXPECT_EQ(s.thread_candidates.size(), 5u);
}

TEST(Suggest, ResourcesAddDynamicSharedMemory) {
  KernelResources res;
  res.registers_per_thread = 16;
  res.static_shared_mem = 4096;
  const auto a = suggest(kKepler, res, Mode::Corrected, 8192);
  const auto b = suggest(kKepler, 16, 12288);
  EXPECT_EQ(a.shared_mem_used, 12288);
  EXPECT_EQ(a.best_blocks, b.best_blocks);
  EXPECT_DOUBLE_EQ(a.best_occupancy, b.best_occupancy);
}

TEST(Mode, Names) {
  EXPECT_EQ(mode_from_string("corrected"), Mode::Corrected);
  EXPECT_EQ(mode_from_string("Paper-Literal"), Mode::PaperLiteral);
  EXPECT_THROW(mode_from_string("exact"), Error);
  EXPECT_EQ(to_string(Limiter::SharedMemory), "shared-memory");
}
