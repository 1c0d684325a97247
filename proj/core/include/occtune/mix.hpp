#pragma once

// Instruction-mix characterization: opcode classification, category
// totals, throughput-derived CPI weights and the linear cost estimate
//   f(N) = N * (c_f*O_fl + c_m*O_mem + c_b*O_ctrl + c_r*O_reg).

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "occtune/arch.hpp"
#include "occtune/disasm.hpp"

namespace occtune {

enum class OpClass {
  FPIns32,
  FPIns64,
  CompMinMax,
  ShiftExtractShuffleSAD,
  Conv64,
  Conv32,
  LogSinCos,
  IntAdd32,
  TexIns,
  LdStIns,
  SurfIns,
  PredIns,
  CtrlIns,
  MoveIns,
  Regs,
  Unclassified,
};

inline constexpr std::size_t kOpClassCount = 16;

// The fifteen classes with a throughput entry (everything but Unclassified).
inline constexpr std::array<OpClass, 15> kTabulatedClasses{
    OpClass::FPIns32,  OpClass::FPIns64,  OpClass::CompMinMax, OpClass::ShiftExtractShuffleSAD,
    OpClass::Conv64,   OpClass::Conv32,   OpClass::LogSinCos,  OpClass::IntAdd32,
    OpClass::TexIns,   OpClass::LdStIns,  OpClass::SurfIns,    OpClass::PredIns,
    OpClass::CtrlIns,  OpClass::MoveIns,  OpClass::Regs,
};

enum class Category { Flops, Mem, Ctrl, Reg, None };

std::string_view to_string(OpClass cls);
std::string_view to_string(Category category);
std::optional<OpClass> op_class_from_string(std::string_view name);
Category category_of(OpClass cls);

constexpr std::size_t index_of(OpClass cls) { return static_cast<std::size_t>(cls); }

// Columns of the throughput table.
enum class SmKey { SM20, SM35, SM52, SM60 };

inline constexpr std::array<SmKey, 4> kSmKeys{SmKey::SM20, SmKey::SM35, SmKey::SM52, SmKey::SM60};

std::string_view to_string(SmKey key);
// 2.x -> SM20, 3.x -> SM35, 5.x -> SM52, 6.x -> SM60; Error{UnsupportedArch} otherwise.
SmKey sm_key_for(ComputeCapability cc);

// Instructions per cycle per SM, by class and architecture column.
class ThroughputTable {
 public:
  static const ThroughputTable& builtin();

  double ipc(OpClass cls, SmKey key) const;
  double cpi(OpClass cls, SmKey key) const { return 1.0 / ipc(cls, key); }

 private:
  ThroughputTable() = default;
  std::array<std::array<int, 4>, 15> ipc_{};
};

// 1 / IPC for (cls, cc). Throws Error{UnsupportedArch} for unmapped cc and
// Error{NotFound} for Unclassified.
double cpi(const ThroughputTable& table, OpClass cls, ComputeCapability cc);

// Opcode -> class lookup. Keys are "OPCODE" or "OPCODE.MOD"; a modifier-
// qualified key wins over the bare opcode (F2F.F64 -> Conv64, F2F -> Conv32).
class OpcodeClassifier {
 public:
  static const OpcodeClassifier& builtin();

  // Line format: `OPCODE[.MOD] -> ClassName`, '#' comments.
  static OpcodeClassifier parse(std::string_view text);
  static OpcodeClassifier load(const std::filesystem::path& path);

  // Entries of `overrides` replace or extend this table.
  OpcodeClassifier merged_with(const OpcodeClassifier& overrides) const;

  OpClass classify(const Instruction& ins) const;
  OpClass classify(std::string_view opcode, std::span<const std::string> modifiers = {}) const;

  const std::map<std::string, OpClass, std::less<>>& entries() const { return entries_; }
  std::string to_text() const;

  bool operator==(const OpcodeClassifier&) const = default;

 private:
  std::map<std::string, OpClass, std::less<>> entries_;
};

OpClass classify(const Instruction& ins);

struct InstructionMix {
  // Indexed by OpClass. counts[Regs] holds register-operand occurrences
  // (O_reg); counts[Unclassified] the opcodes with no table entry.
  std::array<std::int64_t, kOpClassCount> counts{};
  std::int64_t instructions = 0;
  std::map<std::string, std::int64_t> unclassified_opcodes;

  std::int64_t count(OpClass cls) const { return counts[index_of(cls)]; }
  std::int64_t& count(OpClass cls) { return counts[index_of(cls)]; }

  std::int64_t total(Category category) const;
  std::int64_t flops() const { return total(Category::Flops); }
  std::int64_t mem() const { return total(Category::Mem); }
  std::int64_t ctrl() const { return total(Category::Ctrl); }
  std::int64_t reg() const { return count(OpClass::Regs); }
  std::int64_t unclassified() const { return count(OpClass::Unclassified); }

  InstructionMix& operator+=(const InstructionMix& other);
  friend InstructionMix operator+(InstructionMix a, const InstructionMix& b) { return a += b; }
  bool operator==(const InstructionMix&) const = default;
};

// Guarded instructions also add one PredIns (CTRL) unless the opcode is
// itself a branch/predicate op.
InstructionMix aggregate(std::span<const Instruction> instructions,
                         const OpcodeClassifier& classifier = OpcodeClassifier::builtin());

struct CategoryWeights {
  double flops = 0;
  double mem = 0;
  double ctrl = 0;
  double reg = 0;

  double sum() const { return flops + mem + ctrl + reg; }
};

// c_m, c_b, c_r come from the LdStIns, CtrlIns and Regs rows; c_f is the
// count-weighted CPI over the FLOPS rows present, FPIns32 when there are none.
CategoryWeights coefficients(const InstructionMix& mix, ComputeCapability cc,
                             const ThroughputTable& table = ThroughputTable::builtin());

// Per-category weighted cycles c_x * O_x (unscaled).
CategoryWeights weighted_terms(const InstructionMix& mix, ComputeCapability cc,
                               const ThroughputTable& table = ThroughputTable::builtin());

// Relative cost for ranking variants; not a wall-clock prediction.
double cost_estimate(const InstructionMix& mix, ComputeCapability cc, double scale_n = 1.0,
                     const ThroughputTable& table = ThroughputTable::builtin());

// Same sum with every row weighted by its own CPI.
double row_weighted_cost(const InstructionMix& mix, ComputeCapability cc, double scale_n = 1.0,
                         const ThroughputTable& table = ThroughputTable::builtin());

// O_fl / O_mem; +inf when only FLOPS are present, 0 when both are zero.
double intensity(const InstructionMix& mix);

// Each category's share of the weighted cycles; all zero for an empty mix.
CategoryWeights pipeline_utilization(const InstructionMix& mix, ComputeCapability cc,
                                     const ThroughputTable& table = ThroughputTable::builtin());

}  // namespace occtune
