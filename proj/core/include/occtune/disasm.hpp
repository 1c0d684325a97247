#pragma once

// Readers for the two captured compiler artifacts: the verbose resource
// report printed by `ptxas -v` and the machine-code listing printed by
// `nvdisasm` / `cuobjdump -sass`.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "occtune/arch.hpp"

namespace occtune {

struct ConstBankUsage {
  int bank = 0;
  std::int64_t bytes = 0;
  bool operator==(const ConstBankUsage&) const = default;
};

struct KernelResources {
  std::string entry_name;
  int registers_per_thread = 0;
  std::int64_t static_shared_mem = 0;  // bytes
  std::vector<ConstBankUsage> const_mem_banks;
  std::int64_t stack_frame = 0;
  std::int64_t spill_stores = 0;
  std::int64_t spill_loads = 0;
  ComputeCapability target_cc;

  bool operator==(const KernelResources&) const = default;
};

// One KernelResources per "Compiling entry function" stanza, in input order.
// Throws Error{EmptyInput} when no stanza is present and Error{Parse} (with
// line) on a malformed "Used N registers" clause.
std::vector<KernelResources> parse_resource_report(std::string_view text);

enum class OperandKind { Register, PredicateRegister, ConstantBank, Immediate, Memory, Special };

std::string_view to_string(OperandKind kind);

// Tag is a pure function of the token's spelling.
OperandKind classify_operand(std::string_view token);

struct Operand {
  std::string text;
  OperandKind kind = OperandKind::Special;

  // General-purpose registers (R<n>) referenced anywhere in the token,
  // including inside memory brackets. RZ is not counted.
  int register_refs() const;

  bool operator==(const Operand&) const = default;
};

struct Instruction {
  std::optional<std::uint32_t> address;
  std::optional<std::string> predicate;  // "@P0", "@!P1"
  std::string opcode;                    // "FFMA"
  std::vector<std::string> modifiers;    // {".FTZ", ".RN"}
  std::vector<Operand> operands;

  int register_refs() const;
  bool has_register_operand() const;

  // Normalized one-line form, e.g. "/*0050*/ @P0 FFMA.FTZ R4, R2, R3, R4 ;".
  // Parsing it back yields an equal Instruction.
  std::string to_string() const;

  bool operator==(const Instruction&) const = default;
};

struct FunctionListing {
  std::string name;
  std::vector<Instruction> instructions;
};

// Parses a single instruction line (address and trailing encoding comment
// optional). Throws Error{Parse}.
Instruction parse_instruction(std::string_view line);

// Functions in file order. Blank lines, directives, labels, comments and
// dual-issue braces are skipped. Throws Error{Parse} with the line number
// for an instruction missing its terminator, Error{EmptyInput} when no
// function header is found.
std::vector<FunctionListing> parse_disassembly(std::string_view text);

}  // namespace occtune
