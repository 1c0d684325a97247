#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "occtune/disasm.hpp"
#include "occtune/error.hpp"

using namespace occtune;

namespace {

std::string read_data(const std::string& name) {
  std::ifstream in(std::string(OCCTUNE_TEST_DATA_DIR) + "/" + name, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Invariant;
}

// Random instruction built from a small grammar.
Instruction random_instruction(std::mt19937& rng) {
  static const char* kOps[] = {"FFMA", "FADD", "LD", "ST", "MOV", "BRA", "ISETP", "IMAD", "S2R",
                               "EXIT", "DMUL", "MUFU", "TEX", "SHL", "I2F"};
  static const char* kMods[] = {".E", ".FTZ", ".RN", ".GE", ".AND", ".HI", ".X", ".64", ".F64"};
  static const char* kSpecial[] = {"RZ", "PT", "SR_TID.X", "SR_CTAID.X", "`(.L_1)"};
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  Instruction ins;
  if (pick(2)) ins.address = static_cast<std::uint32_t>(pick(0x10000)) * 8;
  if (pick(4) == 0) ins.predicate = std::string(pick(2) ? "@P" : "@!P") + std::to_string(pick(7));
  ins.opcode = kOps[pick(15)];
  for (int m = pick(3); m > 0; --m) ins.modifiers.emplace_back(kMods[pick(9)]);
  for (int n = pick(5); n > 0; --n) {
    std::string text;
    switch (pick(6)) {
      case 0: text = (pick(5) == 0 ? "-R" : "R") + std::to_string(pick(255)); break;
      case 1: text = "P" + std::to_string(pick(7)); break;
      case 2: text = "c[0x" + std::to_string(pick(3)) + "][0x" + std::to_string(pick(90)) + "]"; break;
      case 3: text = "[R" + std::to_string(pick(255)) + "+0x" + std::to_string(pick(99)) + "]"; break;
      case 4: text = "0x" + std::to_string(pick(1000)); break;
      default: text = kSpecial[pick(5)]; break;
    }
    ins.operands.push_back({text, classify_operand(text)});
  }
  return ins;
}

}  // namespace

TEST(ResourceReport, ParsesKeplerStanza) {
  const auto kernels = parse_resource_report(read_data("atax_kepler.ptxas.txt"));
  ASSERT_EQ(kernels.size(), 1u);
  const auto& k = kernels[0];
  EXPECT_EQ(k.entry_name, "_Z4ataxPfS_");
  EXPECT_EQ(k.registers_per_thread, 27);
  EXPECT_EQ(k.static_shared_mem, 0);
  EXPECT_EQ(k.target_cc, (ComputeCapability{3, 5}));
  ASSERT_EQ(k.const_mem_banks.size(), 2u);
  EXPECT_EQ(k.const_mem_banks[0], (ConstBankUsage{0, 336}));
  EXPECT_EQ(k.const_mem_banks[1], (ConstBankUsage{2, 8}));
}

TEST(ResourceReport, MultipleKernelsInOrder) {
  const auto kernels = parse_resource_report(read_data("bicg_fermi.ptxas.txt"));
  ASSERT_EQ(kernels.size(), 2u);
  EXPECT_EQ(kernels[0].entry_name, "_Z12bicg_kernel1PfS_S_");
  EXPECT_EQ(kernels[0].registers_per_thread, 27);
  EXPECT_EQ(kernels[1].registers_per_thread, 30);
  EXPECT_EQ(kernels[1].static_shared_mem, 2048);
  EXPECT_EQ(kernels[1].stack_frame, 8);
  EXPECT_EQ(kernels[1].spill_stores, 4);
  EXPECT_EQ(kernels[1].spill_loads, 4);
  EXPECT_EQ(kernels[1].target_cc, (ComputeCapability{2, 0}));
}

TEST(ResourceReport, OneLineExamples) {
  const auto k = parse_resource_report(
      "ptxas info    : Compiling entry function 'k' for 'sm_52'\n"
      "ptxas info    : Used 30 registers, 1024 bytes smem, 352 bytes cmem[0]\n");
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k[0].registers_per_thread, 30);
  EXPECT_EQ(k[0].static_shared_mem, 1024);

  const auto bare = parse_resource_report(
      "ptxas info    : Compiling entry function 'k' for 'sm_35'\n"
      "ptxas info    : Used 0 registers\n");
  EXPECT_EQ(bare[0].registers_per_thread, 0);
  EXPECT_EQ(bare[0].static_shared_mem, 0);
}

TEST(ResourceReport, Errors) {
  EXPECT_EQ(kind_of([] { parse_resource_report(""); }), ErrorKind::EmptyInput);
  EXPECT_EQ(kind_of([] { parse_resource_report("ptxas info : 0 bytes gmem\n"); }),
            ErrorKind::EmptyInput);
  try {
    parse_resource_report(
        "ptxas info    : Compiling entry function 'k' for 'sm_35'\n"
        "ptxas info    : Used many registers\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_EQ(kind_of([] { parse_resource_report("ptxas info    : Used 4 registers\n"); }),
            ErrorKind::Parse);
}

TEST(Operand, Classification) {
  EXPECT_EQ(classify_operand("R0"), OperandKind::Register);
  EXPECT_EQ(classify_operand("-R12"), OperandKind::Register);
  EXPECT_EQ(classify_operand("|R3|"), OperandKind::Register);
  EXPECT_EQ(classify_operand("P0"), OperandKind::PredicateRegister);
  EXPECT_EQ(classify_operand("!P3"), OperandKind::PredicateRegister);
  EXPECT_EQ(classify_operand("c[0x0][0x44]"), OperandKind::ConstantBank);
  EXPECT_EQ(classify_operand("0x4"), OperandKind::Immediate);
  EXPECT_EQ(classify_operand("-1"), OperandKind::Immediate);
  EXPECT_EQ(classify_operand("0.5"), OperandKind::Immediate);
  EXPECT_EQ(classify_operand("[R6+0x10]"), OperandKind::Memory);
  EXPECT_EQ(classify_operand("RZ"), OperandKind::Special);
  EXPECT_EQ(classify_operand("SR_TID.X"), OperandKind::Special);
  EXPECT_EQ(classify_operand("PT"), OperandKind::Special);
}

TEST(Operand, RegisterReferences) {
  EXPECT_EQ((Operand{"R4", OperandKind::Register}).register_refs(), 1);
  EXPECT_EQ((Operand{"[R6+0x10]", OperandKind::Memory}).register_refs(), 1);
  EXPECT_EQ((Operand{"[R6+R7]", OperandKind::Memory}).register_refs(), 2);
  EXPECT_EQ((Operand{"RZ", OperandKind::Special}).register_refs(), 0);
  EXPECT_EQ((Operand{"SR_TID.X", OperandKind::Special}).register_refs(), 0);
  EXPECT_EQ((Operand{"c[0x0][0x44]", OperandKind::ConstantBank}).register_refs(), 0);
}

TEST(Instruction, ParsesFullLine) {
  const auto ins =
      parse_instruction("/*0048*/ @!P0 FFMA.FTZ R2, R8, -R12, R2 ;   /* 0xcc000800061c200a */");
  ASSERT_TRUE(ins.address);
  EXPECT_EQ(*ins.address, 0x48u);
  EXPECT_EQ(ins.predicate, "@!P0");
  EXPECT_EQ(ins.opcode, "FFMA");
  EXPECT_EQ(ins.modifiers, (std::vector<std::string>{".FTZ"}));
  ASSERT_EQ(ins.operands.size(), 4u);
  EXPECT_EQ(ins.operands[2].text, "-R12");
  EXPECT_EQ(ins.register_refs(), 4);
  EXPECT_TRUE(ins.has_register_operand());
  EXPECT_EQ(ins.to_string(), "/*0048*/ @!P0 FFMA.FTZ R2, R8, -R12, R2 ;");

  const auto exit = parse_instruction("EXIT;");
  EXPECT_FALSE(exit.address);
  EXPECT_TRUE(exit.operands.empty());
  EXPECT_FALSE(exit.has_register_operand());
}

TEST(Instruction, MemoryOperandWhitespaceIsRemoved) {
  const auto ins = parse_instruction("LD.E R3, [ R4 + 0x8 ] ;");
  ASSERT_EQ(ins.operands.size(), 2u);
  EXPECT_EQ(ins.operands[1].text, "[R4+0x8]");
  EXPECT_EQ(ins.operands[1].kind, OperandKind::Memory);
}

TEST(Instruction, Malformed) {
  EXPECT_THROW(parse_instruction("FFMA R1, R2, R3"), Error);
  EXPECT_THROW(parse_instruction("ffma R1 ;"), Error);
  EXPECT_THROW(parse_instruction("@Q1 FFMA R1 ;"), Error);
  EXPECT_THROW(parse_instruction("MOV R1, , R2 ;"), Error);
  EXPECT_THROW(parse_instruction(";"), Error);
}

TEST(Instruction, RoundTripsRandomInstructions) {
  std::mt19937 rng(7);
  for (int i = 0; i < 20000; ++i) {
    const auto ins = random_instruction(rng);
    const auto text = ins.to_string();
    const auto back = parse_instruction(text);
    ASSERT_EQ(back, ins) << text;
  }
}

TEST(Disassembly, CuobjdumpListing) {
  const auto fns = parse_disassembly(read_data("atax_kepler.sass"));
  ASSERT_EQ(fns.size(), 1u);
  EXPECT_EQ(fns[0].name, "_Z4ataxPfS_");
  EXPECT_EQ(fns[0].instructions.size(), 33u);
  EXPECT_EQ(*fns[0].instructions.front().address, 0x8u);
  EXPECT_EQ(fns[0].instructions.front().opcode, "MOV");
  EXPECT_EQ(fns[0].instructions.back().opcode, "BRA");
}

TEST(Disassembly, NvdisasmListingWithTwoFunctions) {
  const auto fns = parse_disassembly(read_data("bicg_fermi.sass"));
  ASSERT_EQ(fns.size(), 2u);
  EXPECT_EQ(fns[0].name, "_Z12bicg_kernel1PfS_S_");
  EXPECT_EQ(fns[1].name, "_Z12bicg_kernel2PfS_S_");
  EXPECT_EQ(fns[0].instructions.size(), 18u);
  EXPECT_EQ(fns[1].instructions.size(), 17u);
  EXPECT_EQ(fns[0].instructions[14].operands[0].text, "`(.L_1)");
}

TEST(Disassembly, DualIssueBraces) {
  const auto fns = parse_disassembly(
      "Function : k\n"
      "  { FADD R1, R2, R3 ;\n"
      "    LD R4, [R5] }\n"
      "  EXIT ;\n");
  ASSERT_EQ(fns[0].instructions.size(), 3u);
  EXPECT_EQ(fns[0].instructions[1].opcode, "LD");
}

TEST(Disassembly, CountsEveryInstructionLine) {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    std::string text = "\tcode for sm_35\n\t\tFunction : kernel_" + std::to_string(round) + "\n";
    const int n = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < n; ++i) {
      if (i % 9 == 4) text += ".L_" + std::to_string(i) + ":\n";
      if (i % 7 == 3) text += "                                  /* 0x08a0bc80c0a08cc0 */\n";
      text += "        " + random_instruction(rng).to_string() + "   /* 0x1234 */\n";
    }
    const auto fns = parse_disassembly(text);
    ASSERT_EQ(fns.size(), 1u);
    ASSERT_EQ(fns[0].instructions.size(), static_cast<std::size_t>(n));
  }
}

TEST(Disassembly, Errors) {
  EXPECT_EQ(kind_of([] { parse_disassembly(""); }), ErrorKind::EmptyInput);
  try {
    parse_disassembly("");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no functions found"), std::string::npos);
  }
  try {
    parse_disassembly("Function : k\n  MOV R1, R2 ;\n  FADD R1, R2, R3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_EQ(kind_of([] { parse_disassembly("MOV R1, R2 ;\nFunction : k\n"); }), ErrorKind::Parse);
}

TEST(Fuzz, ParsersOnlyRaiseLibraryErrors) {
  std::mt19937 rng(2024);
  const std::string alphabet =
      "RPc[]0123456789xabcdef@!.,;:{}/* \t\n-+|`_FMADLSTEXIBOUNCHGfunctio'";
  auto run = [](auto&& f) {
    try {
      f();
    } catch (const Error&) {
    }
  };
  for (int i = 0; i < 10000; ++i) {
    std::string s(std::uniform_int_distribution<int>(0, 200)(rng), '\0');
    const bool raw = i % 2 == 0;
    for (auto& c : s) {
      c = raw ? static_cast<char>(rng() & 0xff)
              : alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    }
    if (i % 3 == 0) s = "Function : f\n" + s;
    run([&] { parse_disassembly(s); });
    run([&] { parse_instruction(s); });
    run([&] { parse_resource_report("ptxas info : Compiling entry function 'k' for 'sm_35'\n" + s); });
  }
}
