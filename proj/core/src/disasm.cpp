#include "occtune/disasm.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <regex>

#include "occtune/error.hpp"
#include "text.hpp"

namespace occtune {

// ---------------------------------------------------------------------------
// ptxas -v resource report

namespace {

// Text after the "ptxas info :" style prefix, or the whole line.
std::string_view message_part(std::string_view line) {
  auto t = text::trim(line);
  if (text::starts_with_ci(t, "ptxas")) {
    const auto colon = t.find(':');
    if (colon != std::string_view::npos) t = text::trim(t.substr(colon + 1));
  }
  return t;
}

std::vector<std::string_view> split_clauses(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(text::trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

ComputeCapability cc_from_target(std::string_view target, int line_no) {
  // "sm_90a" style suffixes carry no occupancy meaning here.
  while (!target.empty() && std::isalpha(static_cast<unsigned char>(target.back())) &&
         target.back() != '_') {
    target.remove_suffix(1);
  }
  try {
    return ComputeCapability::parse(target);
  } catch (const Error&) {
    throw Error(ErrorKind::Parse, "unrecognized target '" + std::string(target) + "'", line_no);
  }
}

}  // namespace

std::vector<KernelResources> parse_resource_report(std::string_view report) {
  static const std::regex kEntry(R"(Compiling entry function '([^']+)' for '([^']+)')");
  static const std::regex kProps(R"(Function properties for (\S+))");
  static const std::regex kFrame(
      R"((\d+) bytes stack frame, (\d+) bytes spill stores, (\d+) bytes spill loads)");
  static const std::regex kRegs(R"(Used\s+(\d+)\s+registers)");
  static const std::regex kBytes(R"((\d+)(?:\+(\d+))?\s+bytes\s+(smem|cmem\[(\d+)\]|\w+))");

  std::vector<KernelResources> kernels;
  std::string properties_for;
  int line_no = 0;

  for (const auto raw : text::lines(report)) {
    ++line_no;
    const auto msg = message_part(raw);
    if (msg.empty()) continue;
    const std::string line(msg);
    std::smatch m;

    if (std::regex_search(line, m, kEntry)) {
      KernelResources k;
      k.entry_name = m[1].str();
      k.target_cc = cc_from_target(m[2].str(), line_no);
      kernels.push_back(std::move(k));
      properties_for.clear();
      continue;
    }
    if (std::regex_search(line, m, kProps)) {
      properties_for = m[1].str();
      continue;
    }
    if (std::regex_search(line, m, kFrame)) {
      for (auto& k : kernels) {
        if (k.entry_name != properties_for) continue;
        k.stack_frame = std::stoll(m[1].str());
        k.spill_stores = std::stoll(m[2].str());
        k.spill_loads = std::stoll(m[3].str());
      }
      continue;
    }
    if (line.rfind("Used", 0) != 0) continue;

    if (kernels.empty()) {
      throw Error(ErrorKind::Parse, "resource usage reported before any entry function", line_no);
    }
    const auto clauses = split_clauses(msg);
    const std::string first(clauses.front());
    if (!std::regex_match(first, m, kRegs)) {
      throw Error(ErrorKind::Parse, "malformed register clause '" + first + "'", line_no);
    }
    auto& k = kernels.back();
    const auto regs = text::parse_int(m[1].str());
    if (!regs || *regs > std::numeric_limits<int>::max()) {
      throw Error(ErrorKind::Parse, "register count out of range", line_no);
    }
    k.registers_per_thread = static_cast<int>(*regs);
    k.static_shared_mem = 0;
    k.const_mem_banks.clear();
    for (std::size_t i = 1; i < clauses.size(); ++i) {
      const std::string clause(clauses[i]);
      if (!std::regex_match(clause, m, kBytes)) continue;  // e.g. "used 1 barriers"
      const auto a = text::parse_int(m[1].str());
      const auto b = m[2].matched ? text::parse_int(m[2].str()) : std::optional<std::int64_t>{0};
      if (!a || !b) throw Error(ErrorKind::Parse, "byte count out of range", line_no);
      const auto bytes = *a + *b;
      if (m[3].str() == "smem") {
        k.static_shared_mem = bytes;
      } else if (m[4].matched) {
        k.const_mem_banks.push_back({static_cast<int>(std::stol(m[4].str())), bytes});
      }
    }
  }

  if (kernels.empty()) {
    throw Error(ErrorKind::EmptyInput, "no 'Compiling entry function' stanza found");
  }
  return kernels;
}

// ---------------------------------------------------------------------------
// Operands and instructions

std::string_view to_string(OperandKind kind) {
  switch (kind) {
    case OperandKind::Register: return "register";
    case OperandKind::PredicateRegister: return "predicate-register";
    case OperandKind::ConstantBank: return "constant-bank";
    case OperandKind::Immediate: return "immediate";
    case OperandKind::Memory: return "memory";
    case OperandKind::Special: return "special";
  }
  return "special";
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_word(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// R<digits> not preceded by a word character and not followed by one
// other than a '.' modifier.
bool register_at(std::string_view s, std::size_t i) {
  if (s[i] != 'R') return false;
  if (i > 0 && is_word(s[i - 1])) return false;
  std::size_t j = i + 1;
  if (j >= s.size() || !is_digit(s[j])) return false;
  while (j < s.size() && is_digit(s[j])) ++j;
  return j == s.size() || !is_word(s[j]);
}

std::string_view strip_operand_decorations(std::string_view s) {
  while (!s.empty() && (s.front() == '-' || s.front() == '!' || s.front() == '~' ||
                        s.front() == '|')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && s.back() == '|') s.remove_suffix(1);
  return s;
}

bool valid_opcode_root(std::string_view s) {
  if (s.empty() || !is_upper(s.front())) return false;
  for (char c : s) {
    if (!is_upper(c) && !is_digit(c) && c != '_') return false;
  }
  return true;
}

bool valid_modifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_word(c)) return false;
  }
  return true;
}

// "FFMA.FTZ.RN" -> root + modifiers; false when malformed.
bool split_mnemonic(std::string_view token, std::string& root, std::vector<std::string>& mods) {
  const auto dot = token.find('.');
  root = std::string(token.substr(0, dot));
  if (!valid_opcode_root(root)) return false;
  mods.clear();
  if (dot == std::string_view::npos) return true;
  auto rest = token.substr(dot + 1);
  while (true) {
    const auto next = rest.find('.');
    const auto mod = rest.substr(0, next);
    if (!valid_modifier(mod)) return false;
    mods.push_back("." + std::string(mod));
    if (next == std::string_view::npos) break;
    rest.remove_prefix(next + 1);
  }
  return true;
}

bool valid_predicate(std::string_view s) {
  if (s.size() < 3 || s[0] != '@') return false;
  s.remove_prefix(1);
  if (s.front() == '!') s.remove_prefix(1);
  if (s == "PT") return true;
  if (s.size() < 2 || s[0] != 'P') return false;
  for (char c : s.substr(1)) {
    if (!is_digit(c)) return false;
  }
  return true;
}

bool parse_hex_address(std::string_view s, std::uint32_t& out) {
  if (s.empty() || s.size() > 8) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string squeeze(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

// Instruction text with address, terminator and comments already removed.
Instruction parse_body(std::string_view body, std::optional<std::uint32_t> address, int line_no) {
  Instruction ins;
  ins.address = address;
  auto rest = text::trim(body);

  const auto next_token = [&rest]() {
    const auto end = rest.find_first_of(" \t");
    const auto token = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view{} : text::trim(rest.substr(end));
    return token;
  };

  auto token = next_token();
  if (!token.empty() && token.front() == '@') {
    if (!valid_predicate(token)) {
      throw Error(ErrorKind::Parse, "malformed predicate guard '" + std::string(token) + "'",
                  line_no);
    }
    ins.predicate = std::string(token);
    token = next_token();
  }
  if (token.empty()) throw Error(ErrorKind::Parse, "missing opcode", line_no);
  if (!split_mnemonic(token, ins.opcode, ins.modifiers)) {
    throw Error(ErrorKind::Parse, "malformed opcode '" + std::string(token) + "'", line_no);
  }

  if (rest.empty()) return ins;
  while (true) {
    const auto comma = rest.find(',');
    const auto piece = squeeze(rest.substr(0, comma));
    if (piece.empty()) throw Error(ErrorKind::Parse, "empty operand", line_no);
    const auto kind = classify_operand(piece);
    ins.operands.push_back({piece, kind});
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ins;
}

struct CleanLine {
  std::optional<std::uint32_t> address;
  std::string body;
};

// Drops /* */ comments, capturing a leading "/*hex*/" as the address.
CleanLine strip_comments(std::string_view line) {
  CleanLine out;
  bool leading = true;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line.compare(i, 2, "/*") == 0) {
      const auto close = line.find("*/", i + 2);
      const auto inner = line.substr(i + 2, close == std::string_view::npos
                                                ? std::string_view::npos
                                                : close - i - 2);
      std::uint32_t addr = 0;
      if (leading && !out.address && parse_hex_address(inner, addr)) out.address = addr;
      if (close == std::string_view::npos) break;
      i = close + 2;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(line[i]))) leading = false;
    out.body += line[i];
    ++i;
  }
  return out;
}

bool looks_like_mnemonic(std::string_view t) {
  const auto end = t.find_first_of(" \t;");
  std::string root;
  std::vector<std::string> mods;
  return split_mnemonic(t.substr(0, end), root, mods);
}

std::optional<std::string> function_header(std::string_view t) {
  // nvdisasm: ".section .text.NAME,..." and ".text.NAME:"
  if (t.rfind(".section", 0) == 0) {
    auto rest = text::trim(t.substr(8));
    if (rest.rfind(".text.", 0) != 0) return std::nullopt;
    rest.remove_prefix(6);
    const auto name = text::trim(rest.substr(0, rest.find_first_of(", \t")));
    if (name.empty()) return std::nullopt;
    return std::string(name);
  }
  if (t.rfind(".text.", 0) == 0 && t.back() == ':') {
    const auto name = t.substr(6, t.size() - 7);
    if (name.empty()) return std::nullopt;
    return std::string(name);
  }
  // cuobjdump: "Function : NAME"
  if (t.rfind("Function", 0) == 0) {
    auto rest = text::trim(t.substr(8));
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    const auto name = text::trim(rest.substr(1));
    if (name.empty()) return std::nullopt;
    return std::string(name);
  }
  return std::nullopt;
}

}  // namespace

OperandKind classify_operand(std::string_view token) {
  const auto t = text::trim(token);
  if (t.empty()) return OperandKind::Special;
  if (is_digit(t.front())) return OperandKind::Immediate;
  if (t.size() > 1 && t.front() == '-' && (is_digit(t[1]) || t[1] == '.')) {
    return OperandKind::Immediate;
  }
  const auto s = strip_operand_decorations(t);
  if (s.empty()) return OperandKind::Special;
  if (s.rfind("c[", 0) == 0) return OperandKind::ConstantBank;
  if (s.front() == '[') return OperandKind::Memory;
  if (register_at(s, 0)) return OperandKind::Register;
  if (s.size() >= 2 && s[0] == 'P' && is_digit(s[1])) {
    std::size_t j = 1;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j == s.size() || s[j] == '.') return OperandKind::PredicateRegister;
  }
  return OperandKind::Special;
}

int Operand::register_refs() const {
  int n = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (register_at(text, i)) ++n;
  }
  return n;
}

int Instruction::register_refs() const {
  int n = 0;
  for (const auto& op : operands) n += op.register_refs();
  return n;
}

bool Instruction::has_register_operand() const { return register_refs() > 0; }

std::string Instruction::to_string() const {
  std::string out;
  if (address) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "/*%04x*/ ", static_cast<unsigned>(*address));
    out += buf;
  }
  if (predicate) out += *predicate + " ";
  out += opcode;
  for (const auto& m : modifiers) out += m;
  for (std::size_t i = 0; i < operands.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += operands[i].text;
  }
  out += " ;";
  return out;
}

Instruction parse_instruction(std::string_view line) {
  auto clean = strip_comments(line);
  auto body = text::trim(clean.body);
  if (!body.empty() && body.front() == '{') body = text::trim(body.substr(1));
  if (!body.empty() && (body.back() == ';' || body.back() == '}')) {
    body.remove_suffix(1);
  } else {
    throw Error(ErrorKind::Parse, "instruction is missing its terminating ';'", 1);
  }
  body = text::trim(body);
  if (!body.empty() && body.back() == ';') body = text::trim(body.substr(0, body.size() - 1));
  return parse_body(body, clean.address, 1);
}

std::vector<FunctionListing> parse_disassembly(std::string_view listing) {
  std::vector<FunctionListing> functions;
  int line_no = 0;

  for (const auto raw : text::lines(listing)) {
    ++line_no;
    auto trimmed = text::trim(raw);
    if (trimmed.empty() || trimmed.rfind("//", 0) == 0) continue;

    const auto clean = strip_comments(trimmed);
    auto t = text::trim(clean.body);
    if (t.empty()) continue;

    if (auto name = function_header(t)) {
      if (functions.empty() || functions.back().name != *name) {
        functions.push_back({std::move(*name), {}});
      }
      continue;
    }
    if (t.front() == '.') continue;  // directive or local label

    bool closes_group = false;
    if (t.front() == '{') t = text::trim(t.substr(1));
    if (!t.empty() && t.back() == '}') {
      closes_group = true;
      t = text::trim(t.substr(0, t.size() - 1));
    }
    if (t.empty()) continue;
    if (t.back() == ':' && t.find_first_of(" \t") == std::string_view::npos) continue;  // label

    const bool candidate = clean.address.has_value() || t.front() == '@' || looks_like_mnemonic(t);
    if (!candidate) continue;  // banner text such as "code for sm_35"

    if (t.back() == ';') {
      t = text::trim(t.substr(0, t.size() - 1));
    } else if (!closes_group) {
      throw Error(ErrorKind::Parse, "instruction is missing its terminating ';'", line_no);
    }
    if (functions.empty()) {
      throw Error(ErrorKind::Parse, "instruction outside of any function section", line_no);
    }
    functions.back().instructions.push_back(parse_body(t, clean.address, line_no));
  }

  if (functions.empty()) throw Error(ErrorKind::EmptyInput, "no functions found");
  return functions;
}

}  // namespace occtune
