#include "occtune/mix.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "occtune/error.hpp"
#include "text.hpp"

namespace occtune {

namespace detail {
extern const std::string_view kDefaultOpcodeMap;
}

namespace {

constexpr std::array<std::string_view, kOpClassCount> kClassNames{
    "FPIns32", "FPIns64", "CompMinMax", "ShiftExtractShuffleSAD", "Conv64",  "Conv32",
    "LogSinCos", "IntAdd32", "TexIns", "LdStIns", "SurfIns", "PredIns", "CtrlIns", "MoveIns",
    "Regs",      "Unclassified",
};

}  // namespace

std::string_view to_string(OpClass cls) { return kClassNames[index_of(cls)]; }

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Flops: return "FLOPS";
    case Category::Mem: return "MEM";
    case Category::Ctrl: return "CTRL";
    case Category::Reg: return "REG";
    case Category::None: return "NONE";
  }
  return "NONE";
}

std::optional<OpClass> op_class_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<OpClass>(i);
  }
  return std::nullopt;
}

Category category_of(OpClass cls) {
  switch (cls) {
    case OpClass::FPIns32:
    case OpClass::FPIns64:
    case OpClass::CompMinMax:
    case OpClass::ShiftExtractShuffleSAD:
    case OpClass::Conv64:
    case OpClass::Conv32:
    case OpClass::LogSinCos:
    case OpClass::IntAdd32:
      return Category::Flops;
    case OpClass::TexIns:
    case OpClass::LdStIns:
    case OpClass::SurfIns:
      return Category::Mem;
    case OpClass::PredIns:
    case OpClass::CtrlIns:
    case OpClass::MoveIns:
      return Category::Ctrl;
    case OpClass::Regs:
      return Category::Reg;
    case OpClass::Unclassified:
      return Category::None;
  }
  return Category::None;
}

std::string_view to_string(SmKey key) {
  switch (key) {
    case SmKey::SM20: return "SM20";
    case SmKey::SM35: return "SM35";
    case SmKey::SM52: return "SM52";
    case SmKey::SM60: return "SM60";
  }
  return "SM20";
}

SmKey sm_key_for(ComputeCapability cc) {
  switch (cc.major) {
    case 2: return SmKey::SM20;
    case 3: return SmKey::SM35;
    case 5: return SmKey::SM52;
    case 6: return SmKey::SM60;
    default:
      throw Error(ErrorKind::UnsupportedArch,
                  "no throughput column for compute capability " + cc.str());
  }
}

const ThroughputTable& ThroughputTable::builtin() {
  static const ThroughputTable table = [] {
    ThroughputTable t;
    // IPC per SM:            SM20 SM35 SM52 SM60
    t.ipc_[index_of(OpClass::FPIns32)] = {32, 192, 128, 64};
    t.ipc_[index_of(OpClass::FPIns64)] = {16, 64, 4, 32};
    t.ipc_[index_of(OpClass::CompMinMax)] = {32, 160, 64, 32};
    t.ipc_[index_of(OpClass::ShiftExtractShuffleSAD)] = {16, 32, 64, 32};
    t.ipc_[index_of(OpClass::Conv64)] = {16, 8, 4, 16};
    t.ipc_[index_of(OpClass::Conv32)] = {16, 128, 32, 16};
    t.ipc_[index_of(OpClass::LogSinCos)] = {4, 32, 32, 16};
    t.ipc_[index_of(OpClass::IntAdd32)] = {32, 160, 64, 32};
    t.ipc_[index_of(OpClass::TexIns)] = {16, 32, 64, 16};
    t.ipc_[index_of(OpClass::LdStIns)] = {16, 32, 64, 16};
    t.ipc_[index_of(OpClass::SurfIns)] = {16, 32, 64, 16};
    t.ipc_[index_of(OpClass::PredIns)] = {16, 32, 64, 16};
    t.ipc_[index_of(OpClass::CtrlIns)] = {16, 32, 64, 16};
    t.ipc_[index_of(OpClass::MoveIns)] = {32, 32, 32, 32};
    t.ipc_[index_of(OpClass::Regs)] = {16, 32, 32, 16};
    return t;
  }();
  return table;
}

double ThroughputTable::ipc(OpClass cls, SmKey key) const {
  if (cls == OpClass::Unclassified) {
    throw Error(ErrorKind::NotFound, "Unclassified has no throughput entry");
  }
  return ipc_[index_of(cls)][static_cast<std::size_t>(key)];
}

double cpi(const ThroughputTable& table, OpClass cls, ComputeCapability cc) {
  return table.cpi(cls, sm_key_for(cc));
}

// ---------------------------------------------------------------------------
// OpcodeClassifier

const OpcodeClassifier& OpcodeClassifier::builtin() {
  static const OpcodeClassifier classifier = parse(detail::kDefaultOpcodeMap);
  return classifier;
}

OpcodeClassifier OpcodeClassifier::parse(std::string_view input) {
  OpcodeClassifier out;
  int line_no = 0;
  for (const auto raw : text::lines(input)) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = text::trim(line);
    if (line.empty()) continue;

    const auto arrow = line.find("->");
    if (arrow == std::string_view::npos) {
      throw Error(ErrorKind::Parse, "expected 'OPCODE -> ClassName'", line_no);
    }
    const auto key = text::trim(line.substr(0, arrow));
    const auto cls_name = text::trim(line.substr(arrow + 2));

    std::string root;
    std::vector<std::string> mods;
    const auto dot = key.find('.');
    root = std::string(key.substr(0, dot));
    bool key_ok = !root.empty() && key.find_first_of(" \t") == std::string_view::npos;
    for (char c : root) {
      key_ok = key_ok && ((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_');
    }
    if (dot != std::string_view::npos) {
      const auto mod = key.substr(dot + 1);
      key_ok = key_ok && !mod.empty() && mod.find('.') == std::string_view::npos;
    }
    if (!key_ok || root.front() < 'A' || root.front() > 'Z') {
      throw Error(ErrorKind::Parse, "malformed opcode key '" + std::string(key) + "'", line_no);
    }

    const auto cls = op_class_from_string(cls_name);
    if (!cls || *cls == OpClass::Regs || *cls == OpClass::Unclassified) {
      throw Error(ErrorKind::Parse, "unknown instruction class '" + std::string(cls_name) + "'",
                  line_no);
    }
    const auto [it, inserted] = out.entries_.emplace(std::string(key), *cls);
    if (!inserted) {
      throw Error(ErrorKind::Parse, "duplicate entry for '" + std::string(key) + "'", line_no);
    }
  }
  return out;
}

OpcodeClassifier OpcodeClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open opcode map '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

OpcodeClassifier OpcodeClassifier::merged_with(const OpcodeClassifier& overrides) const {
  OpcodeClassifier out = *this;
  for (const auto& [key, cls] : overrides.entries_) out.entries_[key] = cls;
  return out;
}

OpClass OpcodeClassifier::classify(std::string_view opcode,
                                   std::span<const std::string> modifiers) const {
  std::string key(opcode);
  for (const auto& mod : modifiers) {
    key.resize(opcode.size());
    key += mod;  // modifiers keep their leading '.'
    if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  if (const auto it = entries_.find(opcode); it != entries_.end()) return it->second;
  return OpClass::Unclassified;
}

OpClass OpcodeClassifier::classify(const Instruction& ins) const {
  return classify(ins.opcode, ins.modifiers);
}

std::string OpcodeClassifier::to_text() const {
  std::string out;
  for (const auto& [key, cls] : entries_) {
    out += key;
    out += " -> ";
    out += to_string(cls);
    out += '\n';
  }
  return out;
}

OpClass classify(const Instruction& ins) { return OpcodeClassifier::builtin().classify(ins); }

// ---------------------------------------------------------------------------
// InstructionMix

std::int64_t InstructionMix::total(Category category) const {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < kOpClassCount; ++i) {
    if (category_of(static_cast<OpClass>(i)) == category) sum += counts[i];
  }
  return sum;
}

InstructionMix& InstructionMix::operator+=(const InstructionMix& other) {
  for (std::size_t i = 0; i < kOpClassCount; ++i) counts[i] += other.counts[i];
  instructions += other.instructions;
  for (const auto& [op, n] : other.unclassified_opcodes) unclassified_opcodes[op] += n;
  return *this;
}

InstructionMix aggregate(std::span<const Instruction> instructions,
                         const OpcodeClassifier& classifier) {
  InstructionMix mix;
  for (const auto& ins : instructions) {
    const auto cls = classifier.classify(ins);
    ++mix.count(cls);
    ++mix.instructions;
    if (cls == OpClass::Unclassified) ++mix.unclassified_opcodes[ins.opcode];
    mix.count(OpClass::Regs) += ins.register_refs();
    if (ins.predicate && cls != OpClass::CtrlIns && cls != OpClass::PredIns) {
      ++mix.count(OpClass::PredIns);
    }
  }
  return mix;
}

// ---------------------------------------------------------------------------
// Cost model

CategoryWeights weighted_terms(const InstructionMix& mix, ComputeCapability cc,
                               const ThroughputTable& table) {
  const auto key = sm_key_for(cc);
  CategoryWeights terms;
  for (const auto cls : kTabulatedClasses) {
    if (category_of(cls) != Category::Flops) continue;
    terms.flops += static_cast<double>(mix.count(cls)) / table.ipc(cls, key);
  }
  terms.mem = static_cast<double>(mix.mem()) / table.ipc(OpClass::LdStIns, key);
  terms.ctrl = static_cast<double>(mix.ctrl()) / table.ipc(OpClass::CtrlIns, key);
  terms.reg = static_cast<double>(mix.reg()) / table.ipc(OpClass::Regs, key);
  return terms;
}

CategoryWeights coefficients(const InstructionMix& mix, ComputeCapability cc,
                             const ThroughputTable& table) {
  const auto key = sm_key_for(cc);
  CategoryWeights c;
  const auto flops = mix.flops();
  c.flops = flops > 0 ? weighted_terms(mix, cc, table).flops / static_cast<double>(flops)
                      : table.cpi(OpClass::FPIns32, key);
  c.mem = table.cpi(OpClass::LdStIns, key);
  c.ctrl = table.cpi(OpClass::CtrlIns, key);
  c.reg = table.cpi(OpClass::Regs, key);
  return c;
}

double cost_estimate(const InstructionMix& mix, ComputeCapability cc, double scale_n,
                     const ThroughputTable& table) {
  return scale_n * weighted_terms(mix, cc, table).sum();
}

double row_weighted_cost(const InstructionMix& mix, ComputeCapability cc, double scale_n,
                         const ThroughputTable& table) {
  const auto key = sm_key_for(cc);
  double sum = 0;
  for (const auto cls : kTabulatedClasses) {
    sum += static_cast<double>(mix.count(cls)) / table.ipc(cls, key);
  }
  return scale_n * sum;
}

double intensity(const InstructionMix& mix) {
  const auto fl = mix.flops();
  const auto mem = mix.mem();
  if (mem == 0) return fl > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return static_cast<double>(fl) / static_cast<double>(mem);
}

CategoryWeights pipeline_utilization(const InstructionMix& mix, ComputeCapability cc,
                                     const ThroughputTable& table) {
  auto terms = weighted_terms(mix, cc, table);
  const auto total = terms.sum();
  if (total <= 0) return {};
  return {terms.flops / total, terms.mem / total, terms.ctrl / total, terms.reg / total};
}

}  // namespace occtune
