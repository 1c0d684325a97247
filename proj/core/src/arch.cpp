#include "occtune/arch.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "occtune/error.hpp"
#include "text.hpp"

namespace occtune {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Fermi: return "Fermi";
    case Family::Kepler: return "Kepler";
    case Family::Maxwell: return "Maxwell";
    case Family::Pascal: return "Pascal";
    case Family::Other: return "Other";
  }
  return "Other";
}

std::optional<Family> family_from_string(std::string_view name) {
  const auto lower = text::to_lower(text::trim(name));
  if (lower == "fermi") return Family::Fermi;
  if (lower == "kepler") return Family::Kepler;
  if (lower == "maxwell") return Family::Maxwell;
  if (lower == "pascal") return Family::Pascal;
  if (lower == "other") return Family::Other;
  return std::nullopt;
}

std::string ComputeCapability::str() const {
  return std::to_string(major) + "." + std::to_string(minor);
}

ComputeCapability ComputeCapability::parse(std::string_view input) {
  auto s = text::trim(input);
  const auto fail = [&] {
    return Error(ErrorKind::Parse, "invalid compute capability '" + std::string(input) + "'");
  };
  for (std::string_view prefix : {"sm_", "compute_"}) {
    if (text::starts_with_ci(s, prefix)) {
      const auto digits = s.substr(prefix.size());
      // sm_35 -> 3.5, sm_100 -> 10.0; trailing arch suffixes like "a" are not accepted.
      if (digits.size() < 2) throw fail();
      const auto major = text::parse_int(digits.substr(0, digits.size() - 1));
      const auto minor = text::parse_int(digits.substr(digits.size() - 1));
      if (!major || !minor || *major <= 0 || *minor < 0) throw fail();
      return {static_cast<int>(*major), static_cast<int>(*minor)};
    }
  }
  const auto dot = s.find('.');
  const auto major = text::parse_int(s.substr(0, dot));
  std::optional<std::int64_t> minor = 0;
  if (dot != std::string_view::npos) {
    const auto frac = s.substr(dot + 1);
    if (frac.size() != 1) throw fail();
    minor = text::parse_int(frac);
  }
  if (!major || !minor || *major <= 0 || *minor < 0) throw fail();
  return {static_cast<int>(*major), static_cast<int>(*minor)};
}

void validate(const ArchSpec& spec) {
  const auto fail = [&](const char* field, const std::string& why) {
    return Error(ErrorKind::Invariant,
                 "architecture '" + spec.name + "': " + field + " " + why, 0, field);
  };
  if (spec.name.empty()) throw fail("name", "must not be empty");
  if (spec.compute_capability.major <= 0) throw fail("compute_capability", "must be positive");

  const std::array<std::pair<const char*, int>, 10> counts{{
      {"multiprocessors", spec.multiprocessors},
      {"warp_size", spec.warp_size},
      {"max_threads_per_mp", spec.max_threads_per_mp},
      {"max_threads_per_block", spec.max_threads_per_block},
      {"max_blocks_per_mp", spec.max_blocks_per_mp},
      {"max_warps_per_mp", spec.max_warps_per_mp},
      {"register_file_size", spec.register_file_size},
      {"register_alloc_granularity", spec.register_alloc_granularity},
      {"max_regs_per_thread", spec.max_regs_per_thread},
      {"shared_mem_per_block", spec.shared_mem_per_block},
  }};
  for (const auto& [field, value] : counts) {
    if (value <= 0) throw fail(field, "must be positive (got " + std::to_string(value) + ")");
  }
  if (spec.max_threads_per_block % spec.warp_size != 0) {
    throw fail("warp_size", "must divide max_threads_per_block");
  }
  if (static_cast<long long>(spec.max_warps_per_mp) * spec.warp_size != spec.max_threads_per_mp) {
    throw fail("max_warps_per_mp", "times warp_size must equal max_threads_per_mp");
  }
  if (spec.max_regs_per_thread > spec.register_file_size) {
    throw fail("max_regs_per_thread", "must not exceed register_file_size");
  }
}

namespace {

const std::array<ArchSpec, 4>& builtin_table() {
  static const std::array<ArchSpec, 4> table = [] {
    std::array<ArchSpec, 4> t{};
    //            name           family           cc      mp  warp T_mp  T_B   B_mp W_mp R_fs   R_B  R_T  S_B
    t[0] = {"fermi-m2050", Family::Fermi, {2, 0}, 14, 32, 1536, 1024, 8, 48, 32768, 64, 63, 49152,
            3072, 32, 1147, 1546, 0.786, 65536};
    t[1] = {"kepler-k20", Family::Kepler, {3, 5}, 13, 32, 2048, 1024, 16, 64, 65536, 256, 255, 49152,
            11520, 192, 824, 2505, 1.572, 65536};
    t[2] = {"maxwell-m40", Family::Maxwell, {5, 2}, 24, 32, 2048, 1024, 32, 64, 65536, 256, 255, 49152,
            12288, 128, 1140, 5000, 3.146, 65536};
    t[3] = {"pascal-p100", Family::Pascal, {6, 0}, 56, 32, 2048, 1024, 32, 64, 65536, 256, 255, 49152,
            17066, 64, 405, 715, 4.194, 65536};
    return t;
  }();
  return table;
}

// Field table shared by the config reader and writer.
struct IntField {
  const char* key;
  int ArchSpec::*member;
};
struct OptIntField {
  const char* key;
  std::optional<int> ArchSpec::*member;
};

constexpr std::array<IntField, 10> kIntFields{{
    {"multiprocessors", &ArchSpec::multiprocessors},
    {"warp_size", &ArchSpec::warp_size},
    {"max_threads_per_mp", &ArchSpec::max_threads_per_mp},
    {"max_threads_per_block", &ArchSpec::max_threads_per_block},
    {"max_blocks_per_mp", &ArchSpec::max_blocks_per_mp},
    {"max_warps_per_mp", &ArchSpec::max_warps_per_mp},
    {"register_file_size", &ArchSpec::register_file_size},
    {"register_alloc_granularity", &ArchSpec::register_alloc_granularity},
    {"max_regs_per_thread", &ArchSpec::max_regs_per_thread},
    {"shared_mem_per_block", &ArchSpec::shared_mem_per_block},
}};

constexpr std::array<OptIntField, 5> kOptIntFields{{
    {"global_mem_mb", &ArchSpec::global_mem_mb},
    {"cuda_cores_per_mp", &ArchSpec::cuda_cores_per_mp},
    {"gpu_clock_mhz", &ArchSpec::gpu_clock_mhz},
    {"mem_clock_mhz", &ArchSpec::mem_clock_mhz},
    {"constant_mem_bytes", &ArchSpec::constant_mem_bytes},
}};

Error field_error(const std::string& section, const std::string& key, const std::string& why) {
  return Error(ErrorKind::Invariant, "architecture '" + section + "': " + key + " " + why, 0, key);
}

int read_int(const std::string& section, const std::string& key, const std::string& raw) {
  const auto v = text::parse_int(raw);
  if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
    throw field_error(section, key, "is not an integer: '" + raw + "'");
  }
  return static_cast<int>(*v);
}

ArchSpec spec_from_section(const std::string& section, const boost::property_tree::ptree& keys) {
  ArchSpec spec;
  spec.name = section;
  std::map<std::string, bool> seen;
  bool have_family = false;
  bool have_cc = false;

  for (const auto& [key, node] : keys) {
    if (!node.empty()) throw field_error(section, key, "has nested content");
    const auto raw = std::string(text::trim(node.data()));
    if (seen[key]) throw field_error(section, key, "is defined twice");
    seen[key] = true;

    if (key == "family") {
      const auto f = family_from_string(raw);
      if (!f) throw field_error(section, key, "is not a known family: '" + raw + "'");
      spec.family = *f;
      have_family = true;
      continue;
    }
    if (key == "compute_capability") {
      try {
        spec.compute_capability = ComputeCapability::parse(raw);
      } catch (const Error&) {
        throw field_error(section, key, "is not a compute capability: '" + raw + "'");
      }
      have_cc = true;
      continue;
    }
    if (key == "l2_cache_mb") {
      const auto v = text::parse_double(raw);
      if (!v) throw field_error(section, key, "is not a number: '" + raw + "'");
      spec.l2_cache_mb = *v;
      continue;
    }
    const auto req = std::find_if(kIntFields.begin(), kIntFields.end(),
                                  [&](const IntField& f) { return key == f.key; });
    if (req != kIntFields.end()) {
      spec.*(req->member) = read_int(section, key, raw);
      continue;
    }
    const auto opt = std::find_if(kOptIntFields.begin(), kOptIntFields.end(),
                                  [&](const OptIntField& f) { return key == f.key; });
    if (opt != kOptIntFields.end()) {
      spec.*(opt->member) = read_int(section, key, raw);
      continue;
    }
    throw field_error(section, key, "is not a recognized field");
  }

  if (!have_family) throw field_error(section, "family", "is missing");
  if (!have_cc) throw field_error(section, "compute_capability", "is missing");
  for (const auto& f : kIntFields) {
    if (!seen[f.key]) throw field_error(section, f.key, "is missing");
  }
  validate(spec);
  return spec;
}

}  // namespace

ArchSpec builtin_arch(Family family) {
  for (const auto& spec : builtin_table()) {
    if (spec.family == family) return spec;
  }
  throw Error(ErrorKind::NotFound,
              "no built-in architecture for family '" + std::string(to_string(family)) + "'");
}

std::span<const ArchSpec> builtin_archs() { return builtin_table(); }

std::vector<ArchSpec> parse_arch_config(std::string_view config) {
  // The ini reader only knows ';' comments; map '#' comment lines onto it,
  // keeping the line count intact for error messages.
  std::string normalized;
  normalized.reserve(config.size());
  for (const auto line : text::lines(config)) {
    const auto t = text::trim(line);
    if (!t.empty() && t.front() == '#') {
      normalized += ';';
    } else {
      normalized.append(line);
    }
    normalized += '\n';
  }

  boost::property_tree::ptree tree;
  std::istringstream in(normalized);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    const auto line_no = static_cast<int>(e.line());
    const auto all = text::lines(normalized);
    std::string key;
    if (line_no >= 1 && static_cast<std::size_t>(line_no) <= all.size()) {
      const auto line = all[line_no - 1];
      if (const auto eq = line.find('='); eq != std::string_view::npos) {
        key = std::string(text::trim(line.substr(0, eq)));
      }
    }
    auto message = e.message();
    if (!key.empty()) message += " '" + key + "'";
    throw Error(ErrorKind::Parse, message, line_no, key);
  }

  std::vector<ArchSpec> specs;
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) {
      throw Error(ErrorKind::Parse,
                  "key '" + section + "' outside of an [architecture] section or empty section");
    }
    specs.push_back(spec_from_section(section, keys));
  }
  return specs;
}

std::vector<ArchSpec> load_arch_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open architecture file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_arch_config(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what(), 0, e.field());
  }
}

std::string to_config(std::span<const ArchSpec> specs) {
  std::ostringstream out;
  bool first = true;
  for (const auto& spec : specs) {
    if (!first) out << '\n';
    first = false;
    out << '[' << spec.name << "]\n";
    out << "family = " << to_string(spec.family) << '\n';
    out << "compute_capability = " << spec.compute_capability.str() << '\n';
    for (const auto& f : kIntFields) out << f.key << " = " << spec.*(f.member) << '\n';
    for (const auto& f : kOptIntFields) {
      if (const auto& v = spec.*(f.member)) out << f.key << " = " << *v << '\n';
    }
    if (spec.l2_cache_mb) out << "l2_cache_mb = " << *spec.l2_cache_mb << '\n';
  }
  return out.str();
}

ArchDb::ArchDb() : ArchDb(std::vector<ArchSpec>{}) {}

ArchDb::ArchDb(std::vector<ArchSpec> user_specs) {
  for (const auto& builtin : builtin_table()) {
    const bool shadowed = std::any_of(user_specs.begin(), user_specs.end(),
                                      [&](const ArchSpec& s) { return s.name == builtin.name; });
    if (!shadowed) specs_.push_back(builtin);
  }
  for (auto& spec : user_specs) {
    validate(spec);
    specs_.push_back(std::move(spec));
  }
}

const ArchSpec* ArchDb::find(std::string_view name) const {
  const auto lower = text::to_lower(text::trim(name));
  for (const auto& spec : specs_) {
    if (text::to_lower(spec.name) == lower) return &spec;
  }
  if (const auto family = family_from_string(lower); family && *family != Family::Other) {
    // Family alias: the spec carrying the built-in name for that family,
    // whether it is the built-in itself or a user override.
    const auto builtin = builtin_arch(*family);
    for (const auto& spec : specs_) {
      if (spec.name == builtin.name) return &spec;
    }
  }
  return nullptr;
}

const ArchSpec& ArchDb::get(std::string_view name) const {
  if (const auto* spec = find(name)) return *spec;
  std::string known;
  for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::NotFound,
              "unknown architecture '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<std::string> ArchDb::names() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto& spec : specs_) out.push_back(spec.name);
  return out;
}

}  // namespace occtune
