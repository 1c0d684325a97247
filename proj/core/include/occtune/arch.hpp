#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace occtune {

enum class Family { Fermi, Kepler, Maxwell, Pascal, Other };

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view name);  // case-insensitive

// Compute capability as printed by the toolchain ("3.5", "sm_35").
struct ComputeCapability {
  int major = 0;
  int minor = 0;

  auto operator<=>(const ComputeCapability&) const = default;

  std::string str() const;  // "3.5"
  // Accepts "3.5", "3", "sm_35", "compute_52". Throws Error{Parse}.
  static ComputeCapability parse(std::string_view text);
};

// Hardware limits of one GPU generation. Only the fields above the
// informational block feed the occupancy equations.
struct ArchSpec {
  std::string name;
  Family family = Family::Other;
  ComputeCapability compute_capability;
  int multiprocessors = 0;
  int warp_size = 0;
  int max_threads_per_mp = 0;
  int max_threads_per_block = 0;
  int max_blocks_per_mp = 0;
  int max_warps_per_mp = 0;
  int register_file_size = 0;          // 32-bit registers per SM
  int register_alloc_granularity = 0;  // registers
  int max_regs_per_thread = 0;
  int shared_mem_per_block = 0;        // bytes; also the per-SM budget

  // Informational only.
  std::optional<int> global_mem_mb;
  std::optional<int> cuda_cores_per_mp;
  std::optional<int> gpu_clock_mhz;
  std::optional<int> mem_clock_mhz;
  std::optional<double> l2_cache_mb;
  std::optional<int> constant_mem_bytes;

  bool operator==(const ArchSpec&) const = default;
};

// Throws Error{Invariant} whose field() names the first failing field.
void validate(const ArchSpec& spec);

// The four reference GPUs: Fermi M2050, Kepler K20, Maxwell M40, Pascal P100.
ArchSpec builtin_arch(Family family);
std::span<const ArchSpec> builtin_archs();

// INI-style config: one [section] per architecture, `key = value` lines
// using the ArchSpec field names. Loading is all-or-nothing.
std::vector<ArchSpec> parse_arch_config(std::string_view text);
std::vector<ArchSpec> load_arch_file(const std::filesystem::path& path);
std::string to_config(std::span<const ArchSpec> specs);

// Built-ins plus user specs; a user spec with a built-in name shadows it.
// Lookup accepts an exact name or a family alias ("kepler").
class ArchDb {
 public:
  ArchDb();
  explicit ArchDb(std::vector<ArchSpec> user_specs);

  const ArchSpec* find(std::string_view name) const;
  const ArchSpec& get(std::string_view name) const;  // throws Error{NotFound}
  std::vector<std::string> names() const;
  std::span<const ArchSpec> specs() const { return specs_; }

 private:
  std::vector<ArchSpec> specs_;
};

}  // namespace occtune
