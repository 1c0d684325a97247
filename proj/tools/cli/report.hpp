#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "occtune/arch.hpp"
#include "occtune/disasm.hpp"
#include "occtune/mix.hpp"
#include "occtune/occupancy.hpp"
#include "occtune/pruner.hpp"

namespace occtune::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct KernelReport {
  std::string kernel;
  std::string disassembly_file;
  std::string resource_file;
  KernelResources resources;
  std::int64_t dynamic_shared = 0;
  InstructionMix mix;
  double intensity = 0;
  double scale_n = 1;
  CategoryWeights coefficients;
  CategoryWeights terms;
  CategoryWeights utilization;
  double cost = 0;
  double row_cost = 0;
  OccupancyResult occupancy;
  SuggestionReport suggestion;
  std::optional<PruneReport> prune;
  bool prune_fallback = false;

  std::int64_t shared_per_block() const { return resources.static_shared_mem + dynamic_shared; }
};

struct AnalysisReport {
  std::string tool_version;
  Mode mode = Mode::Corrected;
  ArchSpec arch;
  std::vector<KernelReport> kernels;
};

Json to_json(const ArchSpec& arch);
Json to_json(const KernelResources& res, std::int64_t dynamic_shared);
Json to_json(const InstructionMix& mix);
Json to_json(const OccupancyResult& occ);
Json to_json(const SuggestionReport& sugg);
Json to_json(const PruneReport& prune, bool fallback = false);
Json to_json(const KernelReport& kernel, const ArchSpec& arch);
Json to_json(const AnalysisReport& report);

// Numbers as JSON numbers; +inf as the string "inf".
Json ratio_json(double value);

void write_text(std::ostream& out, const AnalysisReport& report);
void write_occupancy_text(std::ostream& out, const ArchSpec& arch, const OccupancyResult& occ);
// Layout: T* | [Ru : R*] | S* | occ*
void write_suggestion_text(std::ostream& out, const SuggestionReport& sugg);
void write_prune_text(std::ostream& out, const PruneReport& prune, bool fallback);

std::string format_list(const std::vector<int>& values);
std::string format_occupancy(double occ);  // "1", ".75", ".71"

}  // namespace occtune::cli
