#include "cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>

namespace occtune::cli {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double fraction) { return fixed(fraction * 100.0, 2) + "%"; }

Json weights_json(const CategoryWeights& w) {
  Json j;
  j["flops"] = w.flops;
  j["mem"] = w.mem;
  j["ctrl"] = w.ctrl;
  j["reg"] = w.reg;
  return j;
}

}  // namespace

Json ratio_json(double value) {
  if (std::isinf(value)) return "inf";
  return value;
}

std::string format_list(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

std::string format_occupancy(double occ) {
  auto s = fixed(occ, 2);
  if (s == "1.00") return "1";
  if (s == "0.00") return "0";
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  while (s.back() == '0') s.pop_back();
  return s;
}

Json to_json(const ArchSpec& arch) {
  Json j;
  j["name"] = arch.name;
  j["family"] = std::string(to_string(arch.family));
  j["compute_capability"] = arch.compute_capability.str();
  j["multiprocessors"] = arch.multiprocessors;
  j["warp_size"] = arch.warp_size;
  j["max_threads_per_mp"] = arch.max_threads_per_mp;
  j["max_threads_per_block"] = arch.max_threads_per_block;
  j["max_blocks_per_mp"] = arch.max_blocks_per_mp;
  j["max_warps_per_mp"] = arch.max_warps_per_mp;
  j["register_file_size"] = arch.register_file_size;
  j["register_alloc_granularity"] = arch.register_alloc_granularity;
  j["max_regs_per_thread"] = arch.max_regs_per_thread;
  j["shared_mem_per_block"] = arch.shared_mem_per_block;
  return j;
}

Json to_json(const KernelResources& res, std::int64_t dynamic_shared) {
  Json j;
  j["entry_name"] = res.entry_name;
  j["target_cc"] = res.target_cc.str();
  j["registers_per_thread"] = res.registers_per_thread;
  j["static_shared_mem"] = res.static_shared_mem;
  j["dynamic_shared_mem"] = dynamic_shared;
  j["shared_mem_per_block"] = res.static_shared_mem + dynamic_shared;
  j["stack_frame"] = res.stack_frame;
  j["spill_stores"] = res.spill_stores;
  j["spill_loads"] = res.spill_loads;
  Json banks = Json::array();
  for (const auto& b : res.const_mem_banks) {
    Json e;
    e["bank"] = b.bank;
    e["bytes"] = b.bytes;
    banks.push_back(e);
  }
  j["const_mem_banks"] = banks;
  return j;
}

Json to_json(const InstructionMix& mix) {
  Json j;
  j["instructions"] = mix.instructions;
  Json counts;
  for (std::size_t i = 0; i < kOpClassCount; ++i) {
    counts[std::string(to_string(static_cast<OpClass>(i)))] = mix.counts[i];
  }
  j["counts"] = counts;
  j["flops"] = mix.flops();
  j["mem"] = mix.mem();
  j["ctrl"] = mix.ctrl();
  j["reg"] = mix.reg();
  j["unclassified"] = mix.unclassified();
  Json unknown = Json::object();
  for (const auto& [op, n] : mix.unclassified_opcodes) unknown[op] = n;
  j["unclassified_opcodes"] = unknown;
  return j;
}

Json to_json(const OccupancyResult& occ) {
  Json j;
  j["mode"] = std::string(to_string(occ.mode));
  j["threads_per_block"] = occ.threads_per_block;
  j["warps_per_block"] = occ.warps_per_block;
  j["limit_warps"] = occ.limit_warps;
  j["limit_regs"] = occ.limit_regs;
  j["limit_smem"] = occ.limit_smem;
  j["active_blocks"] = occ.active_blocks;
  j["active_warps"] = occ.active_warps;
  j["occupancy"] = occ.occupancy;
  j["limiter"] = std::string(to_string(occ.limiter));
  return j;
}

Json to_json(const SuggestionReport& s) {
  Json j;
  j["thread_candidates"] = s.thread_candidates;
  j["registers_used"] = s.registers_used;
  j["register_headroom"] = s.register_headroom;
  j["shared_mem_used"] = s.shared_mem_used;
  j["smem_budget"] = s.smem_budget;
  j["best_occupancy"] = s.best_occupancy;
  j["best_threads"] = s.best_threads;
  j["best_blocks"] = s.best_blocks;
  j["best_warps"] = s.best_warps;
  return j;
}

Json to_json(const PruneReport& p, bool fallback) {
  Json j;
  j["rule"] = std::string(to_string(p.rule));
  j["original_size"] = p.original_size;
  j["pruned_size"] = p.pruned_size;
  j["kept_tc"] = p.kept_tc;
  j["reduction"] = p.reduction;
  j["threshold"] = p.threshold;
  j["intensity"] = p.intensity ? ratio_json(*p.intensity) : Json(nullptr);
  j["intensity_source"] = "static";
  j["fallback"] = fallback;
  return j;
}

Json to_json(const KernelReport& k, const ArchSpec& arch) {
  Json j;
  j["kernel"] = k.kernel;
  Json src;
  src["disassembly"] = k.disassembly_file;
  src["resource_report"] = k.resource_file;
  j["sources"] = src;
  j["resources"] = to_json(k.resources, k.dynamic_shared);
  j["instruction_mix"] = to_json(k.mix);
  j["intensity"] = ratio_json(k.intensity);

  Json cost;
  cost["sm_key"] = std::string(to_string(sm_key_for(arch.compute_capability)));
  cost["scale_n"] = k.scale_n;
  cost["coefficients"] = weights_json(k.coefficients);
  cost["terms"] = weights_json(k.terms);
  cost["category_weighted"] = k.cost;
  cost["row_weighted"] = k.row_cost;
  cost["pipeline_utilization"] = weights_json(k.utilization);
  j["cost"] = cost;

  j["occupancy"] = to_json(k.occupancy);
  j["suggestion"] = to_json(k.suggestion);
  if (k.prune) j["prune"] = to_json(*k.prune, k.prune_fallback);
  return j;
}

Json to_json(const AnalysisReport& report) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = report.tool_version;
  j["mode"] = std::string(to_string(report.mode));
  j["arch"] = to_json(report.arch);
  Json kernels = Json::array();
  for (const auto& k : report.kernels) kernels.push_back(to_json(k, report.arch));
  j["kernels"] = kernels;
  return j;
}

void write_occupancy_text(std::ostream& out, const ArchSpec& arch, const OccupancyResult& occ) {
  out << "arch         " << arch.name << " (cc " << arch.compute_capability.str() << ", mode "
      << to_string(occ.mode) << ")\n";
  out << "threads      " << occ.threads_per_block << " (" << occ.warps_per_block
      << " warps/block)\n";
  out << "limits       warps " << occ.limit_warps << ", registers " << occ.limit_regs
      << ", shared " << occ.limit_smem << " blocks\n";
  out << "active       " << occ.active_blocks << " blocks, " << occ.active_warps << " of "
      << arch.max_warps_per_mp << " warps\n";
  out << "occupancy    " << fixed(occ.occupancy, 4) << " (" << percent(occ.occupancy) << ")\n";
  out << "limiter      " << to_string(occ.limiter) << '\n';
  if (occ.limiter == Limiter::SharedMemory) {
    out << "hint         shared memory caps resident blocks; reducing S per T could increase "
           "occupancy\n";
  } else if (occ.limiter == Limiter::Registers) {
    out << "hint         registers cap resident blocks; fewer registers per thread could "
           "increase occupancy\n";
  } else if (occ.limiter == Limiter::Illegal) {
    out << "hint         configuration cannot launch (a resource exceeds its per-block limit)\n";
  }
}

void write_suggestion_text(std::ostream& out, const SuggestionReport& s) {
  const auto tstar = format_list(s.thread_candidates);
  const auto regs =
      "[" + std::to_string(s.registers_used) + " : " + std::to_string(s.register_headroom) + "]";
  const auto width = std::max<std::size_t>(tstar.size(), 2);
  out << std::left << std::setw(static_cast<int>(width)) << "T*" << " | " << std::setw(10)
      << "[Ru : R*]" << " | " << std::setw(6) << "S*" << " | occ*\n";
  out << std::setw(static_cast<int>(width)) << tstar << " | " << std::setw(10) << regs << " | "
      << std::setw(6) << s.smem_budget << " | " << format_occupancy(s.best_occupancy) << '\n'
      << std::right;
  out << "occ* reached at T = " << s.best_threads << " (" << s.best_blocks << " blocks, "
      << s.best_warps << " warps)\n";
}

void write_prune_text(std::ostream& out, const PruneReport& p, bool fallback) {
  out << "rule         " << to_string(p.rule);
  if (p.intensity) {
    out << " (intensity " << (std::isinf(*p.intensity) ? std::string("inf") : fixed(*p.intensity, 2))
        << (*p.intensity > p.threshold ? " > " : " <= ") << fixed(p.threshold, 1) << ")";
  }
  out << '\n';
  out << "kept TC      " << format_list(p.kept_tc) << (fallback ? "  (fallback: full TC)" : "")
      << '\n';
  out << "variants     " << p.original_size << " -> " << p.pruned_size << '\n';
  out << "reduction    " << percent(p.reduction) << '\n';
}

void write_text(std::ostream& out, const AnalysisReport& report) {
  bool first = true;
  for (const auto& k : report.kernels) {
    if (!first) out << '\n';
    first = false;
    const auto& mix = k.mix;
    out << "kernel " << k.kernel << " on " << report.arch.name << " (cc "
        << report.arch.compute_capability.str() << ", mode " << to_string(report.mode) << ")\n";
    out << "resources    " << k.resources.registers_per_thread << " regs/thread, "
        << k.shared_per_block() << " B shared/block (static " << k.resources.static_shared_mem
        << " + dynamic " << k.dynamic_shared << "), target sm " << k.resources.target_cc.str()
        << '\n';
    out << "mix          FLOPS " << mix.flops() << "  MEM " << mix.mem() << "  CTRL " << mix.ctrl()
        << "  REG " << mix.reg() << "  unclassified " << mix.unclassified() << "  ("
        << mix.instructions << " instructions)\n";
    if (!mix.unclassified_opcodes.empty()) {
      out << "unclassified ";
      bool f = true;
      for (const auto& [op, n] : mix.unclassified_opcodes) {
        out << (f ? "" : ", ") << op << " x" << n;
        f = false;
      }
      out << '\n';
    }
    out << "intensity    " << (std::isinf(k.intensity) ? std::string("inf") : fixed(k.intensity, 2))
        << '\n';
    out << "cost         " << fixed(k.cost, 4) << " weighted cycles (row-weighted "
        << fixed(k.row_cost, 4) << ", N = " << k.scale_n << ")\n";
    out << "pipelines    FLOPS " << percent(k.utilization.flops) << "  MEM "
        << percent(k.utilization.mem) << "  CTRL " << percent(k.utilization.ctrl) << "  REG "
        << percent(k.utilization.reg) << '\n';
    out << "occupancy    T = " << k.occupancy.threads_per_block << ": " << k.occupancy.active_blocks
        << " blocks, " << k.occupancy.active_warps << " warps, occ "
        << fixed(k.occupancy.occupancy, 4) << ", limiter " << to_string(k.occupancy.limiter)
        << '\n';
    out << "suggestion\n";
    write_suggestion_text(out, k.suggestion);
    if (k.prune) {
      out << "prune\n";
      write_prune_text(out, *k.prune, k.prune_fallback);
    }
  }
}

}  // namespace occtune::cli
