#include "cli/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include <CLI11.hpp>

#include "cli/report.hpp"
#include "occtune/error.hpp"
#include "occtune/version.hpp"

namespace occtune::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Re-raises with the file name in front of the message.
template <typename F>
auto with_file(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what(), 0, e.field());
  }
}

ArchDb load_db(const std::string& db_flag) {
  std::string path = db_flag;
  if (path.empty()) {
    if (const char* env = std::getenv(kArchDbEnv)) path = env;
  }
  if (path.empty()) return ArchDb{};
  return ArchDb(load_arch_file(path));
}

struct Common {
  std::string arch_db;
  std::string arch;
  std::string mode = "corrected";
  std::string format = "text";
};

void add_arch_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--arch", c.arch, "Architecture name or family (kepler, fermi-m2050, ...)")
      ->required();
  cmd->add_option("--mode", c.mode, "Occupancy model: corrected | paper-literal")
      ->check(CLI::IsMember({"corrected", "paper-literal"}));
}

void add_format_option(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format: text | json")
      ->check(CLI::IsMember({"text", "json"}));
}

void emit_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::vector<std::string> files;
  std::int64_t dynamic_smem = 0;
  int threads = 0;
  std::string rule = "static";
  std::string space_file;
  std::string opcode_map;
  double scale_n = 1.0;
  std::string output;
};

struct AnalyzedPair {
  std::vector<KernelReport> kernels;
  std::vector<std::string> warnings;
};

AnalyzedPair analyze_pair(const std::string& disasm_path, const std::string& report_path,
                          const ArchSpec& arch, Mode mode, const AnalyzeOptions& opt,
                          const OpcodeClassifier& classifier, const TuningSpace& space) {
  const auto disasm_text = read_file(disasm_path);
  const auto report_text = read_file(report_path);
  const auto listings = with_file(disasm_path, [&] { return parse_disassembly(disasm_text); });
  const auto resources =
      with_file(report_path, [&] { return parse_resource_report(report_text); });

  AnalyzedPair result;
  for (const auto& res : resources) {
    const auto listing = std::find_if(listings.begin(), listings.end(),
                                      [&](const FunctionListing& f) { return f.name == res.entry_name; });
    if (listing == listings.end()) {
      throw Error(ErrorKind::NotFound,
                  disasm_path + ": kernel '" + res.entry_name + "' not found in disassembly");
    }

    KernelReport k;
    k.kernel = res.entry_name;
    k.disassembly_file = disasm_path;
    k.resource_file = report_path;
    k.resources = res;
    k.dynamic_shared = opt.dynamic_smem;
    k.mix = aggregate(listing->instructions, classifier);
    k.intensity = intensity(k.mix);
    k.scale_n = opt.scale_n;
    k.coefficients = coefficients(k.mix, arch.compute_capability);
    k.terms = weighted_terms(k.mix, arch.compute_capability);
    k.utilization = pipeline_utilization(k.mix, arch.compute_capability);
    k.cost = cost_estimate(k.mix, arch.compute_capability, opt.scale_n);
    k.row_cost = row_weighted_cost(k.mix, arch.compute_capability, opt.scale_n);

    const auto smem = k.shared_per_block();
    k.suggestion = suggest(arch, res.registers_per_thread, smem, mode);
    const int threads = opt.threads > 0 ? opt.threads
                        : k.suggestion.best_threads > 0 ? k.suggestion.best_threads
                                                        : arch.warp_size;
    k.occupancy = occupancy(arch, {threads, res.registers_per_thread, smem}, mode);

    if (opt.rule != "none") {
      try {
        k.prune = opt.rule == "intensity" ? rule_prune(space, k.suggestion, k.intensity)
                                          : static_prune(space, k.suggestion);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoCandidates) throw;
        PruneReport fallback;
        fallback.rule = opt.rule == "intensity" ? PruneRule::StaticPlusIntensity
                                                : PruneRule::StaticOnly;
        fallback.original_size = fallback.pruned_size = grid_size(space);
        fallback.kept_tc = space.tc;
        if (opt.rule == "intensity") fallback.intensity = k.intensity;
        k.prune = fallback;
        k.prune_fallback = true;
        result.warnings.push_back(res.entry_name +
                                  ": no suggested thread count in TC; keeping the full TC list");
      }
    }
    result.kernels.push_back(std::move(k));
  }
  return result;
}

int cmd_analyze(const Common& c, const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.files.empty() || opt.files.size() % 2 != 0) {
    err << "occtune: error: analyze expects DISASM REPORT pairs\n";
    return kExitError;
  }
  const auto db = load_db(c.arch_db);
  const auto& arch = db.get(c.arch);
  const auto mode = mode_from_string(c.mode);
  const auto classifier = opt.opcode_map.empty()
                              ? OpcodeClassifier::builtin()
                              : OpcodeClassifier::builtin().merged_with(
                                    OpcodeClassifier::load(opt.opcode_map));
  const auto space = opt.space_file.empty() ? TuningSpace::defaults()
                                            : load_tuning_space(opt.space_file);
  if (opt.dynamic_smem < 0) {
    err << "occtune: error: --dynamic-smem must be >= 0\n";
    return kExitError;
  }
  if (!(opt.scale_n > 0)) {
    err << "occtune: error: --scale-n must be positive\n";
    return kExitError;
  }

  // One task per artifact pair; results are assembled in input order.
  std::vector<std::future<AnalyzedPair>> tasks;
  for (std::size_t i = 0; i < opt.files.size(); i += 2) {
    tasks.push_back(std::async(std::launch::async, [&, i] {
      return analyze_pair(opt.files[i], opt.files[i + 1], arch, mode, opt, classifier, space);
    }));
  }
  AnalysisReport report;
  report.tool_version = kVersion;
  report.mode = mode;
  report.arch = arch;
  std::vector<std::string> warnings;
  std::optional<Error> first_error;
  for (auto& task : tasks) {
    try {
      auto pair = task.get();
      for (auto& k : pair.kernels) report.kernels.push_back(std::move(k));
      for (auto& w : pair.warnings) warnings.push_back(std::move(w));
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  if (first_error) throw *first_error;

  std::ostringstream rendered;
  if (c.format == "json") {
    emit_json(rendered, to_json(report));
  } else {
    write_text(rendered, report);
  }
  if (opt.output.empty()) {
    out << rendered.str();
  } else {
    std::ofstream file(opt.output, std::ios::binary);
    if (!file) throw Error(ErrorKind::NotFound, "cannot write '" + opt.output + "'");
    file << rendered.str();
  }
  for (const auto& w : warnings) err << "occtune: warning: " << w << '\n';
  return warnings.empty() ? kExitOk : kExitWarning;
}

// ---------------------------------------------------------------------------
// occupancy

int cmd_occupancy(const Common& c, int threads, int regs, std::int64_t smem, std::ostream& out) {
  const auto db = load_db(c.arch_db);
  const auto& arch = db.get(c.arch);
  const auto mode = mode_from_string(c.mode);
  const auto occ = occupancy(arch, {threads, regs, smem}, mode);
  if (c.format == "json") {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kVersion;
    j["arch"] = arch.name;
    j["registers_per_thread"] = regs;
    j["shared_mem_per_block"] = smem;
    j["occupancy"] = to_json(occ);
    emit_json(out, j);
  } else {
    write_occupancy_text(out, arch, occ);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// suggest

int cmd_suggest(const Common& c, int regs, std::int64_t smem, const std::string& resource_file,
                std::int64_t dynamic_smem, std::ostream& out) {
  const auto db = load_db(c.arch_db);
  const auto& arch = db.get(c.arch);
  const auto mode = mode_from_string(c.mode);

  std::vector<std::pair<std::string, SuggestionReport>> rows;
  if (!resource_file.empty()) {
    const auto text = read_file(resource_file);
    const auto kernels = with_file(resource_file, [&] { return parse_resource_report(text); });
    for (const auto& k : kernels) rows.emplace_back(k.entry_name, suggest(arch, k, mode, dynamic_smem));
  } else {
    rows.emplace_back("", suggest(arch, regs, smem + dynamic_smem, mode));
  }

  if (c.format == "json") {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kVersion;
    j["arch"] = arch.name;
    j["mode"] = std::string(to_string(mode));
    Json list = Json::array();
    for (const auto& [name, s] : rows) {
      Json e;
      if (!name.empty()) e["kernel"] = name;
      e["suggestion"] = to_json(s);
      list.push_back(e);
    }
    j["suggestions"] = list;
    emit_json(out, j);
    return kExitOk;
  }
  out << "arch " << arch.name << " (cc " << arch.compute_capability.str() << ", mode "
      << to_string(mode) << ")\n";
  for (const auto& [name, s] : rows) {
    if (!name.empty()) out << "\nkernel " << name << '\n';
    write_suggestion_text(out, s);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// prune

struct PruneOptions {
  std::string space_file;
  std::string from_report;
  std::string kernel;
  int regs = 0;
  std::int64_t smem = 0;
  std::optional<double> intensity;
  std::string rule = "static";
};

int cmd_prune(const Common& c, const PruneOptions& opt, std::ostream& out, std::ostream& err) {
  const auto db = load_db(c.arch_db);
  const auto& arch = db.get(c.arch);
  const auto mode = mode_from_string(c.mode);
  const auto space = opt.space_file.empty() ? TuningSpace::defaults()
                                            : load_tuning_space(opt.space_file);

  int regs = opt.regs;
  std::int64_t smem = opt.smem;
  std::optional<double> mix_intensity = opt.intensity;
  if (!opt.from_report.empty()) {
    const auto text = read_file(opt.from_report);
    Json doc;
    try {
      doc = Json::parse(text);
      const auto& kernels = doc.at("kernels");
      const Json* chosen = nullptr;
      for (const auto& k : kernels) {
        if (opt.kernel.empty() || k.at("kernel").get<std::string>() == opt.kernel) {
          chosen = &k;
          break;
        }
      }
      if (!chosen) {
        throw Error(ErrorKind::NotFound, opt.from_report + ": no matching kernel in report");
      }
      const auto& res = chosen->at("resources");
      regs = res.at("registers_per_thread").get<int>();
      smem = res.at("shared_mem_per_block").get<std::int64_t>();
      if (!mix_intensity) {
        const auto& it = chosen->at("intensity");
        mix_intensity = it.is_string() ? std::numeric_limits<double>::infinity() : it.get<double>();
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Parse, opt.from_report + ": not a valid report: " + e.what());
    }
  }
  if (opt.rule == "intensity" && !mix_intensity) {
    err << "occtune: error: --rule intensity needs --intensity or --from-report\n";
    return kExitError;
  }

  const auto sugg = suggest(arch, regs, smem, mode);
  PruneReport report;
  bool fallback = false;
  try {
    report = opt.rule == "intensity" ? rule_prune(space, sugg, *mix_intensity)
                                     : static_prune(space, sugg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoCandidates) throw;
    fallback = true;
    report.rule = opt.rule == "intensity" ? PruneRule::StaticPlusIntensity : PruneRule::StaticOnly;
    report.original_size = report.pruned_size = grid_size(space);
    report.kept_tc = space.tc;
    report.intensity = opt.rule == "intensity" ? mix_intensity : std::nullopt;
  }

  if (c.format == "json") {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kVersion;
    j["arch"] = arch.name;
    j["mode"] = std::string(to_string(mode));
    j["suggestion"] = to_json(sugg);
    j["prune"] = to_json(report, fallback);
    Json kept;
    const auto pruned = apply(space, report);
    kept["TC"] = pruned.tc;
    kept["BC"] = pruned.bc;
    kept["UIF"] = pruned.uif;
    kept["PL"] = pruned.pl;
    if (!pruned.sc.empty()) kept["SC"] = pruned.sc;
    kept["CFLAGS"] = pruned.cflags;
    j["space"] = kept;
    emit_json(out, j);
  } else {
    out << "arch         " << arch.name << '\n';
    out << "T*           " << format_list(sugg.thread_candidates) << '\n';
    write_prune_text(out, report, fallback);
    out << "\n# pruned space\n" << to_spec_text(apply(space, report));
  }
  if (fallback) {
    err << "occtune: warning: no suggested thread count appears in TC; keeping the full TC list\n";
    return kExitWarning;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// arch-list

int cmd_arch_list(const Common& c, std::ostream& out) {
  const auto db = load_db(c.arch_db);
  if (c.format == "json") {
    Json list = Json::array();
    for (const auto& spec : db.specs()) list.push_back(to_json(spec));
    emit_json(out, list);
    return kExitOk;
  }
  for (const auto& spec : db.specs()) {
    out << std::left << std::setw(16) << spec.name << std::right << " " << std::setw(8)
        << to_string(spec.family) << "  cc " << spec.compute_capability.str() << "  "
        << spec.max_warps_per_mp << " warps/mp, " << spec.max_blocks_per_mp << " blocks/mp, "
        << spec.register_file_size << " regs, " << spec.shared_mem_per_block << " B smem\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Static occupancy, instruction-mix and search-space analysis for GPU kernels",
               "occtune"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  app.add_option("--arch-db", common.arch_db,
                 std::string("Architecture config file (default: $") + kArchDbEnv + ")");

  // analyze
  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Analyze captured disassembly + ptxas -v report pairs");
  analyze->add_option("files", an.files, "DISASM REPORT [DISASM REPORT ...]")->required();
  add_arch_options(analyze, common);
  add_format_option(analyze, common);
  analyze->add_option("--dynamic-smem", an.dynamic_smem, "Dynamic shared memory bytes per block");
  analyze->add_option("--threads", an.threads,
                      "Evaluate occupancy at this block size (default: best block size)");
  analyze->add_option("--rule", an.rule, "Search-space pruning: none | static | intensity")
      ->check(CLI::IsMember({"none", "static", "intensity"}));
  analyze->add_option("--space", an.space_file, "Tuning-space spec file (default grid otherwise)");
  analyze->add_option("--opcode-map", an.opcode_map, "Extra opcode -> class entries");
  analyze->add_option("--scale-n", an.scale_n, "Problem-size multiplier for the cost estimate");
  analyze->add_option("-o,--output", an.output, "Write the report to a file instead of stdout");

  // occupancy
  int occ_threads = 0;
  int occ_regs = 0;
  std::int64_t occ_smem = 0;
  auto* occ = app.add_subcommand("occupancy", "Theoretical occupancy for one launch configuration");
  add_arch_options(occ, common);
  add_format_option(occ, common);
  occ->add_option("--threads", occ_threads, "Threads per block")->required();
  occ->add_option("--regs", occ_regs, "Registers per thread (0 = unspecified)");
  occ->add_option("--smem", occ_smem, "Shared memory bytes per block (0 = unspecified)");

  // suggest
  int sg_regs = 0;
  std::int64_t sg_smem = 0;
  std::int64_t sg_dyn = 0;
  std::string sg_report;
  auto* sg = app.add_subcommand("suggest", "Suggested block sizes and resource budgets");
  add_arch_options(sg, common);
  add_format_option(sg, common);
  auto* sg_regs_opt = sg->add_option("--regs", sg_regs, "Registers per thread");
  sg->add_option("--smem", sg_smem, "Shared memory bytes per block");
  sg->add_option("--resource-report", sg_report, "ptxas -v output; one row per kernel")
      ->excludes(sg_regs_opt);
  sg->add_option("--dynamic-smem", sg_dyn, "Dynamic shared memory bytes per block");

  // prune
  PruneOptions pr;
  double pr_intensity = 0;
  auto* prune = app.add_subcommand("prune", "Prune a tuning space with the static analysis");
  prune->add_option("space", pr.space_file, "Tuning-space spec file (default grid otherwise)");
  add_arch_options(prune, common);
  add_format_option(prune, common);
  auto* from = prune->add_option("--from-report", pr.from_report, "JSON report from analyze");
  prune->add_option("--kernel", pr.kernel, "Kernel to take from --from-report");
  prune->add_option("--regs", pr.regs, "Registers per thread")->excludes(from);
  prune->add_option("--smem", pr.smem, "Shared memory bytes per block")->excludes(from);
  auto* inten = prune->add_option("--intensity", pr_intensity, "FLOP/memory instruction ratio");
  prune->add_option("--rule", pr.rule, "static | intensity")
      ->check(CLI::IsMember({"static", "intensity"}));

  // arch-list
  auto* list = app.add_subcommand("arch-list", "List known architectures");
  add_format_option(list, common);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("occtune");
  for (const auto& a : args) argv_store.push_back(a);
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*analyze) return cmd_analyze(common, an, out, err);
    if (*occ) return cmd_occupancy(common, occ_threads, occ_regs, occ_smem, out);
    if (*sg) return cmd_suggest(common, sg_regs, sg_smem, sg_report, sg_dyn, out);
    if (*prune) {
      if (*inten) pr.intensity = pr_intensity;
      return cmd_prune(common, pr, out, err);
    }
    if (*list) return cmd_arch_list(common, out);
  } catch (const Error& e) {
    err << "occtune: error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "occtune: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace occtune::cli
