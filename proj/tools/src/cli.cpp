#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "kpbench/error.hpp"
#include "kpbench/image_io.hpp"
#include "kpbench/version.hpp"

namespace kpbench::cli {
namespace {

// Flattened config entries: name (dashes, no leading "--") -> values.
using ConfigEntries = std::vector<CLI::ConfigItem>;

void flatten_json(const nlohmann::json& node, std::vector<std::string> parents, ConfigEntries& out) {
  for (const auto& [key, value] : node.items()) {
    if (value.is_object()) {
      auto p = parents;
      p.push_back(key);
      flatten_json(value, p, out);
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    auto text = [](const nlohmann::json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(text(v));
    } else {
      item.inputs.push_back(text(value));
    }
    out.push_back(std::move(item));
  }
}

ConfigEntries read_config(const std::string& path) {
  const auto bytes = read_file(path);
  const std::string text(bytes.begin(), bytes.end());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError(path + ": malformed JSON config");
    ConfigEntries out;
    flatten_json(doc, {}, out);
    return out;
  }
  std::istringstream in(text);
  ConfigEntries items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  std::erase_if(items, [](const CLI::ConfigItem& i) { return i.name == "++" || i.name == "--"; });
  return items;
}

// Fills options of `sub` that were not given on the command line from the
// config file. Keys may sit at top level or in a section named after the
// subcommand.
void apply_config(CLI::App& sub, const std::string& path) {
  for (const auto& item : read_config(path)) {
    if (!item.parents.empty() && (item.parents.size() != 1 || item.parents[0] != sub.get_name())) {
      continue;
    }
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + name);
    if (opt == nullptr) throw ConfigError(path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

void apply_workers_env(CLI::Option* workers_opt, int& workers) {
  if (workers_opt->count() > 0) return;
  const char* env = std::getenv("BENCH_WORKERS");
  if (env == nullptr || *env == '\0') return;
  try {
    std::size_t used = 0;
    workers = std::stoi(env, &used);
    if (env[used] != '\0') throw std::invalid_argument(env);
  } catch (const std::exception&) {
    throw ConfigError(std::string("BENCH_WORKERS is not an integer: ") + env);
  }
}

std::vector<CorruptionKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<CorruptionKind> kinds;
  for (const auto& n : names) {
    if (n == "all") return {kAllCorruptions.begin(), kAllCorruptions.end()};
    const auto k = parse_corruption_kind(n);
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  return kinds;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
  return kExitValidation;
}

void print_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keypoint corruption-robustness benchmark tool", "kpbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kpbench::version()));

  std::string config_path;
  int workers = 1;
  // Enforced after the config file is applied, so it can supply them.
  std::vector<std::pair<const CLI::App*, const CLI::Option*>> required;

  // corrupt
  CorruptOptions corrupt;
  std::string profile = "coco";
  std::vector<std::string> kinds{"all"};
  std::optional<int> mask_fill;
  std::optional<std::string> corrupt_sigmas;
  auto* c = app.add_subcommand("corrupt", "Write corrupted copies of a dataset");
  c->add_option("--config", config_path, "TOML or JSON config file");
  required.emplace_back(c, c->add_option("--annotations", corrupt.annotations, "COCO keypoints ground truth"));
  required.emplace_back(c, c->add_option("--images", corrupt.images, "Directory holding the clean images"));
  required.emplace_back(c, c->add_option("--out", corrupt.out, "Output root"));
  c->add_option("--profile", profile, "Dataset profile: coco, ochuman, ap10k");
  c->add_option("--seed", corrupt.seed, "Global seed");
  c->add_option("--corruptions", kinds, "Corruption names or 'all'")->delimiter(',');
  c->add_option("--severities", corrupt.severities, "Severity levels 1-5")->delimiter(',');
  auto* c_workers = c->add_option("--workers", workers, "Worker threads (env BENCH_WORKERS)");
  c->add_flag("--force", corrupt.force, "Overwrite existing outputs");
  c->add_flag("--resume", corrupt.resume, "Keep outputs whose digest matches the manifest");
  c->add_option("--noise-gain", corrupt.noise_gain, "Gaussian noise sigma multiplier");
  c->add_option("--mask-fill", mask_fill, "Mask fill value 0-255");
  c->add_option("--sigmas", corrupt_sigmas, "OKS sigmas file");

  // evaluate
  EvaluateOptions evaluate;
  std::optional<std::string> eval_out;
  std::optional<std::string> eval_sigmas;
  std::string ignore_policy = "ignore";
  auto* e = app.add_subcommand("evaluate", "OKS mAP/mAR of a prediction file");
  e->add_option("--config", config_path, "TOML or JSON config file");
  required.emplace_back(e, e->add_option("--gt", evaluate.gt, "COCO keypoints ground truth"));
  required.emplace_back(e, e->add_option("--predictions", evaluate.predictions, "COCO results file"));
  e->add_option("--out", eval_out, "Metrics JSON output path");
  e->add_option("--sigmas", eval_sigmas, "OKS sigmas file");
  auto* e_workers = e->add_option("--workers", workers, "Worker threads (env BENCH_WORKERS)");
  e->add_option("--max-dets", evaluate.max_detections, "Detections kept per image");
  e->add_option("--ignore-policy", ignore_policy, "ignore or drop crowd / unlabeled instances")
      ->check(CLI::IsMember({"ignore", "drop"}));
  e->add_option("--unannotated-oks", evaluate.unannotated_oks,
                "Ignore unmatched detections farther than this OKS from every gt");

  // report
  ReportCommandOptions report;
  std::optional<std::string> report_out;
  auto* r = app.add_subcommand("report", "Robustness tables from metric files");
  r->add_option("--config", config_path, "TOML or JSON config file");
  required.emplace_back(r, r->add_option("--clean", report.clean, "Clean metrics JSON"));
  required.emplace_back(r, r->add_option("--runs", report.runs, "Directory of <corruption>/<severity>.json"));
  r->add_option("--format", report.format, "markdown or csv (stdout)");
  r->add_option("--out", report_out, "Write <out>.md and <out>.csv");
  r->add_flag("--allow-partial", report.allow_partial, "Accept an incomplete grid");
  r->add_option("--label", report.label, "Model name for the summary row");

  // augment
  AugmentOptions augment;
  std::optional<std::string> ranges;
  auto* a = app.add_subcommand("augment", "Export augmented copies of a dataset");
  a->add_option("--config", config_path, "TOML or JSON config file");
  required.emplace_back(a, a->add_option("--annotations", augment.annotations, "COCO keypoints ground truth"));
  required.emplace_back(a, a->add_option("--images", augment.images, "Directory holding the clean images"));
  required.emplace_back(a, a->add_option("--out", augment.out, "Output root"));
  required.emplace_back(a, a->add_option("--sets", augment.sets, "Augmentation sets, e.g. A,B"));
  a->add_option("--copies", augment.copies, "Augmented copies per image");
  a->add_option("--seed", augment.seed, "Global seed");
  auto* a_workers = a->add_option("--workers", workers, "Worker threads (env BENCH_WORKERS)");
  a->add_option("--probability", augment.probability, "Per-transform probability");
  a->add_option("--ranges", ranges, "JSON parameter range overrides");
  a->add_flag("--force", augment.force, "Overwrite an existing export");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(*sub, config_path);
    for (const auto& [owner, opt] : required) {
      if (owner == sub && opt->count() == 0) {
        throw CLI::RequiredError(opt->get_name());
      }
    }
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const std::exception& ex) {
    print_error(err, ex);
    return exit_code_for(ex);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == c) {
      apply_workers_env(c_workers, workers);
      corrupt.workers = workers;
      corrupt.profile = parse_dataset_profile(profile);
      corrupt.corruptions = parse_kinds(kinds);
      corrupt.mask_fill = mask_fill;
      if (corrupt_sigmas) corrupt.sigmas = *corrupt_sigmas;
      const auto result = cmd_corrupt(corrupt, err);
      if (!result.failures.empty()) {
        for (const auto& f : result.failures) err << "failed: " << f << "\n";
        return kExitPartial;
      }
    } else if (sub == e) {
      apply_workers_env(e_workers, workers);
      evaluate.workers = workers;
      evaluate.ignore_policy = ignore_policy == "drop" ? IgnorePolicy::kDrop : IgnorePolicy::kIgnore;
      if (eval_out) evaluate.out = *eval_out;
      if (eval_sigmas) evaluate.sigmas = *eval_sigmas;
      cmd_evaluate(evaluate, out);
    } else if (sub == r) {
      if (report_out) report.out = *report_out;
      cmd_report(report, out);
    } else if (sub == a) {
      apply_workers_env(a_workers, workers);
      augment.workers = workers;
      if (ranges) augment.ranges = *ranges;
      cmd_augment(augment, err);
    }
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    print_error(err, ex);
    return exit_code_for(ex);
  }
  return kExitOk;
}

}  // namespace kpbench::cli
