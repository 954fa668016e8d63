// Copyright 2026 The Preflab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. All core functionality goes through the C API in
// preflab/preflab.h; this file only parses flags, moves bytes between files,
// and formats the report summary.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "preflab/preflab.h"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

// Owns a string allocated by the library.
struct OwnedStr {
  char* ptr = nullptr;
  ~OwnedStr() { preflab_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

int Die(const std::string& context) {
  std::fprintf(stderr, "error: %s: %s\n", context.c_str(), preflab_last_error_message());
  return 1;
}

int DiePlain(const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return 1;
}

bool ReadFileToString(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

bool WriteStringToFile(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  return static_cast<bool>(out);
}

std::string JoinArgs(int argc, char** argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

// Common --config/--set handling: the config file is optional (defaults
// apply), --set entries override file values.
struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;

  void Attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "experiment config JSON file");
    cmd->add_option("--set", sets, "override config values, e.g. --set train.learning_rate=0.1");
  }

  bool LoadText(std::string* out) const {
    if (path.empty()) {
      *out = "{}";
      return true;
    }
    return ReadFileToString(path, out);
  }

  std::vector<const char*> SetPtrs() const {
    std::vector<const char*> ptrs;
    ptrs.reserve(sets.size());
    for (const std::string& s : sets) ptrs.push_back(s.c_str());
    return ptrs;
  }
};

// Every file-producing run leaves a provenance file next to its output.
int WriteMetadata(const ConfigArgs& cfg, const std::string& command,
                  const std::string& out_path) {
  std::string text;
  if (!cfg.LoadText(&text)) return DiePlain("cannot read config file " + cfg.path);
  auto ptrs = cfg.SetPtrs();
  OwnedStr meta;
  if (preflab_metadata_json(text.c_str(), ptrs.data(), static_cast<int>(ptrs.size()),
                            command.c_str(), &meta.ptr) != PREFLAB_OK) {
    return Die("metadata");
  }
  std::string path = out_path + ".meta.json";
  if (!WriteStringToFile(path, meta.str())) return DiePlain("cannot write " + path);
  return 0;
}

int ResolveConfig(const ConfigArgs& cfg, std::string* out_json) {
  std::string text;
  if (!cfg.LoadText(&text)) return DiePlain("cannot read config file " + cfg.path);
  auto ptrs = cfg.SetPtrs();
  OwnedStr resolved;
  if (preflab_config_resolve(text.c_str(), ptrs.data(), static_cast<int>(ptrs.size()),
                             &resolved.ptr) != PREFLAB_OK) {
    return Die("config");
  }
  *out_json = resolved.str();
  return 0;
}

int RunReport(const std::string& from_dir, const std::string& out_dir) {
  std::vector<fs::path> inputs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(from_dir, ec)) {
    if (entry.path().extension() == ".json") inputs.push_back(entry.path());
  }
  if (ec) return DiePlain("cannot read directory " + from_dir);
  std::sort(inputs.begin(), inputs.end());

  std::string csv = "source,experiment,train_size,wins,losses,draws,winrate\n";
  std::string md = "# Experiment summary\n";
  size_t used = 0;
  for (const fs::path& p : inputs) {
    std::string text;
    if (!ReadFileToString(p.string(), &text)) continue;
    nlohmann::json rows = nlohmann::json::parse(text, nullptr, false);
    if (rows.is_discarded() || !rows.is_array()) continue;
    bool shaped = true;
    for (const auto& row : rows) {
      if (!row.is_object() || !row.contains("experiment") || !row.contains("winrate")) {
        shaped = false;
        break;
      }
    }
    if (!shaped || rows.empty()) continue;
    ++used;
    std::string source = p.stem().string();
    md += "\n## " + source + "\n\n";
    md += "| experiment | train_size | wins | losses | draws | winrate |\n";
    md += "|---|---|---|---|---|---|\n";
    char line[256];
    for (const auto& row : rows) {
      std::snprintf(line, sizeof(line), "%s,%s,%llu,%llu,%llu,%llu,%.9f\n", source.c_str(),
                    row["experiment"].get<std::string>().c_str(),
                    static_cast<unsigned long long>(row["train_size"].get<uint64_t>()),
                    static_cast<unsigned long long>(row["wins"].get<uint64_t>()),
                    static_cast<unsigned long long>(row["losses"].get<uint64_t>()),
                    static_cast<unsigned long long>(row["draws"].get<uint64_t>()),
                    row["winrate"].get<double>());
      csv += line;
      std::snprintf(line, sizeof(line), "| %s | %llu | %llu | %llu | %llu | %.4f |\n",
                    row["experiment"].get<std::string>().c_str(),
                    static_cast<unsigned long long>(row["train_size"].get<uint64_t>()),
                    static_cast<unsigned long long>(row["wins"].get<uint64_t>()),
                    static_cast<unsigned long long>(row["losses"].get<uint64_t>()),
                    static_cast<unsigned long long>(row["draws"].get<uint64_t>()),
                    row["winrate"].get<double>());
      md += line;
    }
  }
  if (used == 0) return DiePlain("no curve reports (*.json) found in " + from_dir);
  std::error_code mk;
  fs::create_directories(out_dir, mk);
  if (!WriteStringToFile((fs::path(out_dir) / "summary.csv").string(), csv) ||
      !WriteStringToFile((fs::path(out_dir) / "summary.md").string(), md)) {
    return DiePlain("cannot write summary files to " + out_dir);
  }
  std::printf("collated %zu report(s) into %s\n", used, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"preflab: a desk-scale preference-learning lab"};
  app.require_subcommand(1);
  const std::string command_line = JoinArgs(argc, argv);

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "generate synthetic preference records");
  ConfigArgs gd_cfg;
  gd_cfg.Attach(gen_data);
  int64_t gd_n = 0;
  std::string gd_out;
  gen_data->add_option("--n", gd_n, "number of records")->required();
  gen_data->add_option("--out", gd_out, "output JSONL path")->required();

  // gen-rationales
  auto* gen_rat = app.add_subcommand("gen-rationales",
                                     "attach model-written rationales via the HTTP service "
                                     "(api key from PREFLAB_API_KEY)");
  ConfigArgs gr_cfg;
  gr_cfg.Attach(gen_rat);
  std::string gr_in, gr_kind, gr_out;
  bool gr_overwrite = false;
  gen_rat->add_option("--in", gr_in, "input JSONL")->required();
  gen_rat->add_option("--kind", gr_kind, "general|detailed")->required();
  gen_rat->add_option("--out", gr_out, "output JSONL")->required();
  gen_rat->add_flag("--overwrite", gr_overwrite, "replace existing rationales");

  // corrupt
  auto* corrupt = app.add_subcommand("corrupt", "corrupt rationales (permute|opposite)");
  std::string co_in, co_mode, co_out;
  uint64_t co_seed = 1;
  corrupt->add_option("--in", co_in, "input JSONL")->required();
  corrupt->add_option("--mode", co_mode, "permute|opposite")->required();
  corrupt->add_option("--seed", co_seed, "derangement seed");
  corrupt->add_option("--out", co_out, "output JSONL")->required();

  // train
  auto* train = app.add_subcommand("train", "train a policy on a preference dataset");
  ConfigArgs tr_cfg;
  tr_cfg.Attach(train);
  std::string tr_objective, tr_data, tr_out, tr_init, tr_ref, tr_metrics;
  train->add_option("--objective", tr_objective, "sft|dpo|rdpo|orpo|rorpo")->required();
  train->add_option("--data", tr_data, "training JSONL")->required();
  train->add_option("--out", tr_out, "output checkpoint")->required();
  train->add_option("--init", tr_init, "starting checkpoint (default: fresh init)");
  train->add_option("--ref", tr_ref, "reference checkpoint (default: frozen start copy)");
  train->add_option("--metrics", tr_metrics, "per-step loss CSV");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluation experiments");
  eval->require_subcommand(1);

  auto* ev_win = eval->add_subcommand("winrate", "head-to-head winrate of two checkpoints");
  ConfigArgs ew_cfg;
  ew_cfg.Attach(ev_win);
  std::string ew_a, ew_b, ew_out;
  ev_win->add_option("--a", ew_a, "checkpoint A")->required();
  ev_win->add_option("--b", ew_b, "checkpoint B")->required();
  ev_win->add_option("--out", ew_out, "output CSV")->required();

  auto* ev_curve = eval->add_subcommand("curve", "sample-efficiency curves vs the SFT model");
  ConfigArgs ec_cfg;
  ec_cfg.Attach(ev_curve);
  std::string ec_objectives = "dpo,rdpo";
  std::string ec_sizes = "100,200,400,800,1600";
  std::string ec_out, ec_json;
  uint64_t ec_seed = 1;
  ev_curve->add_option("--objectives", ec_objectives, "comma list of objectives");
  ev_curve->add_option("--sizes", ec_sizes, "comma list of train sizes");
  ev_curve->add_option("--seed", ec_seed, "experiment seed");
  ev_curve->add_option("--out", ec_out, "output CSV")->required();
  ev_curve->add_option("--json", ec_json, "also write the JSON report here");

  auto* ev_corr = eval->add_subcommand("corruption", "original vs corrupted-rationale training");
  ConfigArgs eco_cfg;
  eco_cfg.Attach(ev_corr);
  std::string eco_modes = "permute,opposite";
  std::string eco_out, eco_json;
  uint64_t eco_seed = 1;
  ev_corr->add_option("--modes", eco_modes, "comma list out of none|permute|opposite");
  ev_corr->add_option("--seed", eco_seed, "experiment seed");
  ev_corr->add_option("--out", eco_out, "output CSV")->required();
  ev_corr->add_option("--json", eco_json, "also write the JSON report here");

  auto* ev_h2h = eval->add_subcommand("headtohead",
                                      "rationale objective vs its rationale-free counterpart");
  ConfigArgs eh_cfg;
  eh_cfg.Attach(ev_h2h);
  std::string eh_out, eh_json;
  uint64_t eh_seed = 1;
  ev_h2h->add_option("--seed", eh_seed, "experiment seed");
  ev_h2h->add_option("--out", eh_out, "output CSV")->required();
  ev_h2h->add_option("--json", eh_json, "also write the JSON report here");

  // mi
  auto* mi = app.add_subcommand("mi", "conditional mutual information of the rationale channel");
  double mi_p = 0.5, mi_eps = 0.0, mi_alpha = 0.0, mi_beta = 1.0;
  int64_t mi_mc = 0;
  uint64_t mi_seed = 1;
  mi->add_option("--p", mi_p, "base preference probability");
  mi->add_option("--eps", mi_eps, "additive bias");
  mi->add_option("--alpha", mi_alpha, "P(R=1|Z=0)");
  mi->add_option("--beta", mi_beta, "P(R=1|Z=1)");
  mi->add_option("--mc", mi_mc, "also print a Monte Carlo estimate over this many samples");
  mi->add_option("--seed", mi_seed, "Monte Carlo seed");

  auto* mi_sweep = mi->add_subcommand("sweep", "CSV sweep over the moderate channel");
  double ms_p = 0.5, ms_eps = 0.0;
  int32_t ms_points = 51;
  std::string ms_out;
  mi_sweep->add_option("--p", ms_p, "base preference probability");
  mi_sweep->add_option("--eps", ms_eps, "additive bias");
  mi_sweep->add_option("--points", ms_points, "grid points over gamma in [0, 0.5]");
  mi_sweep->add_option("--out", ms_out, "output CSV (default: stdout)");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "generalization bounds with/without rationales");
  double bo_sigma = 1.0, bo_n = 100.0, bo_itz = 0.0, bo_delta = 0.0, bo_eta1 = 0.0,
         bo_itsz = 0.0;
  std::string bo_grid, bo_out;
  bounds->add_option("--sigma", bo_sigma, "subgaussian scale");
  bounds->add_option("--n", bo_n, "sample count");
  bounds->add_option("--i-theta-z", bo_itz, "I(theta;Z)");
  bounds->add_option("--delta", bo_delta, "rationale information deficit cap");
  bounds->add_option("--eta1", bo_eta1, "channel slack");
  bounds->add_option("--i-theta-s-z", bo_itsz, "I(theta;S|Z)");
  bounds->add_option("--n-grid", bo_grid, "comma list of sample counts for a CSV sweep");
  bounds->add_option("--out", bo_out, "CSV output path for --n-grid (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "collate JSON curve reports into a summary");
  std::string rp_from, rp_out;
  report->add_option("--from", rp_from, "directory with *.json curve reports")->required();
  report->add_option("--out", rp_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen_data->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(gd_cfg, &cfg_json); rc != 0) return rc;
    if (preflab_gen_data(cfg_json.c_str(), gd_n, gd_out.c_str()) != PREFLAB_OK) {
      return Die("gen-data");
    }
    if (int rc = WriteMetadata(gd_cfg, command_line, gd_out); rc != 0) return rc;
    std::printf("wrote %lld records to %s\n", static_cast<long long>(gd_n), gd_out.c_str());
    return 0;
  }

  if (gen_rat->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(gr_cfg, &cfg_json); rc != 0) return rc;
    int64_t failures = 0;
    if (preflab_gen_rationales(cfg_json.c_str(), gr_in.c_str(), gr_kind.c_str(),
                               gr_overwrite ? 1 : 0, gr_out.c_str(), &failures) != PREFLAB_OK) {
      return Die("gen-rationales");
    }
    if (int rc = WriteMetadata(gr_cfg, command_line, gr_out); rc != 0) return rc;
    if (failures > 0) {
      std::fprintf(stderr, "gen-rationales: %lld record(s) failed; see messages above\n",
                   static_cast<long long>(failures));
      return 1;
    }
    std::printf("wrote rationales to %s\n", gr_out.c_str());
    return 0;
  }

  if (corrupt->parsed()) {
    if (preflab_corrupt(co_in.c_str(), co_mode.c_str(), co_seed, co_out.c_str()) != PREFLAB_OK) {
      return Die("corrupt");
    }
    std::printf("wrote corrupted dataset to %s\n", co_out.c_str());
    return 0;
  }

  if (train->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(tr_cfg, &cfg_json); rc != 0) return rc;
    if (preflab_train(cfg_json.c_str(), tr_objective.c_str(), tr_data.c_str(),
                      tr_init.empty() ? nullptr : tr_init.c_str(),
                      tr_ref.empty() ? nullptr : tr_ref.c_str(), tr_out.c_str(),
                      tr_metrics.empty() ? nullptr : tr_metrics.c_str()) != PREFLAB_OK) {
      return Die("train");
    }
    if (int rc = WriteMetadata(tr_cfg, command_line, tr_out); rc != 0) return rc;
    std::printf("wrote checkpoint %s\n", tr_out.c_str());
    return 0;
  }

  if (ev_win->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(ew_cfg, &cfg_json); rc != 0) return rc;
    OwnedStr csv;
    if (preflab_eval_winrate(cfg_json.c_str(), ew_a.c_str(), ew_b.c_str(), &csv.ptr) !=
        PREFLAB_OK) {
      return Die("eval winrate");
    }
    if (!WriteStringToFile(ew_out, csv.str())) return DiePlain("cannot write " + ew_out);
    if (int rc = WriteMetadata(ew_cfg, command_line, ew_out); rc != 0) return rc;
    std::printf("%s", csv.str().c_str());
    return 0;
  }

  if (ev_curve->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(ec_cfg, &cfg_json); rc != 0) return rc;
    OwnedStr csv, json;
    if (preflab_eval_curve(cfg_json.c_str(), ec_objectives.c_str(), ec_sizes.c_str(), ec_seed,
                           &csv.ptr, &json.ptr) != PREFLAB_OK) {
      return Die("eval curve");
    }
    if (!WriteStringToFile(ec_out, csv.str())) return DiePlain("cannot write " + ec_out);
    if (!ec_json.empty() && !WriteStringToFile(ec_json, json.str())) {
      return DiePlain("cannot write " + ec_json);
    }
    if (int rc = WriteMetadata(ec_cfg, command_line, ec_out); rc != 0) return rc;
    std::printf("%s", csv.str().c_str());
    return 0;
  }

  if (ev_corr->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(eco_cfg, &cfg_json); rc != 0) return rc;
    OwnedStr csv, json;
    if (preflab_eval_corruption(cfg_json.c_str(), eco_modes.c_str(), eco_seed, &csv.ptr,
                                &json.ptr) != PREFLAB_OK) {
      return Die("eval corruption");
    }
    if (!WriteStringToFile(eco_out, csv.str())) return DiePlain("cannot write " + eco_out);
    if (!eco_json.empty() && !WriteStringToFile(eco_json, json.str())) {
      return DiePlain("cannot write " + eco_json);
    }
    if (int rc = WriteMetadata(eco_cfg, command_line, eco_out); rc != 0) return rc;
    std::printf("%s", csv.str().c_str());
    return 0;
  }

  if (ev_h2h->parsed()) {
    std::string cfg_json;
    if (int rc = ResolveConfig(eh_cfg, &cfg_json); rc != 0) return rc;
    OwnedStr csv, json;
    if (preflab_eval_headtohead(cfg_json.c_str(), eh_seed, &csv.ptr, &json.ptr) != PREFLAB_OK) {
      return Die("eval headtohead");
    }
    if (!WriteStringToFile(eh_out, csv.str())) return DiePlain("cannot write " + eh_out);
    if (!eh_json.empty() && !WriteStringToFile(eh_json, json.str())) {
      return DiePlain("cannot write " + eh_json);
    }
    if (int rc = WriteMetadata(eh_cfg, command_line, eh_out); rc != 0) return rc;
    std::printf("%s", csv.str().c_str());
    return 0;
  }

  if (mi_sweep->parsed()) {
    OwnedStr csv;
    if (preflab_mi_sweep_csv(ms_p, ms_eps, ms_points, &csv.ptr) != PREFLAB_OK) {
      return Die("mi sweep");
    }
    if (ms_out.empty()) {
      std::printf("%s", csv.str().c_str());
    } else if (!WriteStringToFile(ms_out, csv.str())) {
      return DiePlain("cannot write " + ms_out);
    }
    return 0;
  }

  if (mi->parsed()) {
    double v = 0.0;
    if (preflab_mutual_info(mi_p, mi_eps, mi_alpha, mi_beta, &v) != PREFLAB_OK) {
      return Die("mi");
    }
    std::printf("%.6f\n", v);
    if (mi_mc > 0) {
      double est = 0.0, se = 0.0;
      if (preflab_mutual_info_mc(mi_p, mi_eps, mi_alpha, mi_beta, mi_mc, mi_seed, &est, &se) !=
          PREFLAB_OK) {
        return Die("mi --mc");
      }
      std::printf("mc_estimate %.6f\nmc_std_err %.6f\n", est, se);
    }
    return 0;
  }

  if (bounds->parsed()) {
    if (!bo_grid.empty()) {
      std::vector<double> ns;
      std::stringstream ss(bo_grid);
      std::string part;
      while (std::getline(ss, part, ',')) {
        char* end = nullptr;
        double v = std::strtod(part.c_str(), &end);
        if (part.empty() || end == part.c_str() || *end != '\0') {
          return DiePlain("--n-grid has a bad entry: '" + part + "'");
        }
        ns.push_back(v);
      }
      OwnedStr csv;
      if (preflab_bounds_csv(bo_sigma, bo_itz, bo_delta, bo_eta1, bo_itsz, ns.data(),
                             static_cast<int32_t>(ns.size()), &csv.ptr) != PREFLAB_OK) {
        return Die("bounds");
      }
      if (bo_out.empty()) {
        std::printf("%s", csv.str().c_str());
      } else if (!WriteStringToFile(bo_out, csv.str())) {
        return DiePlain("cannot write " + bo_out);
      }
      return 0;
    }
    double with_r = 0.0, without_r = 0.0;
    if (preflab_gen_bounds(bo_sigma, bo_n, bo_itz, bo_delta, bo_eta1, bo_itsz, &with_r,
                           &without_r) != PREFLAB_OK) {
      return Die("bounds");
    }
    std::printf("with_rationale %.6f\nwithout_rationale %.6f\n", with_r, without_r);
    return 0;
  }

  if (report->parsed()) {
    return RunReport(rp_from, rp_out);
  }

  return DiePlain("no subcommand handled");
}
