// rqpd: a workbench for relational reasoning about quantum while-programs.
//
//   rqpd run <file.qw> --input state.json [--tree-depth N]
//   rqpd check judgment.json [--samples N --seed S --pure]
//   rqpd prove outline.json [--policy strict|assume-lossless]
//   rqpd coupling --rho1 a.json --rho2 b.json --objective B.json [--support X.json] [--ppt]
//   rqpd comparable p1.qw p2.qw [--check rho1.json rho2.json]
//   rqpd casebook list | run <id> [--serial] | export <id> <dir>
//
// Exit codes: 0 pass, 1 fail, 2 inconclusive, 64 usage.

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rqpd/casebook.hpp"
#include "rqpd/comparability.hpp"
#include "rqpd/coupling.hpp"
#include "rqpd/json_io.hpp"
#include "rqpd/rules.hpp"
#include "rqpd/semantics.hpp"

using namespace rqpd;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json verdict_json(const Verdict& v) {
  json j{{"status", v.status == VerdictStatus::Passed
                        ? "passed"
                        : (v.status == VerdictStatus::Falsified ? "falsified" : "inconclusive")},
         {"samples_used", v.samples_used},
         {"worst_margin", v.worst_margin},
         {"note", v.note}};
  if (v.counterexample) j["counterexample"] = matrix_to_json(*v.counterexample);
  return j;
}

int verdict_exit(const Verdict& v) {
  switch (v.status) {
    case VerdictStatus::Passed: return kExitPass;
    case VerdictStatus::Falsified: return kExitFail;
    default: return kExitInconclusive;
  }
}

int cmd_run(const std::string& file, const std::string& input, int tree_depth, bool as_json) {
  auto prog = parse_program(slurp(file));
  auto fn = denote(prog);
  Mat rho = input.empty() ? Mat::identity(fn.dim_in()) * cplx(1.0 / fn.dim_in(), 0.0)
                          : load_matrix_file(input);
  Mat out = fn.apply(rho);
  json j{{"output", matrix_to_json(out)}, {"trace", out.trace().real()}};
  if (tree_depth > 0) {
    BranchNode tree = branch_tree({prog.prog, prog.registers, rho}, tree_depth);
    std::vector<std::pair<std::string, double>> weights;
    collect_leaf_weights(tree, "", weights);
    json w = json::array();
    for (auto& [path, wt] : weights) w.push_back({{"outcomes", path}, {"weight", wt}});
    j["branch_tree"] = w;
  }
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "output trace " << out.trace().real() << "\n"
              << j["output"].dump(2) << "\n";
  }
  return kExitPass;
}

SideCondition cond_from_cli_json(const json& c) {
  auto meas = [](const json& m) {
    Measurement out;
    for (const auto& o : m["outcomes"]) out.outcomes.push_back(o.get<int>());
    for (const auto& o : m["ops"]) out.ops.push_back(matrix_from_json(o));
    return out;
  };
  std::string type = c["type"].get<std::string>();
  if (type == "meas_eq") return MeasEqCond{meas(c["m1"]), meas(c["m2"])};
  if (type == "meas_loop_eq") {
    MeasLoopEqCond out{meas(c["m1"]), {}, meas(c["m2"]), {}};
    out.p1 = parse_program(c["body1"].get<std::string>());
    out.p2 = parse_program(c["body2"].get<std::string>());
    return out;
  }
  if (type == "separability") {
    SeparabilityCond out;
    for (const auto& part : c["partition"]) {
      std::vector<std::string> p;
      for (const auto& n : part) p.push_back(n.get<std::string>());
      out.partition.push_back(p);
    }
    return out;
  }
  throw std::runtime_error("unknown condition type: " + type);
}

int cmd_check(const std::string& file, int samples, std::uint64_t seed, bool pure,
              double tol) {
  json j = load_json_file(file);
  Judgment jd;
  jd.p1 = parse_program(slurp(j["p1"].get<std::string>()));
  jd.p2 = parse_program(slurp(j["p2"].get<std::string>()));
  if (!j.value("pretagged", false)) {
    jd.p1 = tag_copy(jd.p1, 1);
    jd.p2 = tag_copy(jd.p2, 2);
  }
  jd.pre = j["pre"].is_string() ? load_matrix_file(j["pre"].get<std::string>())
                                : matrix_from_json(j["pre"]);
  jd.post = j["post"].is_string() ? load_matrix_file(j["post"].get<std::string>())
                                  : matrix_from_json(j["post"]);
  if (j.contains("conditions"))
    for (const auto& c : j["conditions"]) jd.gamma.push_back(cond_from_cli_json(c));
  SamplerOptions opt;
  opt.count = samples;
  opt.seed = seed;
  opt.pure_only = pure;
  opt.violation_tol = tol;
  auto v = check_judgment(jd, opt);
  std::cout << verdict_json(v).dump(2) << "\n";
  return verdict_exit(v);
}

int cmd_prove(const std::string& file, const std::string& policy_name, int samples,
              std::uint64_t seed) {
  auto outline = outline_from_json(load_json_file(file));
  OutlinePolicy policy;
  policy.assume_lossless = policy_name == "assume-lossless";
  policy.sampler.count = samples;
  policy.sampler.seed = seed;
  auto rep = check_outline(outline, policy);
  json steps = json::array();
  for (const auto& s : rep.steps) {
    json obs = json::array();
    for (const auto& [ob, dr] : s.obligations)
      obs.push_back({{"what", ob.describe},
                     {"ok", dr.ok},
                     {"residual", dr.residual},
                     {"note", dr.note}});
    steps.push_back({{"rule", s.rule},
                     {"ok", s.ok},
                     {"predicate_residual", s.predicate_residual},
                     {"obligations", obs},
                     {"note", s.note}});
  }
  std::cout << json{{"ok", rep.ok}, {"steps", steps}}.dump(2) << "\n";
  return rep.ok ? kExitPass : kExitFail;
}

int cmd_coupling(const std::string& rho1, const std::string& rho2, const std::string& objective,
                 const std::string& support, bool ppt) {
  CouplingProblem p;
  p.rho1 = load_matrix_file(rho1);
  p.rho2 = load_matrix_file(rho2);
  p.objective = load_matrix_file(objective);
  if (!support.empty()) p.support = load_matrix_file(support);
  p.ppt = ppt;
  auto s = max_coupling_value(p);
  const char* status = s.status == CouplingStatus::Optimal
                           ? "optimal"
                           : s.status == CouplingStatus::Feasible
                                 ? "feasible"
                                 : s.status == CouplingStatus::Infeasible ? "infeasible"
                                                                          : "numerical-failure";
  json j{{"status", status},
         {"value", s.value},
         {"marginal_residual", s.marginal_residual},
         {"psd_residual", s.psd_residual},
         {"iterations", s.iterations},
         {"note", s.note},
         {"witness", matrix_to_json(s.witness)}};
  std::cout << j.dump(2) << "\n";
  if (s.status == CouplingStatus::Optimal || s.status == CouplingStatus::Feasible)
    return kExitPass;
  return s.status == CouplingStatus::Infeasible ? kExitFail : kExitInconclusive;
}

int cmd_comparable(const std::string& p1file, const std::string& p2file,
                   const std::vector<std::string>& check_files) {
  auto p1 = parse_program(slurp(p1file));
  auto p2 = parse_program(slurp(p2file));
  auto cs = collect_constraints(p1, p2);
  json j{{"constraints", cs.pairs.size()}};
  int exit = kExitPass;
  if (check_files.size() == 2) {
    Mat r1 = load_matrix_file(check_files[0]);
    Mat r2 = load_matrix_file(check_files[1]);
    bool ok = check_comparability(cs, r1, r2);
    j["comparable"] = ok;
    exit = ok ? kExitPass : kExitFail;
  }
  std::cout << j.dump(2) << "\n";
  return exit;
}

int cmd_casebook_run(const std::vector<std::string>& ids, const ScenarioOptions& opt,
                     bool as_json) {
  std::vector<std::string> todo = ids;
  if (todo.empty())
    for (const auto& s : scenario_catalog()) todo.push_back(s.id);
  std::vector<Report> reports(todo.size());
  if (opt.serial) {
    for (std::size_t i = 0; i < todo.size(); ++i) reports[i] = run_scenario(todo[i], opt);
  } else {
    std::vector<std::future<Report>> futs;
    for (const auto& id : todo)
      futs.push_back(std::async(std::launch::async, [&, id] { return run_scenario(id, opt); }));
    for (std::size_t i = 0; i < futs.size(); ++i) reports[i] = futs[i].get();
  }
  bool all_ok = true, inconclusive = false;
  json out = json::array();
  for (const auto& r : reports) {
    out.push_back(report_to_json(r));
    all_ok = all_ok && r.ok();
    inconclusive = inconclusive || r.inconclusive();
    if (!as_json) {
      std::cout << (r.ok() ? "[pass] " : "[FAIL] ") << r.scenario << " (" << int(r.runtime_ms)
                << " ms)\n";
      for (const auto& c : r.checks) {
        std::cout << "    [" << c.status << "] " << c.name;
        if (!c.note.empty()) std::cout << "  -- " << c.note;
        std::cout << "\n";
      }
    }
  }
  if (as_json) std::cout << out.dump(2) << "\n";
  if (!all_ok) return kExitFail;
  return inconclusive ? kExitInconclusive : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for relational reasoning about quantum while-programs"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int samples = 200;
  double tol = 1e-5;
  bool as_json = false;
  app.add_option("--seed", seed, "sampler seed")->capture_default_str();
  app.add_option("--samples", samples, "sample count for empirical checks")
      ->capture_default_str();
  app.add_option("--tol", tol, "violation tolerance for sampled checks")
      ->capture_default_str();
  app.add_flag("--json", as_json, "machine-readable output");

  auto* run = app.add_subcommand("run", "evaluate a program on an input state");
  std::string run_file, run_input;
  int tree_depth = 0;
  run->add_option("file", run_file, ".qw program")->required();
  run->add_option("--input", run_input, "input state json");
  run->add_option("--tree-depth", tree_depth, "also print the branching tree to this depth");

  auto* check = app.add_subcommand("check", "sampled semantic check of a judgment");
  std::string check_file;
  bool pure = false;
  check->add_option("judgment", check_file, "judgment bundle json")->required();
  check->add_flag("--pure", pure, "sample pure joint inputs only");

  auto* prove = app.add_subcommand("prove", "check an annotated proof outline");
  std::string prove_file, policy = "strict";
  prove->add_option("outline", prove_file, "outline json")->required();
  prove->add_option("--policy", policy, "strict | assume-lossless")
      ->check(CLI::IsMember({"strict", "assume-lossless"}));

  auto* coupling = app.add_subcommand("coupling", "maximize an observable over couplings");
  std::string c_rho1, c_rho2, c_obj, c_support;
  bool c_ppt = false;
  coupling->add_option("--rho1", c_rho1)->required();
  coupling->add_option("--rho2", c_rho2)->required();
  coupling->add_option("--objective", c_obj)->required();
  coupling->add_option("--support", c_support, "restrict support to this projector");
  coupling->add_flag("--ppt", c_ppt, "restrict to PPT couplings");

  auto* comparable = app.add_subcommand("comparable", "branching-tree comparability constraints");
  std::string cp1, cp2;
  std::vector<std::string> check_states;
  comparable->add_option("p1", cp1)->required();
  comparable->add_option("p2", cp2)->required();
  comparable->add_option("--check", check_states, "rho1.json rho2.json")->expected(2);

  auto* casebook = app.add_subcommand("casebook", "paper case studies");
  auto* cb_list = casebook->add_subcommand("list", "list scenarios");
  auto* cb_run = casebook->add_subcommand("run", "run scenarios (all when none named)");
  std::vector<std::string> cb_ids;
  bool serial = false;
  cb_run->add_option("ids", cb_ids, "scenario ids");
  cb_run->add_flag("--serial", serial, "run one at a time");
  auto* cb_export = casebook->add_subcommand("export", "write a scenario fixture tree");
  std::string cb_export_id, cb_export_dir;
  cb_export->add_option("id", cb_export_id)->required();
  cb_export->add_option("dir", cb_export_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_file, run_input, tree_depth, as_json);
    if (*check) return cmd_check(check_file, samples, seed, pure, tol);
    if (*prove) return cmd_prove(prove_file, policy, samples, seed);
    if (*coupling) return cmd_coupling(c_rho1, c_rho2, c_obj, c_support, c_ppt);
    if (*comparable) return cmd_comparable(cp1, cp2, check_states);
    if (*casebook) {
      if (*cb_list) {
        for (const auto& s : scenario_catalog())
          std::cout << s.id << "  -  " << s.description << "\n";
        return kExitPass;
      }
      if (*cb_export) {
        find_scenario(cb_export_id).export_fixture(cb_export_dir);
        std::cout << "wrote " << cb_export_dir << "\n";
        return kExitPass;
      }
      ScenarioOptions opt;
      opt.seed = seed;
      opt.samples = std::min(samples, 60);
      opt.tol = tol;
      opt.serial = serial;
      return cmd_casebook_run(cb_ids, opt, as_json);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
