#include <urnassoc/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace urnassoc;

namespace {

int emit(const cli::CommandResult& r, const std::string& out) {
  std::string text = r.output.dump(2) + "\n";
  std::cout << text;
  if (!out.empty()) write_text_file(out, text);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negative-dependence checks for generalized independent urn models"};
  app.require_subcommand(1);
  std::string out;

  cli::CheckOptions copt;
  std::string model_file, props, a_list, replay_file;
  int d = -1;
  auto* check = app.add_subcommand("check", "Run property checkers on a model file");
  check->add_option("model", model_file, "Model JSON");
  check->add_option("--prop", props, "Comma list, e.g. cna-occ,nmp,scp");
  check->add_option("--d", d, "Number of conditioned urns for nu_d^occ, or refinement level");
  check->add_option("--a", a_list, "Comma list of ball counts for nu_a");
  check->add_option("--cutpoints", copt.cutpoints, "Per-urn cutpoints 'c0,c1,..;c0,..' (one list applies to all)");
  check->add_option("--seed", copt.seed, "Seed for randomized field sampling");
  check->add_option("--cap", copt.cap, "Up-set / search node cap (0: defaults)");
  check->add_option("--replay", replay_file, "Re-verify the fail witnesses of a check report");

  std::string graph_file, mode = "both";
  std::uint64_t budget = kOrientationBudget;
  auto* orient = app.add_subcommand("orient", "Count admissible orientations of a multigraph");
  orient->add_option("graph", graph_file, "Graph JSON")->required();
  orient->add_option("--d", d, "Occupation spec: prefix length d");
  orient->add_option("--a", a_list, "Ball spec: comma list a_1,..,a_d");
  orient->add_option("--mode", mode, "brute, rec or both")->check(CLI::IsMember({"brute", "rec", "both"}));
  orient->add_option("--cap", budget, "Brute-force orientation budget");

  std::string config_file;
  auto* sweep = app.add_subcommand("sweep", "Run theorem-verification sweeps from a config file");
  sweep->add_option("config", config_file, "Sweep config JSON")->required();

  auto* paper = app.add_subcommand("paper-examples", "Reproduce the worked examples and counterexample searches");

  auto* refine = app.add_subcommand("refine", "Refine a model at level d");
  refine->add_option("model", model_file, "Model JSON")->required();
  refine->add_option("--d", d, "Refinement level, 0 <= d < n")->required();

  auto* replay = app.add_subcommand("replay", "Re-verify the fail witnesses of a check report");
  replay->add_option("report", replay_file, "Report JSON")->required();

  for (auto* sub : {check, orient, sweep, paper, refine, replay})
    sub->add_option("--out", out, "Also write the JSON output to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) {
      if (!replay_file.empty()) return emit(cli::cmd_replay(read_json_file(replay_file)), out);
      if (model_file.empty()) throw std::invalid_argument("check needs a model file");
      if (d >= 0) copt.d = d;
      if (!a_list.empty()) copt.a = parse_int_list(a_list);
      if (!props.empty()) copt.props = parse_list(props);
      return emit(cli::cmd_check(model_from_json(read_json_file(model_file)), copt), out);
    }
    if (*orient) {
      MultiGraph g = graph_from_json(read_json_file(graph_file));
      if ((d >= 0) == !a_list.empty()) throw std::invalid_argument("give exactly one of --d and --a");
      AdmissibilitySpec spec = d >= 0 ? AdmissibilitySpec::occ(d) : AdmissibilitySpec::balls(parse_int_list(a_list));
      return emit(cli::cmd_orient(g, spec, cli::parse_mode(mode), budget), out);
    }
    if (*sweep) return emit(cli::cmd_sweep(read_json_file(config_file)), out);
    if (*paper) return emit(cli::cmd_paper_examples(), out);
    if (*refine) return emit(cli::cmd_refine(model_from_json(read_json_file(model_file)), d), out);
    if (*replay) return emit(cli::cmd_replay(read_json_file(replay_file)), out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
