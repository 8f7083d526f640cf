#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latdec/error.hpp"
#include "latdec/harness.hpp"

namespace {

struct Options {
  latdec::RunSpec spec;
  std::string algo = "bfs";
  std::string recomb = "none";
  std::string profile = "custom";
  std::string metric = "auto";
};

void add_run_options(CLI::App* cmd, Options& o) {
  auto& s = o.spec;
  auto& c = s.search;
  cmd->add_option("input", s.input_path, "Source sequences, one per line")->required();
  cmd->add_option("--model", s.model.table_path, "TableModel JSON file");
  cmd->add_option("--corpus", s.model.corpus_path, "Train a Markov model on this corpus");
  cmd->add_option("--order", s.model.order, "Markov model order")->capture_default_str();
  cmd->add_option("--smoothing", s.model.smoothing, "Markov add-delta smoothing")->capture_default_str();
  cmd->add_option("--bridge-cmd", s.model.bridge_cmd, "Shell command starting a scoring bridge");
  cmd->add_option("--algo", o.algo, "Decoding algorithm")
      ->check(CLI::IsMember({"greedy", "beam", "dbs", "nucleus", "temp", "bfs"}))
      ->capture_default_str();
  cmd->add_option("--recomb", o.recomb, "Recombination strategy")
      ->check(CLI::IsMember({"none", "zbeam", "rcb", "zip"}))
      ->capture_default_str();
  cmd->add_option("-k", c.beam_size, "Beam size / sample count")->capture_default_str();
  cmd->add_option("--budget", c.budget, "Model-call budget (default k*T)");
  cmd->add_option("--top-k", c.top_k, "Successors considered per expansion")->capture_default_str();
  cmd->add_option("--lambda", c.length_reward, "Per-token length reward")->capture_default_str();
  cmd->add_option("-p", c.nucleus_p, "Nucleus mass")->capture_default_str();
  cmd->add_option("--tau", c.temperature, "Sampling temperature")->capture_default_str();
  cmd->add_option("--groups", c.groups, "Diverse beam groups (default k)");
  cmd->add_option("--div-strength", c.diversity_strength, "Diversity penalty strength")->capture_default_str();
  cmd->add_option("--max-len", c.max_len, "Maximum generated length (default by profile)");
  cmd->add_option("--suffix-n", c.recomb.suffix_n, "Suffix length for merging")->capture_default_str();
  cmd->add_option("--alpha", c.recomb.alpha, "Length tolerance for merging")->capture_default_str();
  cmd->add_option("--seed", s.seed, "Root random seed")->capture_default_str();
  cmd->add_option("--out", s.out_dir, "Output directory");
  cmd->add_option("--refs", s.refs_path, "References aligned with the input");
  cmd->add_option("--profile", o.profile, "Task profile")
      ->check(CLI::IsMember({"translation", "summarization", "custom"}))
      ->capture_default_str();
  cmd->add_option("--budget-multiplier", s.budget_multiplier, "Beam widening for the custom profile")
      ->capture_default_str();
  cmd->add_option("--metric", o.metric, "Reference metric")
      ->check(CLI::IsMember({"auto", "rouge", "bleu", "none"}))
      ->capture_default_str();
  cmd->add_option("--jobs", s.jobs, "Parallel workers")->capture_default_str();
}

latdec::RunSpec finish(Options o) {
  o.spec.search.algorithm = *latdec::parse_algorithm(o.algo);
  o.spec.search.recomb.strategy = *latdec::parse_recomb_strategy(o.recomb);
  o.spec.profile = *latdec::parse_task_profile(o.profile);
  o.spec.metric = *latdec::parse_metric_choice(o.metric);
  return o.spec;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  latdec::init_logging();
  CLI::App app{"Lattice decoding: best-first search with hypothesis recombination"};
  app.require_subcommand(1);

  Options decode_opts, sweep_opts, merge_opts;
  decode_opts.spec.search.max_len = sweep_opts.spec.search.max_len = merge_opts.spec.search.max_len = 0;

  auto* decode = app.add_subcommand("decode", "Decode every input line and write lattices and reports");
  add_run_options(decode, decode_opts);

  auto* sweep = app.add_subcommand("sweep", "Decode once per value of one setting and write a CSV");
  add_run_options(sweep, sweep_opts);
  std::string axis, values;
  sweep->add_option("--axis", axis, "Setting to vary (a flag name, e.g. k)")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  auto* validate = app.add_subcommand("validate-merges", "Exact match of greedy futures across merged prefixes");
  add_run_options(validate, merge_opts);
  std::string horizons = "1,2,4,6,8,10";
  validate->add_option("--horizons", horizons, "Comma-separated horizons L")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*decode) return latdec::cmd_decode(finish(decode_opts), std::cout, std::cerr);
    if (*sweep) {
      latdec::SweepSpec s{finish(sweep_opts), axis, split_list(values)};
      return latdec::cmd_sweep(s, std::cout, std::cerr);
    }
    std::vector<std::size_t> ls;
    for (const auto& h : split_list(horizons)) ls.push_back(static_cast<std::size_t>(std::stoul(h)));
    return latdec::cmd_validate_merges(finish(merge_opts), ls, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
