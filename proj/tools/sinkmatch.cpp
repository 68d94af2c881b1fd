// sinkmatch command line: entropic optimal-transport matching over fragment
// embedding files, plus solver, evaluation, and benchmark frontends.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sinkmatch/io.hpp"
#include "sinkmatch/partial.hpp"

using json = nlohmann::ordered_json;
using namespace sinkmatch;

namespace {

struct CliOptions {
  RunConfig run;
  std::string margins = "uni";
  std::string method = "omit";
  std::string partial = "on";
  std::string log_domain = "auto";
  bool oracle = false;
  int threads = 1;
  std::string output;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--lambda", opt.run.lambda, "Entropic weight")->capture_default_str();
  cmd->add_option("--phi", opt.run.margin_phi, "Triplet margin")->capture_default_str();
  cmd->add_option("--tau", opt.run.tau, "Dustbin cost scale")->capture_default_str();
  cmd->add_option("--iters", opt.run.iterations, "Max Sinkhorn sweeps")->capture_default_str();
  cmd->add_option("--eps", opt.run.eps, "Convergence tolerance")->capture_default_str();
  cmd->add_option("--margins", opt.margins, "Margin strategy")
      ->check(CLI::IsMember({"uni", "intra", "inter", "norm"}))
      ->capture_default_str();
  cmd->add_option("--method", opt.method, "Similarity method")
      ->check(CLI::IsMember({"omit", "omit-naive", "vse", "cam", "pem"}))
      ->capture_default_str();
  cmd->add_option("--partial", opt.partial, "Dustbin extension on/off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--log-domain", opt.log_domain, "Log-domain mode")
      ->check(CLI::IsMember({"auto", "on", "off"}))
      ->capture_default_str();
  cmd->add_flag("--oracle", opt.oracle, "Use the exact EMD oracle");
  cmd->add_option("--threads", opt.threads, "Worker threads")->capture_default_str();
  cmd->add_option("--output", opt.output, "Write the primary result to PATH");
}

void finalize(CliOptions& opt) {
  opt.run.margins = margin_kind_from_string(opt.margins);
  opt.run.method = method_from_string(opt.method);
  opt.run.partial = opt.partial == "on";
  if (opt.log_domain == "on")
    opt.run.log_domain = LogDomain::kOn;
  else if (opt.log_domain == "off")
    opt.run.log_domain = LogDomain::kOff;
  else
    opt.run.log_domain = LogDomain::kAuto;
  if (const char* env = std::getenv("SINKMATCH_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      raise(errc::invalid_input, std::string("bad SINKMATCH_THREADS value: ") + env);
    opt.threads = static_cast<int>(n);
  }
  if (opt.threads < 1) raise(errc::invalid_input, "--threads must be >= 1");
}

const char* to_string(LogDomain d) {
  switch (d) {
    case LogDomain::kAuto: return "auto";
    case LogDomain::kOn: return "on";
    case LogDomain::kOff: return "off";
  }
  return "?";
}

json config_json(const CliOptions& opt) {
  return json{{"lambda", opt.run.lambda},
              {"phi", opt.run.margin_phi},
              {"tau", opt.run.tau},
              {"iterations", opt.run.iterations},
              {"eps", opt.run.eps},
              {"margins", sinkmatch::to_string(opt.run.margins)},
              {"method", sinkmatch::to_string(opt.run.method)},
              {"partial", opt.run.partial ? "on" : "off"},
              {"log_domain", to_string(opt.run.log_domain)}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(output_path, std::ios::trunc);
  if (!out) raise(errc::format_error, "cannot open " + output_path + " for writing");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

Method effective_method(const RunConfig& run) {
  if (run.method == Method::kOmit && !run.partial) return Method::kOmitNaive;
  return run.method;
}

int cmd_solve(const std::string& cost_csv, CliOptions& opt) {
  const CostMatrix cost{read_csv_matrix(cost_csv)};
  const auto alpha = MarginalWeights::uniform(cost.rows());
  const auto beta = MarginalWeights::uniform(cost.cols());

  json out;
  if (opt.oracle) {
    auto [plan, distance] = exact_emd_oracle(cost, alpha, beta);
    out = json{{"plan", matrix_json(plan.values)},
               {"distance", distance},
               {"similarity", 1.0 - distance},
               {"converged", true},
               {"iterations", 0},
               {"oracle", true}};
  } else {
    const TransportPlan plan = sinkhorn_bregman(cost, alpha, beta, opt.run.solver());
    const double distance = transport_cost(plan, cost);
    out = json{{"plan", matrix_json(plan.values)},
               {"distance", distance},
               {"similarity", 1.0 - distance},
               {"converged", plan.converged},
               {"iterations", plan.iterations_used},
               {"oracle", false}};
  }
  out["config"] = config_json(opt);
  emit(out.dump(2), opt.output);
  return 0;
}

int cmd_sim(const std::string& images_path, const std::string& captions_path, CliOptions& opt) {
  const auto images = read_embeddings(images_path);
  const auto captions = read_embeddings(captions_path);

  const auto start = std::chrono::steady_clock::now();
  const SimilarityMatrix sims =
      batch_similarity(images, captions, effective_method(opt.run), opt.run.batch(opt.threads));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json meta{{"method", sinkmatch::to_string(sims.method)},
            {"rows", sims.values.rows()},
            {"cols", sims.values.cols()},
            {"row_ids", sims.row_ids},
            {"col_ids", sims.col_ids},
            {"threads", opt.threads},
            {"wall_time_seconds", seconds},
            {"config", config_json(opt)}};

  const std::string csv = csv_to_string(sims.values);
  if (opt.output.empty()) {
    std::cout << csv;
    std::cerr << meta.dump(2) << '\n';
  } else {
    emit(csv, opt.output);
    std::cout << meta.dump(2) << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& sims_csv, const std::string& truth_jsonl, CliOptions& opt) {
  SimilarityMatrix sims;
  sims.values = read_csv_matrix(sims_csv);
  sims.method = effective_method(opt.run);
  // Bare CSV carries no sample ids; ground-truth ids address rows/columns
  // positionally.
  sims.row_ids.resize(sims.values.rows());
  for (std::size_t i = 0; i < sims.row_ids.size(); ++i)
    sims.row_ids[i] = static_cast<std::uint32_t>(i);
  sims.col_ids.resize(sims.values.cols());
  for (std::size_t j = 0; j < sims.col_ids.size(); ++j)
    sims.col_ids[j] = static_cast<std::uint32_t>(j);

  const RetrievalReport r = recall_report(sims, read_ground_truth(truth_jsonl));
  json out{{"i2t_r1", r.i2t_r1}, {"i2t_r5", r.i2t_r5}, {"i2t_r10", r.i2t_r10},
           {"t2i_r1", r.t2i_r1}, {"t2i_r5", r.t2i_r5}, {"t2i_r10", r.t2i_r10},
           {"rsum", r.rsum},     {"config", config_json(opt)}};
  emit(out.dump(2), opt.output);
  return 0;
}

int cmd_bench(const std::string& images_path, const std::string& captions_path, CliOptions& opt,
              bool method_given) {
  const auto images = read_embeddings(images_path);
  const auto captions = read_embeddings(captions_path);
  const std::size_t pairs = images.size() * captions.size();

  std::vector<Method> methods;
  if (method_given)
    methods.push_back(effective_method(opt.run));
  else
    methods = {Method::kVse, Method::kCam, Method::kOmit};

  json entries = json::object();
  for (Method method : methods) {
    const auto start = std::chrono::steady_clock::now();
    batch_similarity(images, captions, method, opt.run.batch(opt.threads));
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    entries[sinkmatch::to_string(method)] =
        json{{"total_seconds", seconds},
             {"per_pair_seconds", seconds / static_cast<double>(pairs)}};
  }
  json out{{"pairs", pairs}, {"methods", entries}, {"config", config_json(opt)}};
  emit(out.dump(2), opt.output);
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case errc::format_error:
    case errc::invalid_ground_truth:
      return 2;
    case errc::numerical_underflow:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal fragment matching via entropic optimal transport"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string cost_csv, images_path, captions_path, sims_csv, truth_jsonl;

  CLI::App* solve = app.add_subcommand("solve", "Solve one transport instance from a cost CSV");
  solve->add_option("cost_csv", cost_csv, "Cost matrix CSV")->required();
  add_common_flags(solve, opt);

  CLI::App* sim = app.add_subcommand("sim", "Pairwise similarity matrix for two embedding files");
  sim->add_option("images", images_path, "Image embedding file")->required();
  sim->add_option("captions", captions_path, "Caption embedding file")->required();
  add_common_flags(sim, opt);

  CLI::App* eval =
      app.add_subcommand("eval", "Recall metrics from a similarity CSV and ground truth");
  eval->add_option("sims_csv", sims_csv, "Similarity matrix CSV")->required();
  eval->add_option("truth_jsonl", truth_jsonl, "Ground truth JSONL")->required();
  add_common_flags(eval, opt);

  CLI::App* bench = app.add_subcommand("bench", "Time the matching methods over the cross product");
  bench->add_option("images", images_path, "Image embedding file")->required();
  bench->add_option("captions", captions_path, "Caption embedding file")->required();
  add_common_flags(bench, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    finalize(opt);
    if (solve->parsed()) return cmd_solve(cost_csv, opt);
    if (sim->parsed()) return cmd_sim(images_path, captions_path, opt);
    if (eval->parsed()) return cmd_eval(sims_csv, truth_jsonl, opt);
    if (bench->parsed())
      return cmd_bench(images_path, captions_path, opt, bench->count("--method") > 0);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
