// chainclust: recover the block structure of a perturbed purely clustered
// Markov chain and check the perturbation bounds behind it.
//
// Exit codes: 0 ok; 2 configuration / input error; 3 degenerate spectral
// gap; 4 no usable gap index; 5 no approximate-cluster candidate; 6 bound
// violation (verify-bounds only).

#include "chainclust/bounds.hpp"
#include "chainclust/errors.hpp"
#include "chainclust/experiment.hpp"
#include "chainclust/io.hpp"
#include "chainclust/recovery.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace chainclust;
using nlohmann::json;
namespace ex = chainclust::experiment;

enum ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kDegenerateGap = 3,
  kNoGap = 4,
  kNoCandidate = 5,
  kBoundViolation = 6,
};

// Writes to --out when given, stdout otherwise.
void emit(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  body(out);
  if (!out) throw IoError("write failed for " + path);
}

struct ConfigFlags {
  std::string config_file;
  std::string sizes, seed, min_entry, x, x_grid, modes, norm, side, format, out;
  std::string instances, max_n, k_choices, x_points, lemma_pairs, gap_tol;
  bool no_timestamp = false;

  ex::ExperimentConfig resolve() const {
    ex::ExperimentConfig c =
        config_file.empty() ? ex::ExperimentConfig{} : ex::parse_config_file(config_file);
    const std::pair<const char*, const std::string*> overrides[] = {
        {"sizes", &sizes},         {"seed", &seed},           {"min_entry", &min_entry},
        {"x", &x},                 {"x_grid", &x_grid},       {"modes", &modes},
        {"norm", &norm},           {"side", &side},           {"format", &format},
        {"out", &out},             {"instances", &instances}, {"max_n", &max_n},
        {"k_choices", &k_choices}, {"x_points", &x_points},   {"lemma_pairs", &lemma_pairs},
        {"gap_tol", &gap_tol}};
    for (const auto& [key, value] : overrides) {
      if (!value->empty()) ex::set_config_value(c, key, *value);
    }
    if (no_timestamp) c.timestamp = false;
    return c;
  }
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f, bool sweep_like) {
  cmd->add_option("--config", f.config_file, "key = value configuration file");
  cmd->add_option("--sizes", f.sizes, "block sizes, comma separated");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--min-entry", f.min_entry, "floor for within-block entries");
  if (!sweep_like) return;
  cmd->add_option("--x", f.x, "explicit x values, comma separated");
  cmd->add_option("--x-grid", f.x_grid, "x grid as min:max:points");
  cmd->add_option("--out", f.out, "output file (stdout when omitted)");
  cmd->add_option("--gap-tol", f.gap_tol, "minimum singular-value gap");
  cmd->add_flag("--no-timestamp", f.no_timestamp, "omit timestamps and wall-clock runtimes");
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

int run_generate(const ConfigFlags& flags, const std::string& dir, const std::string& ext,
                 const std::optional<double>& x) {
  const ex::ExperimentConfig c = flags.resolve();
  if (c.sizes.empty()) throw ConfigError("generate needs --sizes");
  if (c.sizes.size() < 2) warn("k < 2: generated chain is not usable for recovery");
  const ex::Instance inst = ex::make_instance(c.sizes, c.seed, c.min_entry);
  const auto files = ex::write_instance_files(inst, dir, ext, x);
  json out = {{"n", inst.constants.n},
              {"k", inst.constants.k},
              {"seed", c.seed},
              {"sigma_gap", inst.constants.sigma_gap},
              {"norm_e", inst.constants.norm_e},
              {"x_max", inst.perturbation.x_max()},
              {"t0", files.t0.string()},
              {"e", files.e.string()},
              {"partition", files.partition.string()}};
  out["exact_recovery_xmax"] = inst.x_star ? json(*inst.x_star) : json(nullptr);
  if (files.tx) out["tx"] = files.tx->string();
  std::cout << out.dump(2) << '\n';
  return kOk;
}

struct RecoverFlags {
  std::string input, mode = "empirical", norm = "frobenius", side = "right", out;
  std::size_t k = 0;
  std::optional<double> epsilon;
  std::optional<std::size_t> n1, n2;
  double gap_tol = kDefaultGapTol;
};

int run_recover(const RecoverFlags& f) {
  const Matrix t = io::read_matrix(f.input);
  const Side side = ex::parse_side(f.side);
  const ex::SweepMode mode = ex::parse_mode(f.mode);
  RecoveryResult result;
  switch (mode) {
    case ex::SweepMode::oracle_epsilon:
      if (!f.epsilon) throw ConfigError("mode oracle_epsilon needs --epsilon");
      result = recover_exact(t, f.k, OracleEpsilon{*f.epsilon}, side, f.gap_tol);
      break;
    case ex::SweepMode::known_sizes:
      if (!f.n1 || !f.n2) throw ConfigError("mode known_sizes needs --n1 and --n2");
      result = recover_exact(t, f.k, KnownSizes{*f.n1, *f.n2}, side, f.gap_tol);
      break;
    case ex::SweepMode::empirical:
      result = recover_empirical(t, f.k, ex::parse_norm(f.norm), side, f.gap_tol);
      break;
    case ex::SweepMode::approx_one:
      throw ConfigError("use the approx subcommand for one-cluster recovery");
  }
  json out = io::recovery_to_json(result);
  out["warnings"] = json::array();
  if (!result.consistent) {
    const std::string msg =
        "no bound certifies this partition: the threshold relation is not an equivalence with " +
        std::to_string(f.k) + " classes";
    warn(msg);
    out["warnings"].push_back(msg);
  }
  emit(f.out, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
  return kOk;
}

int run_approx(const std::string& input, std::size_t k, double epsilon, const std::string& side,
               const std::string& out_path, double gap_tol) {
  const Matrix t = io::read_matrix(input);
  const auto result = recover_one_approx(t, k, epsilon, ex::parse_side(side), gap_tol);
  emit(out_path, [&](std::ostream& os) { os << io::approx_to_json(result).dump(2) << '\n'; });
  return kOk;
}

int run_estimate_k(const std::string& input, std::size_t k_max, const std::string& norm,
                   const std::string& out_path, double gap_tol) {
  const Matrix t = io::read_matrix(input);
  const auto est = estimate_k(t, k_max, ex::parse_norm(norm), gap_tol);
  emit(out_path, [&](std::ostream& os) { os << io::k_estimate_to_json(est).dump(2) << '\n'; });
  return kOk;
}

int run_sweep(const ConfigFlags& flags) {
  const ex::ExperimentConfig c = flags.resolve();
  const auto records = ex::run_sweep(c);
  emit(c.out, [&](std::ostream& os) { ex::write_sweep(os, records, c.format, c.timestamp); });
  return kOk;
}

int run_verify_bounds(const ConfigFlags& flags) {
  const ex::ExperimentConfig c = flags.resolve();
  const auto result = ex::run_bounds_campaign(c);
  emit(c.out, [&](std::ostream& os) { ex::write_campaign(os, result, c.timestamp); });
  std::cerr << result.certificates.size() << " certificates: " << result.satisfied
            << " satisfied, " << result.violations << " violated, " << result.out_of_regime
            << " out of regime\n";
  return result.violations == 0 ? kOk : kBoundViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster recovery for perturbed purely clustered Markov chains"};
  app.require_subcommand(1);

  ConfigFlags gen_flags;
  std::string gen_dir = ".", gen_ext = "mtx";
  std::optional<double> gen_x;
  auto* generate = app.add_subcommand("generate", "write a seeded instance T0, E, partition");
  add_config_flags(generate, gen_flags, false);
  generate->add_option("--out", gen_dir, "output directory");
  generate->add_option("--matrix-format", gen_ext, "file extension: mtx or csv")
      ->check(CLI::IsMember({"mtx", "mm", "csv"}));
  generate->add_option("--x", gen_x, "also write Tx = T0 + x E");

  RecoverFlags rec;
  auto* recover = app.add_subcommand("recover", "recover all clusters from T(x)");
  recover->add_option("--input", rec.input, "transition matrix (.mtx or .csv)")->required();
  recover->add_option("--k", rec.k, "number of clusters")->required();
  recover->add_option("--mode", rec.mode, "oracle_epsilon | known_sizes | empirical");
  recover->add_option("--epsilon", rec.epsilon, "epsilon for oracle_epsilon");
  recover->add_option("--n1", rec.n1, "largest cluster size for known_sizes");
  recover->add_option("--n2", rec.n2, "second largest cluster size for known_sizes");
  recover->add_option("--norm", rec.norm, "frobenius | spectral");
  recover->add_option("--side", rec.side, "right | left singular subspace");
  recover->add_option("--out", rec.out, "output file (stdout when omitted)");
  recover->add_option("--gap-tol", rec.gap_tol, "minimum singular-value gap");

  std::string ap_input, ap_side = "right", ap_out;
  std::size_t ap_k = 0;
  double ap_eps = 0.0, ap_gap_tol = kDefaultGapTol;
  auto* approx = app.add_subcommand("approx", "approximately recover one cluster");
  approx->add_option("--input", ap_input, "transition matrix (.mtx or .csv)")->required();
  approx->add_option("--k", ap_k, "number of equal-size clusters")->required();
  approx->add_option("--epsilon", ap_eps, "projector deviation budget")->required();
  approx->add_option("--side", ap_side, "right | left singular subspace");
  approx->add_option("--out", ap_out, "output file (stdout when omitted)");
  approx->add_option("--gap-tol", ap_gap_tol, "minimum singular-value gap");

  std::string ek_input, ek_norm = "frobenius", ek_out;
  std::size_t ek_kmax = 0;
  double ek_gap_tol = kDefaultGapTol;
  auto* estimate = app.add_subcommand("estimate-k", "search for the number of clusters");
  estimate->add_option("--input", ek_input, "transition matrix (.mtx or .csv)")->required();
  estimate->add_option("--k-max", ek_kmax, "largest k to try")->required();
  estimate->add_option("--norm", ek_norm, "frobenius | spectral");
  estimate->add_option("--out", ek_out, "output file (stdout when omitted)");
  estimate->add_option("--gap-tol", ek_gap_tol, "minimum singular-value gap");

  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "run recovery modes over an x grid");
  add_config_flags(sweep, sweep_flags, true);
  sweep->add_option("--mode", sweep_flags.modes, "modes, comma separated");
  sweep->add_option("--norm", sweep_flags.norm, "frobenius | spectral");
  sweep->add_option("--side", sweep_flags.side, "right | left singular subspace");
  sweep->add_option("--format", sweep_flags.format, "csv | jsonl");

  ConfigFlags vb_flags;
  auto* verify = app.add_subcommand("verify-bounds", "seeded bound-validation campaign");
  add_config_flags(verify, vb_flags, true);
  verify->add_option("--instances", vb_flags.instances, "number of perturbation instances");
  verify->add_option("--max-n", vb_flags.max_n, "largest state count");
  verify->add_option("--k-choices", vb_flags.k_choices, "cluster counts, comma separated");
  verify->add_option("--x-points", vb_flags.x_points, "in-regime grid points per instance");
  verify->add_option("--lemma-pairs", vb_flags.lemma_pairs, "random symmetric pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*generate) return run_generate(gen_flags, gen_dir, gen_ext, gen_x);
    if (*recover) return run_recover(rec);
    if (*approx) return run_approx(ap_input, ap_k, ap_eps, ap_side, ap_out, ap_gap_tol);
    if (*estimate) return run_estimate_k(ek_input, ek_kmax, ek_norm, ek_out, ek_gap_tol);
    if (*sweep) return run_sweep(sweep_flags);
    if (*verify) return run_verify_bounds(vb_flags);
  } catch (const DegenerateGapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerateGap;
  } catch (const NoGapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoGap;
  } catch (const NoCandidateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoCandidate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
