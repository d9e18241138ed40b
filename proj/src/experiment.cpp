#include "chainclust/experiment.hpp"

#include "chainclust/errors.hpp"
#include "chainclust/io.hpp"
#include "chainclust/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

namespace chainclust::experiment {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string error_code(const Error& e) {
  if (dynamic_cast<const OutOfRegimeError*>(&e)) return "out_of_regime";
  if (dynamic_cast<const DegenerateGapError*>(&e)) return "degenerate_gap";
  if (dynamic_cast<const NoGapError*>(&e)) return "no_gap";
  if (dynamic_cast<const NoCandidateError*>(&e)) return "no_candidate";
  return "error";
}

bool equal_sizes(const std::vector<std::size_t>& sizes) {
  return std::adjacent_find(sizes.begin(), sizes.end(), std::not_equal_to<>()) == sizes.end();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::mt19937_64 campaign_stream(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    tag};
  return std::mt19937_64(seq);
}

}  // namespace

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::oracle_epsilon: return "oracle_epsilon";
    case SweepMode::known_sizes: return "known_sizes";
    case SweepMode::empirical: return "empirical";
    case SweepMode::approx_one: return "approx_one";
  }
  return "unknown";
}

SweepMode parse_mode(const std::string& name) {
  for (SweepMode m : {SweepMode::oracle_epsilon, SweepMode::known_sizes, SweepMode::empirical,
                      SweepMode::approx_one}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + name +
                    "' (expected oracle_epsilon, known_sizes, empirical or approx_one)");
}

NormChoice parse_norm(const std::string& name) {
  if (name == "frobenius") return NormChoice::frobenius;
  if (name == "spectral") return NormChoice::spectral;
  throw ConfigError("unknown norm '" + name + "' (expected frobenius or spectral)");
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "jsonl") return OutputFormat::jsonl;
  throw ConfigError("unknown format '" + name + "' (expected csv or jsonl)");
}

Side parse_side(const std::string& name) {
  if (name == "right") return Side::right;
  if (name == "left") return Side::left;
  throw ConfigError("unknown side '" + name + "' (expected right or left)");
}

// ---------------------------------------------------------------------------
// Configuration

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "sizes") {
    c.sizes.clear();
    for (const auto& s : split_list(v)) {
      const auto size = to_unsigned(key, s);
      if (size == 0) throw ConfigError("sizes: block sizes must be positive");
      c.sizes.push_back(size);
    }
    if (c.sizes.empty()) throw ConfigError("sizes: empty list");
  } else if (key == "seed") {
    c.seed = to_unsigned(key, v);
  } else if (key == "min_entry") {
    c.min_entry = to_double(key, v);
  } else if (key == "x") {
    c.x_values.clear();
    for (const auto& s : split_list(v)) c.x_values.push_back(to_double(key, s));
  } else if (key == "x_grid") {
    const auto parts = split_list(v, ':');
    if (parts.size() != 3) throw ConfigError("x_grid: expected min:max:points");
    GridSpec g{to_double(key, parts[0]), to_double(key, parts[1]), to_unsigned(key, parts[2])};
    if (g.points < 1) throw ConfigError("x_grid: points must be >= 1");
    if (g.max < g.min) throw ConfigError("x_grid: max below min");
    c.x_grid = g;
  } else if (key == "modes") {
    c.modes.clear();
    for (const auto& s : split_list(v)) {
      const SweepMode m = parse_mode(s);
      if (std::find(c.modes.begin(), c.modes.end(), m) == c.modes.end()) c.modes.push_back(m);
    }
    if (c.modes.empty()) throw ConfigError("modes: empty mode list");
  } else if (key == "norm") {
    c.norm = parse_norm(v);
  } else if (key == "side") {
    c.side = parse_side(v);
  } else if (key == "format") {
    c.format = parse_format(v);
  } else if (key == "out") {
    c.out = v;
  } else if (key == "timestamp") {
    c.timestamp = to_bool(key, v);
  } else if (key == "instances") {
    c.instances = to_unsigned(key, v);
  } else if (key == "max_n") {
    c.max_n = to_unsigned(key, v);
    if (c.max_n < 3) throw ConfigError("max_n must be >= 3");
  } else if (key == "k_choices") {
    c.k_choices.clear();
    for (const auto& s : split_list(v)) {
      const auto k = to_unsigned(key, s);
      if (k < 2) throw ConfigError("k_choices: every k must be >= 2");
      c.k_choices.push_back(k);
    }
    if (c.k_choices.empty()) throw ConfigError("k_choices: empty list");
  } else if (key == "x_points") {
    c.x_points = to_unsigned(key, v);
    if (c.x_points < 1) throw ConfigError("x_points must be >= 1");
  } else if (key == "lemma_pairs") {
    c.lemma_pairs = to_unsigned(key, v);
  } else if (key == "gap_tol") {
    c.gap_tol = to_double(key, v);
    if (c.gap_tol < 0.0) throw ConfigError("gap_tol must be >= 0");
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::vector<double> resolve_x_values(const ExperimentConfig& config, double x_max) {
  std::vector<double> xs = config.x_values;
  if (config.x_grid) {
    const GridSpec& g = *config.x_grid;
    for (std::size_t i = 0; i < g.points; ++i) {
      const double step = g.points == 1 ? 0.0 : (g.max - g.min) / static_cast<double>(g.points - 1);
      xs.push_back(i + 1 == g.points ? g.max : g.min + static_cast<double>(i) * step);
    }
  }
  if (xs.empty()) throw ConfigError("no x values: set x or x_grid");
  for (double x : xs) {
    if (!(x >= 0.0) || x > x_max) {
      throw ConfigError("x = " + io::format_double(x) + " outside [0, " + io::format_double(x_max) +
                        "]");
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// ---------------------------------------------------------------------------
// Instances

Instance make_instance(const std::vector<std::size_t>& sizes, std::uint64_t seed,
                       double min_entry) {
  const DecoupledChain chain = generate_decoupled(sizes, seed, min_entry);
  Instance out{generate_perturbation(chain, seed), {}, std::nullopt, seed};
  const std::size_t n = chain.n();
  const std::size_t k = chain.k();
  out.constants.n = n;
  out.constants.k = k;
  out.constants.norm_e = spectral_norm(out.perturbation.e());
  if (k < n) out.constants.sigma_gap = laplacian_sigma_gap(chain.matrix(), k);
  if (k >= 2 && out.constants.sigma_gap > 0.0 && out.constants.norm_e > 0.0) {
    out.x_star = exact_recovery_xmax(chain.partition(), out.constants.sigma_gap,
                                     out.constants.norm_e);
  }
  return out;
}

GeneratedFiles write_instance_files(const Instance& instance, const std::filesystem::path& dir,
                                    const std::string& extension, std::optional<double> x) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  GeneratedFiles files{dir / ("T0." + extension), dir / ("E." + extension),
                       dir / "partition.json", std::nullopt};
  const PerturbationInstance& p = instance.perturbation;
  io::write_matrix(files.t0, p.base().matrix());
  io::write_matrix(files.e, p.e());
  io::write_partition(files.partition, p.base().partition());
  if (x) {
    files.tx = dir / ("Tx." + extension);
    io::write_matrix(*files.tx, transition_at(p, *x));
  }
  return files;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<SweepRecord> run_sweep(const ExperimentConfig& config) {
  if (config.sizes.empty()) throw ConfigError("sweep needs sizes");
  if (config.sizes.size() < 2) throw ConfigError("sweep needs at least two blocks");
  if (config.modes.empty()) throw ConfigError("sweep needs a nonempty mode list");
  const bool wants_approx = std::find(config.modes.begin(), config.modes.end(),
                                      SweepMode::approx_one) != config.modes.end();
  if (wants_approx && !equal_sizes(config.sizes)) {
    throw ConfigError("approx_one requires equal block sizes");
  }

  const Instance inst = make_instance(config.sizes, config.seed, config.min_entry);
  const PerturbationInstance& p = inst.perturbation;
  const ClusterPartition& truth = p.base().partition();
  const auto desc = truth.sizes_descending();
  const std::size_t k = truth.k();
  const std::vector<double> xs = resolve_x_values(config, p.x_max());

  std::vector<SweepRecord> records;
  for (double x : xs) {
    const Matrix tx = transition_at(p, x);
    std::optional<double> eps;
    try {
      eps = epsilon_bound(x, inst.constants.norm_e, inst.constants.sigma_gap).epsilon;
    } catch (const OutOfRegimeError&) {
    }
    for (SweepMode mode : config.modes) {
      SweepRecord rec;
      rec.x = x;
      rec.epsilon = eps;
      rec.mode = mode;
      const auto start = std::chrono::steady_clock::now();
      const bool partition_mode = mode != SweepMode::approx_one;
      if (partition_mode) rec.exact_success = false;
      try {
        switch (mode) {
          case SweepMode::oracle_epsilon: {
            if (!eps) throw OutOfRegimeError("epsilon undefined");
            const auto r = recover_exact(tx, k, OracleEpsilon{*eps}, config.side, config.gap_tol);
            rec.exact_success = partition_match(r.partition, truth);
            break;
          }
          case SweepMode::known_sizes: {
            const auto r = recover_exact(tx, k, KnownSizes{desc[0], desc[1]}, config.side,
                                         config.gap_tol);
            rec.exact_success = partition_match(r.partition, truth);
            break;
          }
          case SweepMode::empirical: {
            const auto r = recover_empirical(tx, k, config.norm, config.side, config.gap_tol);
            rec.exact_success = partition_match(r.partition, truth);
            rec.tried_gaps = r.trials.size();
            break;
          }
          case SweepMode::approx_one: {
            if (!eps) throw OutOfRegimeError("epsilon undefined");
            const auto r = recover_one_approx(tx, k, *eps, config.side, config.gap_tol);
            rec.symdiff = symmetric_difference_size(
                truth.block(truth.block_of(r.selected_j)), r.s_hat);
            break;
          }
        }
      } catch (const Error& e) {
        rec.error = error_code(e);
      }
      if (config.timestamp) {
        rec.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      }
      records.push_back(std::move(rec));
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.x != b.x) return a.x < b.x;
    return to_string(a.mode) < to_string(b.mode);
  });
  return records;
}

void write_sweep(std::ostream& out, const std::vector<SweepRecord>& records, OutputFormat format,
                 bool timestamp) {
  if (format == OutputFormat::csv) {
    out << "# " << kSweepSchema << '\n';
    if (timestamp) out << "# generated " << utc_timestamp() << '\n';
    out << "x,epsilon,mode,exact_success,symdiff,tried_gaps,runtime_ms,error\n";
    for (const SweepRecord& r : records) {
      out << io::format_double(r.x) << ','
          << (r.epsilon ? io::format_double(*r.epsilon) : std::string("out_of_regime")) << ','
          << to_string(r.mode) << ','
          << (r.exact_success ? (*r.exact_success ? "true" : "false") : "") << ','
          << (r.symdiff ? std::to_string(*r.symdiff) : "") << ','
          << (r.tried_gaps ? std::to_string(*r.tried_gaps) : "") << ','
          << io::format_double(r.runtime_ms) << ',' << csv_escape(r.error) << '\n';
    }
    return;
  }
  json header = {{"schema", kSweepSchema}};
  if (timestamp) header["generated"] = utc_timestamp();
  out << header.dump() << '\n';
  for (const SweepRecord& r : records) {
    json row = {{"x", r.x}, {"mode", to_string(r.mode)}, {"runtime_ms", r.runtime_ms}};
    row["epsilon"] = r.epsilon ? json(*r.epsilon) : json("out_of_regime");
    row["exact_success"] = r.exact_success ? json(*r.exact_success) : json(nullptr);
    row["symdiff"] = r.symdiff ? json(*r.symdiff) : json(nullptr);
    row["tried_gaps"] = r.tried_gaps ? json(*r.tried_gaps) : json(nullptr);
    row["error"] = r.error;
    out << row.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Bound campaign

CampaignResult run_bounds_campaign(const ExperimentConfig& config) {
  CampaignResult result;
  auto add = [&](BoundCertificate cert) {
    if (!cert.in_regime) {
      ++result.out_of_regime;
    } else if (cert.satisfied) {
      ++result.satisfied;
    } else {
      ++result.violations;
    }
    result.certificates.push_back(std::move(cert));
  };

  for (std::size_t i = 0; i < config.instances; ++i) {
    auto rng = campaign_stream(config.seed, i, 0xC0FFEE);
    const std::size_t k =
        config.k_choices[std::uniform_int_distribution<std::size_t>(0, config.k_choices.size() - 1)(rng)];
    const std::size_t per_block = std::max<std::size_t>(config.max_n / k, 2);
    std::vector<std::size_t> sizes(k);
    for (auto& s : sizes) s = std::uniform_int_distribution<std::size_t>(2, per_block)(rng);
    const std::uint64_t instance_seed = rng();

    const Instance inst = make_instance(sizes, instance_seed, config.min_entry);
    const PerturbationInstance& p = inst.perturbation;
    const double limit = inst.constants.regime_limit();

    std::vector<double> xs;
    if (!config.x_values.empty() || config.x_grid) {
      xs = resolve_x_values(config, p.x_max());
    } else {
      const double top = std::min(0.999 * limit, p.x_max());
      for (std::size_t j = 0; j < config.x_points; ++j) {
        xs.push_back(config.x_points == 1
                         ? 0.0
                         : top * static_cast<double>(j) / static_cast<double>(config.x_points - 1));
      }
    }

    for (double x : xs) {
      const bool in_regime = 2.0 * x * inst.constants.norm_e < inst.constants.sigma_gap;
      for (BoundCertificate cert : weyl_envelope(p, x, k, instance_seed)) {
        cert.in_regime = in_regime;
        add(std::move(cert));
      }
      if (in_regime) {
        add(validate_laplacian_projector_bound(p, x, instance_seed));
      } else {
        BoundCertificate cert = make_certificate("laplacian_projector_bound", NAN, NAN,
                                                 {p.n(), k, x, instance_seed});
        cert.satisfied = false;
        cert.in_regime = false;
        add(std::move(cert));
      }
    }
  }

  for (std::size_t i = 0; i < config.lemma_pairs; ++i) {
    auto rng = campaign_stream(config.seed, i, 0x5EED);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    const std::uint64_t pair_seed = rng();
    const SymmetricPair pair = generate_symmetric_pair(n, k, pair_seed);
    add(validate_symmetric_projector_bound(pair.a, pair.b, k, pair.alpha, pair.beta,
                                           {n, k, 0.0, pair_seed}));
  }
  return result;
}

void write_campaign(std::ostream& out, const CampaignResult& result, bool timestamp) {
  if (timestamp) out << json{{"generated", utc_timestamp()}}.dump() << '\n';
  for (const BoundCertificate& c : result.certificates) {
    out << io::certificate_to_json(c).dump() << '\n';
  }
  out << json{{"summary",
               {{"certificates", result.certificates.size()},
                {"satisfied", result.satisfied},
                {"violations", result.violations},
                {"out_of_regime", result.out_of_regime}}}}
             .dump()
      << '\n';
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace chainclust::experiment
