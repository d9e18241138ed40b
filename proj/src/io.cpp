#include "chainclust/io.hpp"

#include "chainclust/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace chainclust::io {

namespace {

using Eigen::Index;
using nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, std::size_t line) {
  const std::string t = trim(token);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw IoError("line " + std::to_string(line) + ": cannot parse number '" + t + "'");
  }
  if (!std::isfinite(v)) {
    throw IoError("line " + std::to_string(line) + ": non-finite value '" + t + "'");
  }
  return v;
}

long long parse_count(const std::string& token, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || v < 0) {
    throw IoError("line " + std::to_string(line) + ": expected a nonnegative integer, got '" +
                  token + "'");
  }
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MatrixFormat format_from_extension(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".mtx" || ext == ".mm") return MatrixFormat::matrix_market;
  if (ext == ".csv") return MatrixFormat::csv;
  throw IoError("cannot infer matrix format from extension '" + ext + "' of " + path.string() +
                " (use .mtx, .mm or .csv)");
}

// ---------------------------------------------------------------------------
// MatrixMarket

Matrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw IoError("empty MatrixMarket stream");
  ++lineno;
  const auto banner = split_ws(lower(line));
  if (banner.size() < 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix") {
    throw IoError("missing %%MatrixMarket matrix banner");
  }
  const std::string& layout = banner[2];
  const std::string& field = banner[3];
  const std::string& symmetry = banner[4];
  if (layout != "array" && layout != "coordinate") {
    throw IoError("unsupported MatrixMarket layout '" + layout + "'");
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw IoError("unsupported MatrixMarket field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw IoError("unsupported MatrixMarket symmetry '" + symmetry + "'");
  }
  const bool symmetric = symmetry == "symmetric";

  // size line after comments
  std::vector<std::string> size;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    size = split_ws(t);
    break;
  }
  if (size.size() < 2) throw IoError("missing MatrixMarket size line");
  const long long rows = parse_count(size[0], lineno);
  const long long cols = parse_count(size[1], lineno);
  if (rows == 0 || cols == 0) throw IoError("MatrixMarket matrix has a zero dimension");
  if (symmetric && rows != cols) throw IoError("symmetric MatrixMarket matrix must be square");

  Matrix m = Matrix::Zero(rows, cols);
  auto next_data = [&](std::vector<std::string>& tokens) {
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '%') continue;
      tokens = split_ws(t);
      return true;
    }
    return false;
  };

  std::vector<std::string> tokens;
  if (layout == "array") {
    if (size.size() != 2) throw IoError("array size line must have two entries");
    // column-major; symmetric stores the lower triangle only
    for (Index j = 0; j < cols; ++j) {
      for (Index i = symmetric ? j : 0; i < rows; ++i) {
        if (!next_data(tokens) || tokens.size() != 1) {
          throw IoError("line " + std::to_string(lineno) + ": expected one array value");
        }
        m(i, j) = parse_double(tokens[0], lineno);
        if (symmetric) m(j, i) = m(i, j);
      }
    }
  } else {
    if (size.size() != 3) throw IoError("coordinate size line must have three entries");
    const long long nnz = parse_count(size[2], lineno);
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data(tokens) || tokens.size() != 3) {
        throw IoError("line " + std::to_string(lineno) + ": expected 'row col value'");
      }
      const long long i = parse_count(tokens[0], lineno);
      const long long j = parse_count(tokens[1], lineno);
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw IoError("line " + std::to_string(lineno) + ": coordinate out of range");
      }
      const double v = parse_double(tokens[2], lineno);
      m(i - 1, j - 1) = v;
      if (symmetric) m(j - 1, i - 1) = v;
    }
  }
  if (next_data(tokens)) {
    throw IoError("line " + std::to_string(lineno) + ": trailing data after matrix entries");
  }
  return m;
}

void write_matrix_market(std::ostream& out, const Matrix& m, MarketLayout layout) {
  if (layout == MarketLayout::array) {
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j)) << '\n';
    }
    return;
  }
  out << "%%MatrixMarket matrix coordinate real general\n";
  const Index nnz = (m.array() != 0.0).count();
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) != 0.0) out << (i + 1) << ' ' << (j + 1) << ' ' << format_double(m(i, j)) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

Matrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(parse_double(cell, lineno));
    if (!line.empty() && line.back() == ',') {
      throw IoError("line " + std::to_string(lineno) + ": trailing comma");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("line " + std::to_string(lineno) + ": expected " +
                    std::to_string(rows.front().size()) + " values, got " +
                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("CSV matrix is empty");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_csv(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix(const std::filesystem::path& path) {
  const MatrixFormat format = format_from_extension(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return format == MatrixFormat::csv ? read_csv(in) : read_matrix_market(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  const MatrixFormat format = format_from_extension(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == MatrixFormat::csv) {
    write_csv(out, m);
  } else {
    write_matrix_market(out, m);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// JSON

json partition_to_json(const ClusterPartition& p) {
  json blocks = json::array();
  for (const IndexSet& block : p.blocks()) {
    json b = json::array();
    for (std::size_t i : block) b.push_back(i + 1);
    blocks.push_back(std::move(b));
  }
  return {{"n", p.n()}, {"blocks", std::move(blocks)}};
}

ClusterPartition partition_from_json(const json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<IndexSet> blocks;
    for (const auto& b : j.at("blocks")) {
      IndexSet block;
      for (const auto& v : b) {
        const auto one_based = v.get<std::size_t>();
        if (one_based == 0) throw IoError("partition indices are 1-based");
        block.push_back(one_based - 1);
      }
      blocks.push_back(std::move(block));
    }
    return ClusterPartition(n, std::move(blocks));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed partition JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid partition: ") + e.what());
  } catch (const DimensionError& e) {
    throw IoError(std::string("invalid partition: ") + e.what());
  }
}

ClusterPartition read_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return partition_from_json(j);
}

void write_partition(const std::filesystem::path& path, const ClusterPartition& p) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << partition_to_json(p).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json certificate_to_json(const BoundCertificate& c) {
  return {{"name", c.name},
          {"lhs", number_or_null(c.lhs)},
          {"rhs", number_or_null(c.rhs)},
          {"satisfied", c.satisfied},
          {"n", c.context.n},
          {"k", c.context.k},
          {"x", c.context.x},
          {"seed", c.context.seed},
          {"in_regime", c.in_regime}};
}

json recovery_to_json(const RecoveryResult& r) {
  json out = {{"partition", partition_to_json(r.partition)},
              {"k", r.partition.k()},
              {"threshold", r.threshold_used},
              {"mode", to_string(r.mode)},
              {"side", to_string(r.side)},
              {"spectral_gap", r.spectral_gap},
              {"residual", r.residual},
              {"consistent", r.consistent}};
  if (r.mode == RecoveryMode::empirical) {
    json trials = json::array();
    for (const GapTrial& t : r.trials) {
      trials.push_back({{"gap_index", t.gap_index + 1},
                        {"threshold", t.threshold},
                        {"blocks", t.blocks},
                        {"residual", t.residual},
                        {"eligible", t.eligible}});
    }
    out["trials"] = std::move(trials);
    out["selected_trial"] = r.selected_trial ? json(*r.selected_trial + 1) : json(nullptr);
  }
  return out;
}

json approx_to_json(const ApproxClusterResult& r) {
  json set = json::array();
  for (std::size_t i : r.s_hat) set.push_back(i + 1);
  return {{"selected_j", r.selected_j + 1},
          {"s_hat", std::move(set)},
          {"score", r.score},
          {"size_cap", r.size_cap},
          {"admitted_size", r.admitted_size}};
}

json k_estimate_to_json(const KEstimate& e) {
  json trials = json::array();
  for (const KTrial& t : e.trials) {
    json row = {{"k", t.k}};
    row["residual"] = t.residual ? json(*t.residual) : json(nullptr);
    row["spectral_gap"] = t.spectral_gap ? json(*t.spectral_gap) : json(nullptr);
    row["score"] = t.score ? json(*t.score) : json(nullptr);
    if (!t.error.empty()) row["error"] = t.error;
    trials.push_back(std::move(row));
  }
  return {{"k", e.k}, {"result", recovery_to_json(e.result)}, {"trials", std::move(trials)}};
}

}  // namespace chainclust::io
