#pragma once

#include "chainclust/bounds.hpp"
#include "chainclust/matrix_core.hpp"
#include "chainclust/recovery.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace chainclust::io {

enum class MatrixFormat { matrix_market, csv };

/// MatrixMarket layout used when writing.
enum class MarketLayout { array, coordinate };

/// .mtx / .mm -> MatrixMarket, .csv -> CSV; IoError otherwise.
MatrixFormat format_from_extension(const std::filesystem::path& path);

/// Reads "real general" or "real symmetric" (and "integer") MatrixMarket
/// files in array or coordinate layout. Values are checked to be finite.
Matrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, const Matrix& m,
                         MarketLayout layout = MarketLayout::array);

/// One row per line, comma separated, 17 significant digits.
Matrix read_csv(std::istream& in);
void write_csv(std::ostream& out, const Matrix& m);

Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// 17 significant digits; reads back bit-identically.
std::string format_double(double v);

/// {"n": int, "blocks": [[1-based indices]]}.
nlohmann::json partition_to_json(const ClusterPartition& p);
ClusterPartition partition_from_json(const nlohmann::json& j);
ClusterPartition read_partition(const std::filesystem::path& path);
void write_partition(const std::filesystem::path& path, const ClusterPartition& p);

/// {name, lhs, rhs, satisfied, n, k, x, seed, in_regime}.
nlohmann::json certificate_to_json(const BoundCertificate& c);

nlohmann::json recovery_to_json(const RecoveryResult& r);
nlohmann::json approx_to_json(const ApproxClusterResult& r);
nlohmann::json k_estimate_to_json(const KEstimate& e);

}  // namespace chainclust::io
