#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace pcedep {

/// Shortest round-trip decimal form, '.' separator; "nan" / "inf" / "-inf".
[[nodiscard]] std::string format_double(double value);

/// Parses what format_double writes. Throws std::invalid_argument.
[[nodiscard]] double parse_double(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position of `name`; throws std::out_of_range when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Comma separated, header row, LF line endings.
[[nodiscard]] std::string table_to_csv(const CsvTable& table);
[[nodiscard]] std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header);

/// Throws ParseError carrying the 1-based line number of the first bad line.
[[nodiscard]] CsvTable parse_csv(std::string_view text);
[[nodiscard]] Eigen::MatrixXd csv_to_matrix(const CsvTable& table);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

[[nodiscard]] nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace pcedep
