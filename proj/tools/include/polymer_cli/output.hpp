#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace polymer::cli {

struct Column {
    std::string name;
    std::string unit;
    std::string meaning;  // formula the column evaluates
};

using Cell = std::variant<double, std::int64_t, std::string>;

// Table written as '#' comment lines describing each column, one header row
// of names, then the data rows. Doubles use 17 significant digits.
class CsvTable {
public:
    CsvTable(std::string file_name, std::string title, std::vector<Column> columns);

    void add_row(std::vector<Cell> row);
    const std::string& file_name() const noexcept { return file_name_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string render() const;

private:
    std::string file_name_;
    std::string title_;
    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);

// git blob hash: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_hash(const std::string& content);

struct RunArtifacts {
    std::string subcommand;
    nlohmann::json config;      // echo of the resolved configuration
    nlohmann::json seeds;
    std::vector<CsvTable> tables;
    nlohmann::json extra = nlohmann::json::object();
};

// Writes every table and `manifest.json` into `dir`, creating it. The
// manifest records the config echo, seeds, per-file content hashes, the
// wall time and a timestamp.
void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& run, double wall_seconds);

}  // namespace polymer::cli
