#include "polymer_cli/output.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polymer::cli {

namespace {

std::string render_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::string file_name, std::string title, std::vector<Column> columns)
    : file_name_(std::move(file_name)), title_(std::move(title)), columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) {
        throw std::logic_error(file_name_ + ": row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
    std::ostringstream out;
    out << "# " << title_ << "\n";
    for (const auto& c : columns_) out << "# " << c.name << " [" << c.unit << "]: " << c.meaning << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i].name;
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render_cell(row[i]);
        out << "\n";
    }
    return out.str();
}

std::string git_blob_hash(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-1 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& run, double wall_seconds) {
    std::filesystem::create_directories(dir);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& t : run.tables) {
        const std::string body = t.render();
        std::ofstream out(dir / t.file_name(), std::ios::binary);
        out << body;
        if (!out) throw std::runtime_error("cannot write " + (dir / t.file_name()).string());
        files.push_back({{"file", t.file_name()}, {"rows", t.rows()}, {"sha1_git", git_blob_hash(body)}});
    }
    nlohmann::json manifest = {
        {"subcommand", run.subcommand},
        {"config", run.config},
        {"seeds", run.seeds},
        {"files", files},
        {"wall_time_seconds", wall_seconds},
        {"timestamp_utc", utc_timestamp()},
    };
    if (!run.extra.empty()) manifest["results"] = run.extra;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
}

}  // namespace polymer::cli
