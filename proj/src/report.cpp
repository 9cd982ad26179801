#include "schrolab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace schrolab {

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string to_csv(const CsvTable& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
    out += '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) throw std::invalid_argument("csv: row length does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header");
    std::istringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream rs(line);
        for (std::string cell; std::getline(rs, cell, ',');) {
            if (cell == "nan") row.push_back(std::nan(""));
            else if (cell == "inf") row.push_back(INFINITY);
            else if (cell == "-inf") row.push_back(-INFINITY);
            else row.push_back(std::stod(cell));
        }
        if (row.size() != t.header.size()) throw std::invalid_argument("csv: row length does not match the header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename '" + tmp.string() + "': " + ec.message());
    }
}

}  // namespace schrolab
