#include "optlab/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace optlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::vector<std::string> columns)
    : out_(path), columns_(columns.size()) {
    if (!out_) {
        throw std::runtime_error("CsvWriter: cannot open " + path.string());
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) {
        throw std::invalid_argument("CsvWriter::row: column count mismatch");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::row_raw(std::span<const std::string> cells) {
    if (cells.size() != columns_) {
        throw std::invalid_argument("CsvWriter::row_raw: column count mismatch");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

}  // namespace optlab
