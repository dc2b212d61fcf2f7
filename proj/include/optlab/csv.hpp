#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace optlab {

// Doubles are written with 17 significant digits so that re-parsing restores
// the exact bits; identical inputs yield byte-identical files.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);

    void row(std::span<const double> values);
    void row_raw(std::span<const std::string> cells);
    void flush() { out_.flush(); }
    bool good() const { return out_.good(); }

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace optlab
