#ifndef OTTO_IO_HPP
#define OTTO_IO_HPP

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace otto {

// Numbers are written with 12 significant digits.
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::string>& comments = {});
    void row(const std::vector<double>& values);
    void row_text(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t width_;
};

/// SHA-256 as 64 hex digits.
std::string content_hash(const std::string& bytes);
std::string file_hash(const std::string& path);

} // namespace otto

#endif
