#include "otto/io.hpp"

#include <cstdio>
#include <iterator>
#include <sstream>

#include <openssl/sha.h>

#include "otto/errors.hpp"

namespace otto {

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::string>& comments)
    : out_(path), width_(header.size())
{
    if (!out_)
        throw Error("cannot open " + path + " for writing");
    for (const auto& c : comments)
        out_ << "# " << c << '\n';
    row_text(header);
}

void CsvWriter::row(const std::vector<double>& values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values)
        cells.push_back(format_number(v));
    row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells)
{
    if (cells.size() != width_)
        throw Error("csv row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i)
        out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
}

std::string content_hash(const std::string& bytes)
{
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    std::string hex;
    char buf[3];
    for (unsigned char c : digest) {
        std::snprintf(buf, sizeof buf, "%02x", c);
        hex += buf;
    }
    return hex;
}

std::string file_hash(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content_hash(bytes);
}

} // namespace otto
