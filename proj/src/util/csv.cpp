#include "tsbi/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "tsbi/errors.hpp"

namespace tsbi {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf;
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), r.ptr);
}

CsvWriter::CsvWriter(std::initializer_list<std::string_view> header) {
    for (auto h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(std::string_view s) {
    if (row_open_) out_ += ',';
    out_ += s;
    row_open_ = true;
    return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(std::string_view(format_double(x))); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::string_view(std::to_string(x))); }

void CsvWriter::end_row() {
    out_ += '\n';
    row_open_ = false;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IoError("failed writing '" + path + "'");
}

}  // namespace tsbi
