#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

namespace tsbi {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Comma-separated rows; strings are written verbatim (no quoting).
class CsvWriter {
  public:
    explicit CsvWriter(std::initializer_list<std::string_view> header);
    CsvWriter& cell(double x);
    CsvWriter& cell(long long x);
    CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
    CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
    CsvWriter& cell(std::string_view s);
    void end_row();
    const std::string& str() const { return out_; }

  private:
    std::string out_;
    bool row_open_ = false;
};

/// Writes text to a file, replacing it. Throws IoError on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace tsbi
