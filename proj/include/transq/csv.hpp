#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace transq {

// Shortest round-trip decimal form, locale independent ('.' separator).
std::string fmt(double v);
std::string fmt(long long v);
std::string fmt(unsigned long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(long v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(unsigned long v) { return fmt(static_cast<unsigned long long>(v)); }
inline std::string fmt(unsigned v) { return fmt(static_cast<unsigned long long>(v)); }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

double parse_double(std::string_view s);

// Writes rows with ',' separators and '\n' terminators only.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    // Each line of `text` becomes a '# ' comment line.
    void comment(const std::string& text);
    void row(const std::vector<std::string>& cells);

    template <typename... Ts>
    void fields(const Ts&... vs) {
        row({fmt(vs)...});
    }

private:
    std::ostream& os_;
};

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace transq
