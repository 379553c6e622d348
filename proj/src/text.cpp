#include "mdsgnn/text.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError(context + ": not a number: '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, const std::string& context) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError(context + ": not an integer: '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    while (!s.empty() && ws.find(s.front()) != std::string_view::npos)
        s.remove_prefix(1);
    while (!s.empty() && ws.find(s.back()) != std::string_view::npos)
        s.remove_suffix(1);
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError(path + ": cannot open");
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError(path + ": cannot open for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw DataError(path + ": write failed");
}

}  // namespace mdsgnn
