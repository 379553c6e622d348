#include "mdsgnn/params_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    bool eof() const { return pos >= buf.size(); }

    void need(std::size_t n, const char* what) const {
        if (pos + n > buf.size())
            throw DataError(path + ": truncated checkpoint (" + what + ")");
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }

    double f64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }

    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_params(const std::string& path,
                 const std::vector<std::pair<std::string, const Matrix*>>& entries) {
    std::string out;
    for (const auto& [name, m] : entries) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
        put_u32(out, 2);
        put_u32(out, static_cast<std::uint32_t>(m->rows));
        put_u32(out, static_cast<std::uint32_t>(m->cols));
        for (double v : m->data) put_f64(out, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError(path + ": cannot open for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError(path + ": write failed");
}

std::vector<std::pair<std::string, Matrix>> load_params(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError(path + ": cannot open");
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::vector<std::pair<std::string, Matrix>> out;
    Reader r{buf, 0, path};
    while (!r.eof()) {
        std::uint32_t name_len = r.u32("name length");
        std::string name = r.bytes(name_len, "name");
        std::uint32_t rank = r.u32("rank");
        if (rank != 1 && rank != 2)
            throw DataError(path + ": entry '" + name + "' has unsupported rank " +
                            std::to_string(rank));
        std::uint32_t rows = 1, cols;
        if (rank == 2) {
            rows = r.u32("dims");
            cols = r.u32("dims");
        } else {
            cols = r.u32("dims");
        }
        Matrix m(static_cast<int>(rows), static_cast<int>(cols));
        for (double& v : m.data) v = r.f64("values");
        out.emplace_back(std::move(name), std::move(m));
    }
    return out;
}

}  // namespace mdsgnn
