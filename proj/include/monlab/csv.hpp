#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace monlab::csv {

// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& names) { line(names); }

    void line(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt(values[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

}  // namespace monlab::csv
