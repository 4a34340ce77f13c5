#pragma once

// Byte-deterministic CSV emission: comma separators, LF rows, floats at 17
// significant digits so equal doubles produce equal bytes on every platform.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "atrl/common.hpp"

namespace atrl {

inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class csv_writer {
  public:
    explicit csv_writer(const std::vector<std::string>& header) : cols_(header.size()) {
        if (header.empty()) throw config_error("csv: empty header");
        append_row(header);
    }

    csv_writer& add(double v) { return add_cell(csv_double(v)); }
    csv_writer& add(std::uint64_t v) { return add_cell(std::to_string(v)); }
    csv_writer& add(int v) { return add_cell(std::to_string(v)); }
    csv_writer& add(const std::string& v) { return add_cell(v); }

    void end_row() {
        if (col_ != cols_) throw config_error("csv: row width does not match header");
        buf_ += '\n';
        col_ = 0;
    }

    const std::string& bytes() const {
        if (col_ != 0) throw config_error("csv: unterminated row");
        return buf_;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw config_error("csv: cannot open " + path);
        const auto& b = bytes();
        out.write(b.data(), static_cast<std::streamsize>(b.size()));
        if (!out) throw config_error("csv: write failed for " + path);
    }

  private:
    csv_writer& add_cell(const std::string& s) {
        if (col_ >= cols_) throw config_error("csv: row wider than header");
        if (col_ > 0) buf_ += ',';
        buf_ += s;
        ++col_;
        return *this;
    }

    void append_row(const std::vector<std::string>& cells) {
        for (const auto& c : cells) add_cell(c);
        end_row();
    }

    std::string buf_;
    std::size_t cols_ = 0;
    std::size_t col_ = 0;
};

}  // namespace atrl
