// CSV emission helpers. All floating-point cells are written with %.17g so
// reruns with identical configs produce byte-identical files.

#ifndef TMFM_CSV_HPP
#define TMFM_CSV_HPP

#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmfm::csv {

inline std::string format(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

inline std::string format(int v) { return std::to_string(v); }
inline std::string format(std::size_t v) { return std::to_string(v); }

class Writer {
public:
    Writer(const std::string& path, std::span<const std::string> header) : out_(path) {
        if (!out_) throw std::runtime_error("csv: cannot open " + path);
        columns_ = header.size();
        write_cells(header);
    }

    void row(std::span<const std::string> cells) {
        if (cells.size() != columns_) throw std::logic_error("csv: column count mismatch");
        write_cells(cells);
    }

    void row(std::initializer_list<std::string> cells) {
        row(std::span<const std::string>(cells.begin(), cells.size()));
    }

private:
    void write_cells(std::span<const std::string> cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ofstream out_;
    std::size_t columns_ = 0;
};

}  // namespace tmfm::csv

#endif  // TMFM_CSV_HPP
