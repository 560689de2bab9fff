#include "cpd/signal.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cpd {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

std::optional<double> parse_number(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return value;
}

} // namespace

Signal parse_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.erase(0, 3);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split(line);
        std::vector<double> values;
        values.reserve(cells.size());
        bool numeric = true;
        for (auto cell : cells) {
            auto v = parse_number(cell);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            if (first_content) {
                // header row
                first_content = false;
                width = cells.size();
                continue;
            }
            throw std::invalid_argument("non-numeric cell on line " + std::to_string(line_no));
        }
        if (width != 0 && values.size() != width) {
            throw std::invalid_argument("ragged input: line " + std::to_string(line_no) + " has " +
                                        std::to_string(values.size()) + " columns, expected " +
                                        std::to_string(width));
        }
        width = values.size();
        first_content = false;
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw std::invalid_argument("empty input: no numeric rows");
    }
    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < width; ++j) {
            if (!std::isfinite(rows[t][j])) {
                throw std::invalid_argument("non-finite value on data row " + std::to_string(t + 1));
            }
            data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        }
    }
    return Signal(std::move(data));
}

Signal load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path.string());
    }
    return parse_csv(in);
}

void write_csv(std::ostream& out, const Signal& signal) {
    const auto& data = signal.data();
    const auto old_precision = out.precision(17);
    for (Eigen::Index t = 0; t < data.rows(); ++t) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << data(t, j);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

} // namespace cpd
