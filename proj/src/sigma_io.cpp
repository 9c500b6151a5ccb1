#include "vcrisk/sigma_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "vcrisk/csv.hpp"
#include "vcrisk/error.hpp"

namespace vcrisk {

namespace csv {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    const auto flush = [&] {
        if (!was_quoted) {
            const auto b = field.find_first_not_of(" \t");
            const auto e = field.find_last_not_of(" \t");
            field = b == std::string::npos ? std::string{} : field.substr(b, e - b + 1);
        }
        out.push_back(std::move(field));
        field.clear();
        was_quoted = false;
    };
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            flush();
        } else {
            field.push_back(c);
        }
    }
    flush();
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
    }
}

std::vector<std::string> lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
        pos = nl + 1;
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

}  // namespace csv

namespace {

double parse_double(const std::string& text, std::size_t row, std::size_t col) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (text.empty() || end != begin + text.size() || errno == ERANGE) {
        throw Error(Errc::ParseError, "row " + std::to_string(row) + ", column " +
                                          std::to_string(col) + ": '" + text +
                                          "' is not a number");
    }
    return v;
}

}  // namespace

std::string format_sigma_csv(const std::vector<std::string>& labels, const Eigen::MatrixXd& sigma) {
    std::string out = "label";
    for (const auto& l : labels) {
        out += ',';
        out += l;
    }
    out += '\n';
    char buf[40];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out += labels[i];
        for (std::size_t j = 0; j < labels.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.12g",
                          sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

LabeledMatrix parse_sigma_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty()) {
        throw Error(Errc::ParseError, "correlation file is empty");
    }
    auto header = csv::split_line(rows[0]);
    if (header.size() < 2) {
        throw Error(Errc::ParseError, "correlation header needs a label column and groups");
    }
    LabeledMatrix out;
    out.labels.assign(header.begin() + 1, header.end());
    const auto n = out.labels.size();
    if (rows.size() != n + 1) {
        throw Error(Errc::ParseError, "correlation file has " + std::to_string(rows.size() - 1) +
                                          " data rows for " + std::to_string(n) + " groups");
    }
    out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto cells = csv::split_line(rows[i + 1]);
        if (cells.size() != n + 1) {
            throw Error(Errc::ParseError, "row " + std::to_string(i + 2) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(n + 1));
        }
        if (cells[0] != out.labels[i]) {
            throw Error(Errc::ParseError, "row " + std::to_string(i + 2) + " label '" + cells[0] +
                                              "' does not match header '" + out.labels[i] + "'");
        }
        for (std::size_t j = 0; j < n; ++j) {
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_double(cells[j + 1], i + 2, j + 2);
        }
    }
    return out;
}

std::string format_kinds_csv(const std::vector<FactorGroup>& groups) {
    std::string out = "label,kind\n";
    for (const auto& g : groups) {
        out += g.label;
        out += ',';
        out += to_string(g.kind);
        out += '\n';
    }
    return out;
}

std::vector<FactorGroup> parse_kinds_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || csv::split_line(rows[0]) != std::vector<std::string>{"label", "kind"}) {
        throw Error(Errc::ParseError, "kind map must start with header 'label,kind'");
    }
    std::vector<FactorGroup> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = csv::split_line(rows[i]);
        if (cells.size() != 2) {
            throw Error(Errc::ParseError, "kind map row " + std::to_string(i + 1) +
                                              " must have two cells");
        }
        out.push_back({cells[0], parse_group_kind(cells[1])});
    }
    return out;
}

std::filesystem::path kinds_sidecar_path(const std::filesystem::path& sigma_csv) {
    auto p = sigma_csv;
    p.replace_extension(".kinds.csv");
    return p;
}

FactorUniverse load_universe(const std::filesystem::path& sigma_csv) {
    auto matrix = parse_sigma_csv(csv::read_file(sigma_csv));
    const auto kinds = parse_kinds_csv(csv::read_file(kinds_sidecar_path(sigma_csv)));
    std::map<std::string, GroupKind> by_label;
    for (const auto& g : kinds) {
        by_label[g.label] = g.kind;
    }
    std::vector<FactorGroup> groups;
    for (const auto& l : matrix.labels) {
        const auto it = by_label.find(l);
        if (it == by_label.end()) {
            throw Error(Errc::ParseError, "group '" + l + "' has no entry in the kind map");
        }
        groups.push_back({l, it->second});
    }
    if (kinds.size() != groups.size()) {
        throw Error(Errc::ParseError, "kind map lists groups absent from the correlation matrix");
    }
    return FactorUniverse(std::move(groups), std::move(matrix.values));
}

void save_universe(const FactorUniverse& universe, const std::filesystem::path& sigma_csv) {
    std::vector<std::string> labels;
    for (const auto& g : universe.groups()) {
        labels.push_back(g.label);
    }
    csv::write_file(sigma_csv, format_sigma_csv(labels, universe.sigma()));
    csv::write_file(kinds_sidecar_path(sigma_csv), format_kinds_csv(universe.groups()));
}

}  // namespace vcrisk
