#include "pottsrf/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pottsrf/errors.hpp"

namespace pottsrf {

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_error("failed to read file: " + path);
    return ss.str();
}

namespace {

// splits into lines, dropping a trailing \r and a final empty line
std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) nl = content.size();
        std::size_t end = nl;
        if (end > pos && content[end - 1] == '\r') --end;
        lines.emplace_back(content, pos, end - pos);
        pos = nl + 1;
    }
    return lines;
}

bool parse_double_cell(const std::string& cell, double& out) {
    const char* s = cell.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s, &end);
    if (end == s || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

bool parse_int_cell(const std::string& cell, long& out) {
    const char* s = cell.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtol(s, &end, 10);
    if (end == s || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            cells.emplace_back(line, pos);
            break;
        }
        cells.emplace_back(line, pos, comma - pos);
        pos = comma + 1;
    }
    return cells;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    std::vector<std::vector<double>> rows;
    int cols = -1;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) continue;
        const auto cells = split_cells(lines[ln]);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double_cell(cells[c], row[c])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty() && cols == -1) continue;  // header line
            throw parse_error(path + ":" + std::to_string(ln + 1) + ": non-numeric cell");
        }
        if (cols == -1) {
            cols = static_cast<int>(row.size());
        } else if (static_cast<int>(row.size()) != cols) {
            throw parse_error(path + ":" + std::to_string(ln + 1) + ": expected " +
                              std::to_string(cols) + " columns, got " +
                              std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error(path + ": no data rows");
    Matrix m(static_cast<int>(rows.size()), cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

void write_csv_matrix(const Matrix& m, const std::string& path) {
    std::string content;
    content.reserve(static_cast<std::size_t>(m.rows) * m.cols * 12);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            if (j) content += ',';
            content += format_double(m(i, j));
        }
        content += '\n';
    }
    write_file_atomic(path, content);
}

std::vector<int> read_labels(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    std::vector<int> labels;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) continue;
        long v;
        if (!parse_int_cell(lines[ln], v))
            throw parse_error(path + ":" + std::to_string(ln + 1) + ": expected an integer");
        labels.push_back(static_cast<int>(v));
    }
    if (labels.empty()) throw parse_error(path + ": no labels");
    return labels;
}

void write_labels(const std::vector<int>& labels, const std::string& path) {
    std::string content;
    content.reserve(labels.size() * 3);
    for (int v : labels) {
        content += std::to_string(v);
        content += '\n';
    }
    write_file_atomic(path, content);
}

SeedSet read_seeds(const std::string& path, int n_classes) {
    const auto lines = split_lines(read_file(path));
    SeedSet set;
    set.seeds.resize(n_classes);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) continue;
        const auto cells = split_cells(lines[ln]);
        long node, cls;
        if (cells.size() != 2 || !parse_int_cell(cells[0], node) ||
            !parse_int_cell(cells[1], cls))
            throw parse_error(path + ":" + std::to_string(ln + 1) +
                              ": expected 'node,class'");
        if (cls < 0 || cls >= n_classes)
            throw parse_error(path + ":" + std::to_string(ln + 1) + ": class out of range");
        set.seeds[cls].push_back(static_cast<int>(node));
    }
    return set;
}

void write_seeds(const SeedSet& seeds, const std::string& path) {
    std::string content;
    for (int c = 0; c < seeds.n_classes(); ++c) {
        for (int node : seeds.seeds[c]) {
            content += std::to_string(node);
            content += ',';
            content += std::to_string(c);
            content += '\n';
        }
    }
    write_file_atomic(path, content);
}

Graph read_graph_csv(const std::string& path, int n_nodes) {
    const auto lines = split_lines(read_file(path));
    std::vector<UndirectedEdge> edges;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) continue;
        const auto cells = split_cells(lines[ln]);
        long i, j;
        double w;
        if (cells.size() != 3 || !parse_int_cell(cells[0], i) || !parse_int_cell(cells[1], j) ||
            !parse_double_cell(cells[2], w))
            throw parse_error(path + ":" + std::to_string(ln + 1) + ": expected 'i,j,w'");
        edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
    }
    return Graph::from_undirected_edges(n_nodes, edges);
}

void write_graph_csv(const Graph& g, const std::string& path) {
    std::string content;
    for (int i = 0; i < g.n_nodes; ++i) {
        for (std::int64_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
            if (g.nbr[e] < i) continue;
            content += std::to_string(i);
            content += ',';
            content += std::to_string(g.nbr[e]);
            content += ',';
            content += format_double(g.weight[e]);
            content += '\n';
        }
    }
    write_file_atomic(path, content);
}

AtomicWriter::AtomicWriter(const std::string& path) : path_(path) {
    tmp_path_ = path + ".tmp." + std::to_string(::getpid());
    fd_ = ::open(tmp_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd_ < 0) throw io_error("cannot create " + tmp_path_ + ": " + std::strerror(errno));
}

AtomicWriter::~AtomicWriter() {
    if (fd_ >= 0) ::close(fd_);
    if (!committed_) ::unlink(tmp_path_.c_str());
}

void AtomicWriter::write(const std::string& content) {
    const char* data = content.data();
    std::size_t left = content.size();
    while (left > 0) {
        const ssize_t n = ::write(fd_, data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw io_error("write to " + tmp_path_ + " failed: " + std::strerror(errno));
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
}

void AtomicWriter::commit() {
    if (::fsync(fd_) != 0 || ::close(fd_) != 0) {
        fd_ = -1;
        throw io_error("flush of " + tmp_path_ + " failed: " + std::strerror(errno));
    }
    fd_ = -1;
    if (std::rename(tmp_path_.c_str(), path_.c_str()) != 0)
        throw io_error("cannot move " + tmp_path_ + " to " + path_ + ": " +
                       std::strerror(errno));
    committed_ = true;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    AtomicWriter w(path);
    w.write(content);
    w.commit();
}

}  // namespace pottsrf
