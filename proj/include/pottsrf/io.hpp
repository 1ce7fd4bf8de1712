#pragma once

#include <string>
#include <vector>

#include "pottsrf/graph.hpp"
#include "pottsrf/matrix.hpp"
#include "pottsrf/region_force.hpp"

namespace pottsrf {

/// Shortest round-trip decimal form of a double ("%.17g" trimmed).
std::string format_double(double v);

/// Numeric CSV; leading non-numeric lines are skipped as headers and every
/// data row must have the same arity.
Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const Matrix& m, const std::string& path);

/// One integer per line.
std::vector<int> read_labels(const std::string& path);
void write_labels(const std::vector<int>& labels, const std::string& path);

/// Seed file: lines of "node_index,class_label".
SeedSet read_seeds(const std::string& path, int n_classes);
void write_seeds(const SeedSet& seeds, const std::string& path);

/// Edge list "i,j,w" (undirected, each edge once).
Graph read_graph_csv(const std::string& path, int n_nodes);
void write_graph_csv(const Graph& g, const std::string& path);

/// Writes via a temp file in the target directory and renames into place, so
/// readers never observe a partial file.
class AtomicWriter {
  public:
    explicit AtomicWriter(const std::string& path);
    ~AtomicWriter();
    AtomicWriter(const AtomicWriter&) = delete;
    AtomicWriter& operator=(const AtomicWriter&) = delete;

    void write(const std::string& content);
    void commit();

  private:
    std::string path_;
    std::string tmp_path_;
    int fd_ = -1;
    bool committed_ = false;
};

/// Convenience: atomic whole-file write.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace pottsrf
