#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pursuit/cocluster.hpp"
#include "pursuit/graph.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/points.hpp"

namespace pursuit::io {

class parse_error : public invalid_input {
 public:
  parse_error(const std::string& source, std::size_t line, const std::string& what)
      : invalid_input(source + ":" + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

/// Splits on any character in `seps`, dropping empty fields.
inline std::vector<std::string_view> split(std::string_view s, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = s.find_first_of(seps, i);
    const std::size_t end = j == std::string_view::npos ? s.size() : j;
    std::string_view f = trim(s.substr(i, end - i));
    if (!f.empty()) out.push_back(f);
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write " + path);
  return out;
}

/// Calls f(line_number, content) for each non-blank, non-comment line.
template <class F>
void for_each_data_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    f(no, v);
  }
}

}  // namespace detail

/// Edge list: `u v [w]` per line, 0-based, `#` comments. A `# vertices N`
/// line fixes the vertex count (otherwise max id + 1), so graphs with
/// trailing isolated vertices round-trip.
inline SparseGraph read_edge_list(std::istream& in, const std::string& source = "<edges>") {
  std::vector<Edge> edges;
  std::size_t declared = 0;
  bool have_declared = false;
  std::size_t n = 0;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::string_view v = detail::trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      auto f = detail::split(v.substr(1), " \t");
      if (f.size() == 2 && f[0] == "vertices") {
        if (!detail::parse_number(f[1], declared)) throw parse_error(source, no, "bad vertex count");
        have_declared = true;
      }
      continue;
    }
    auto f = detail::split(v, " \t,");
    if (f.size() != 2 && f.size() != 3) throw parse_error(source, no, "expected `u v [w]`");
    std::uint64_t u = 0, w = 0;
    double weight = 1.0;
    if (!detail::parse_number(f[0], u) || !detail::parse_number(f[1], w)) {
      throw parse_error(source, no, "vertex ids must be nonnegative integers");
    }
    if (f.size() == 3 && !detail::parse_number(f[2], weight)) throw parse_error(source, no, "bad weight");
    if (u > 0xfffffffeu || w > 0xfffffffeu) throw parse_error(source, no, "vertex id too large");
    edges.push_back({static_cast<vertex_id>(u), static_cast<vertex_id>(w), weight});
    n = std::max<std::size_t>(n, std::max(u, w) + 1);
  }
  if (have_declared) {
    if (declared < n) throw invalid_input(source + ": declared " + std::to_string(declared) + " vertices but ids reach " + std::to_string(n - 1));
    n = declared;
  }
  return build_graph(n, std::move(edges));
}

inline SparseGraph read_edge_list(const std::string& path) {
  auto in = detail::open_in(path);
  return read_edge_list(in, path);
}

inline void write_edge_list(const SparseGraph& g, std::ostream& out) {
  out << "# vertices " << g.num_vertices() << '\n';
  const bool weighted = !g.unweighted();
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (weighted) out << ' ' << detail::format_double(e.weight);
    out << '\n';
  }
}

inline void write_edge_list(const SparseGraph& g, const std::string& path) {
  auto out = detail::open_out(path);
  write_edge_list(g, out);
}

/// `vertex,cluster` lines covering vertices 0..n-1 exactly once, in any
/// order. Returns the raw cluster labels indexed by vertex.
inline std::vector<vertex_id> read_labels(std::istream& in, const std::string& source = "<labels>") {
  std::vector<std::pair<vertex_id, vertex_id>> rows;
  detail::for_each_data_line(in, [&](std::size_t no, std::string_view v) {
    auto f = detail::split(v, ", \t");
    std::uint32_t a = 0, b = 0;
    if (f.size() != 2 || !detail::parse_number(f[0], a) || !detail::parse_number(f[1], b)) {
      // Tolerate a `vertex,cluster` header on the first data line.
      if (rows.empty() && f.size() == 2 && f[0] == "vertex") return;
      throw parse_error(source, no, "expected `vertex,cluster`");
    }
    rows.emplace_back(a, b);
  });
  std::vector<vertex_id> labels(rows.size(), ~vertex_id{0});
  for (auto [v, c] : rows) {
    if (v >= rows.size()) throw invalid_input(source + ": vertex " + std::to_string(v) + " out of range");
    if (labels[v] != ~vertex_id{0}) throw invalid_input(source + ": vertex " + std::to_string(v) + " listed twice");
    labels[v] = c;
  }
  return labels;
}

inline std::vector<vertex_id> read_labels(const std::string& path) {
  auto in = detail::open_in(path);
  return read_labels(in, path);
}

inline void write_labels(const Partition& p, std::ostream& out) {
  for (vertex_id v = 0; v < p.num_vertices(); ++v) out << v << ',' << p.cluster_of(v) << '\n';
}

inline void write_labels(const Partition& p, const std::string& path) {
  auto out = detail::open_out(path);
  write_labels(p, out);
}

/// One vertex id per line.
inline IndexSet read_cluster(std::istream& in, const std::string& source = "<cluster>") {
  std::vector<vertex_id> ids;
  detail::for_each_data_line(in, [&](std::size_t no, std::string_view v) {
    std::uint32_t a = 0;
    if (!detail::parse_number(v, a)) throw parse_error(source, no, "expected a vertex id");
    ids.push_back(a);
  });
  return IndexSet::from_unsorted(std::move(ids));
}

inline IndexSet read_cluster(const std::string& path) {
  auto in = detail::open_in(path);
  return read_cluster(in, path);
}

inline void write_cluster(const IndexSet& c, std::ostream& out) {
  for (vertex_id v : c) out << v << '\n';
}

inline void write_cluster(const IndexSet& c, const std::string& path) {
  auto out = detail::open_out(path);
  write_cluster(c, out);
}

namespace detail {

inline std::vector<std::vector<double>> read_numeric_rows(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  for_each_data_line(in, [&](std::size_t no, std::string_view v) {
    std::vector<double> r;
    for (auto f : split(v, ", \t")) {
      double x = 0.0;
      if (!parse_number(f, x)) throw parse_error(source, no, "bad number `" + std::string(f) + "`");
      r.push_back(x);
    }
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw parse_error(source, no, "expected " + std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

}  // namespace detail

/// One point per line, comma-separated coordinates, no header.
inline PointCloud read_points(std::istream& in, const std::string& source = "<points>") {
  auto rows = detail::read_numeric_rows(in, source);
  if (rows.empty()) throw invalid_input(source + ": no points");
  std::vector<double> data;
  for (auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return PointCloud(rows.size(), rows.front().size(), std::move(data));
}

inline PointCloud read_points(const std::string& path) {
  auto in = detail::open_in(path);
  return read_points(in, path);
}

/// Dense nonnegative matrix, one row per line, comma-separated.
inline RectMatrix read_matrix(std::istream& in, const std::string& source = "<matrix>") {
  auto rows = detail::read_numeric_rows(in, source);
  if (rows.empty()) throw invalid_input(source + ": empty matrix");
  std::vector<MatrixEntry> entries;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (rows[i][j] != 0.0) entries.push_back({static_cast<vertex_id>(i), static_cast<vertex_id>(j), rows[i][j]});
    }
  }
  return RectMatrix(rows.size(), rows.front().size(), std::move(entries));
}

inline RectMatrix read_matrix(const std::string& path) {
  auto in = detail::open_in(path);
  return read_matrix(in, path);
}

inline void write_matrix(const RectMatrix& b, std::ostream& out) {
  std::vector<double> row(b.cols());
  for (vertex_id i = 0; i < b.rows(); ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    auto idx = b.row_indices(i);
    auto val = b.row_values(i);
    for (std::size_t e = 0; e < idx.size(); ++e) row[idx[e]] = val[e];
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << detail::format_double(row[j]);
    }
    out << '\n';
  }
}

inline void write_matrix(const RectMatrix& b, const std::string& path) {
  auto out = detail::open_out(path);
  write_matrix(b, out);
}

}  // namespace pursuit::io
