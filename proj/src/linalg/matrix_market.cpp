#include "rrf/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace rrf::mm {

namespace {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Header {
  bool coordinate = true;
  bool symmetric = false;
  bool pattern = false;
};

Header read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("matrix market: empty input");
  std::istringstream ls(line);
  std::string banner, object, format, field, symmetry;
  ls >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw ParseError("matrix market: missing banner");
  }
  Header h;
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format == "array") {
    h.coordinate = false;
  } else if (format != "coordinate") {
    throw ParseError("matrix market: unknown format " + format);
  }
  if (field == "pattern") {
    h.pattern = true;
  } else if (field != "real" && field != "integer" && field != "double") {
    throw ParseError("matrix market: unsupported field " + field);
  }
  if (symmetry == "symmetric") {
    h.symmetric = true;
  } else if (symmetry != "general") {
    throw ParseError("matrix market: unsupported symmetry " + symmetry);
  }
  return h;
}

std::string next_data_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return line;
  }
  throw ParseError("matrix market: unexpected end of input");
}

std::vector<Triplet> read_triplets(std::istream& is, Index& rows, Index& cols) {
  const Header h = read_header(is);
  std::vector<Triplet> t;
  std::istringstream size_line(next_data_line(is));
  if (h.coordinate) {
    Index nnz = 0;
    size_line >> rows >> cols >> nnz;
    if (!size_line) throw ParseError("matrix market: bad size line");
    t.reserve(static_cast<std::size_t>(nnz));
    for (Index k = 0; k < nnz; ++k) {
      std::istringstream ls(next_data_line(is));
      Index i = 0, j = 0;
      double v = 1.0;
      ls >> i >> j;
      if (!h.pattern) ls >> v;
      if (!ls || i < 1 || j < 1 || i > rows || j > cols) {
        throw ParseError("matrix market: bad entry line");
      }
      t.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
      if (h.symmetric && i != j) t.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    }
  } else {
    size_line >> rows >> cols;
    if (!size_line) throw ParseError("matrix market: bad size line");
    for (Index j = 0; j < cols; ++j) {
      for (Index i = h.symmetric ? j : 0; i < rows; ++i) {
        std::istringstream ls(next_data_line(is));
        double v = 0.0;
        ls >> v;
        if (!ls) throw ParseError("matrix market: bad array entry");
        t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
        if (h.symmetric && i != j) t.emplace_back(static_cast<int>(j), static_cast<int>(i), v);
      }
    }
  }
  return t;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

}  // namespace

void write_sparse(std::ostream& os, const SparseMatrix& a, bool symmetric) {
  Index nnz = 0;
  for (Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      if (!symmetric || it.row() >= it.col()) ++nnz;
    }
  }
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  os << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
  for (Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      if (symmetric && it.row() < it.col()) continue;
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_value(it.value()) << '\n';
    }
  }
}

void write_dense(std::ostream& os, const Eigen::Ref<const DenseMatrix>& a) {
  os << "%%MatrixMarket matrix array real general\n";
  os << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) os << format_value(a(i, j)) << '\n';
  }
}

void write_sparse(const std::string& path, const SparseMatrix& a, bool symmetric) {
  auto os = open_out(path);
  write_sparse(os, a, symmetric);
}

void write_dense(const std::string& path, const Eigen::Ref<const DenseMatrix>& a) {
  auto os = open_out(path);
  write_dense(os, a);
}

SparseMatrix read_sparse(std::istream& is) {
  Index rows = 0, cols = 0;
  const auto t = read_triplets(is, rows, cols);
  SparseMatrix a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

DenseMatrix read_dense(std::istream& is) {
  Index rows = 0, cols = 0;
  const auto t = read_triplets(is, rows, cols);
  DenseMatrix a = DenseMatrix::Zero(rows, cols);
  for (const auto& e : t) a(e.row(), e.col()) += e.value();
  return a;
}

SparseMatrix read_sparse(const std::string& path) {
  auto is = open_in(path);
  return read_sparse(is);
}

DenseMatrix read_dense(const std::string& path) {
  auto is = open_in(path);
  return read_dense(is);
}

}  // namespace rrf::mm
