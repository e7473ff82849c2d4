#pragma once

#include "rrf/linalg.hpp"

#include <iosfwd>
#include <string>

namespace rrf::mm {

// Matrix Market exchange files. Values are written with 17 significant digits so
// every double survives a round trip unchanged.

void write_sparse(std::ostream& os, const SparseMatrix& a, bool symmetric = false);
void write_dense(std::ostream& os, const Eigen::Ref<const DenseMatrix>& a);

void write_sparse(const std::string& path, const SparseMatrix& a, bool symmetric = false);
void write_dense(const std::string& path, const Eigen::Ref<const DenseMatrix>& a);

/// Reads `coordinate` files (general or symmetric); an `array` file is converted.
SparseMatrix read_sparse(std::istream& is);
/// Reads `array` files; a `coordinate` file is densified.
DenseMatrix read_dense(std::istream& is);

SparseMatrix read_sparse(const std::string& path);
DenseMatrix read_dense(const std::string& path);

}  // namespace rrf::mm
