#include "rrf/rangefinder.hpp"

#include <algorithm>

namespace rrf {

namespace {

double max_norm(const std::vector<Vector>& tests, const InnerProductSpace& range) {
  double m = 0.0;
  for (const auto& t : tests) m = std::max(m, range.norm(t));
  return m;
}

}  // namespace

RangeBasis adaptive_randomized_range(const LinearOperator& op, const AdaptiveOptions& options,
                                     RngStream& rng) {
  if (!(options.tol > 0.0)) throw DomainError("adaptive_randomized_range: tol must be positive");
  if (!(options.eps_algofail > 0.0 && options.eps_algofail < 1.0)) {
    throw DomainError("adaptive_randomized_range: eps_algofail must lie in (0, 1)");
  }
  const auto& source = op.source_space();
  const auto& range = op.range_space();

  RangeBasis out;
  out.basis = OrthonormalBasis(range.dim());
  out.n_t = options.n_t;
  out.rank_bound = options.rank_bound > 0 ? options.rank_bound : std::min(source.dim(), range.dim());
  out.eps_testfail = options.eps_algofail / static_cast<double>(out.rank_bound);
  out.c_est = c_est(options.n_t, out.eps_testfail, source.lambda_min());

  std::vector<Vector> tests;
  tests.reserve(static_cast<std::size_t>(options.n_t));
  for (int i = 0; i < options.n_t; ++i) {
    tests.push_back(op.apply(rng.normal_vector(source.dim())));
    ++out.evaluations;
  }

  double m = max_norm(tests, range);
  out.trace.push_back({0, m, out.c_est * m, out.evaluations});
  int consecutive_rejections = 0;
  while (out.c_est * m > options.tol) {
    if (out.basis.size() >= out.rank_bound) {
      out.exhausted = true;
      break;
    }
    const Vector v = op.apply(rng.normal_vector(source.dim()));
    ++out.evaluations;
    if (orthonormalize_extend(out.basis, v, range, options.tolerances) == ExtendResult::rejected) {
      ++out.rejected;
      if (++consecutive_rejections >= options.max_consecutive_rejections) {
        out.exhausted = true;
        break;
      }
      continue;
    }
    consecutive_rejections = 0;
    // the test vectors are already orthogonal to the older basis vectors
    const Index last = out.basis.size() - 1;
    const auto b = out.basis.vectors().col(last);
    const auto mb = out.basis.gram_vectors().col(last);
    for (auto& t : tests) t -= mb.dot(t) * b;
    m = max_norm(tests, range);
    out.trace.push_back({out.basis.size(), m, out.c_est * m, out.evaluations});
  }
  out.final_estimate = out.c_est * m;
  return out;
}

RangeBasis adaptive_prefix(const RangeBasis& full, double tol) {
  if (!(tol > 0.0)) throw DomainError("adaptive_prefix: tol must be positive");
  if (full.trace.empty()) throw DomainError("adaptive_prefix: basis has no trace");
  std::size_t stop = full.trace.size();
  for (std::size_t k = 0; k < full.trace.size(); ++k) {
    if (!(full.trace[k].estimate > tol)) {
      stop = k;
      break;
    }
  }
  if (stop == full.trace.size()) {
    // never below tol: the run with tol draws exactly like the full one
    if (!full.exhausted) throw DomainError("adaptive_prefix: tolerance below the one of the full run");
    return full;
  }
  const RangeStep& step = full.trace[stop];
  RangeBasis out;
  out.basis = full.basis.prefix(step.basis_size);
  out.trace.assign(full.trace.begin(), full.trace.begin() + static_cast<std::ptrdiff_t>(stop) + 1);
  out.evaluations = step.evaluations;
  out.rejected = step.evaluations - full.n_t - step.basis_size;
  out.exhausted = false;
  out.n_t = full.n_t;
  out.eps_testfail = full.eps_testfail;
  out.rank_bound = full.rank_bound;
  out.c_est = full.c_est;
  out.final_estimate = step.estimate;
  return out;
}

RangeBasis fixed_rank_range(const LinearOperator& op, Index n, RngStream& rng,
                            const linalg::Tolerances& tol) {
  if (n < 0) throw DomainError("fixed_rank_range: negative size");
  const auto& range = op.range_space();
  RangeBasis out;
  out.basis = OrthonormalBasis(range.dim());
  for (Index i = 0; i < n; ++i) {
    const Vector v = op.apply(rng.normal_vector(op.source_dim()));
    ++out.evaluations;
    if (orthonormalize_extend(out.basis, v, range, tol) == ExtendResult::rejected) ++out.rejected;
  }
  return out;
}

}  // namespace rrf
