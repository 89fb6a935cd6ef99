#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace grdfit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define GRDFIT_ERROR(Name) \
  struct Name : Error {    \
    using Error::Error;    \
  }

// geometry
GRDFIT_ERROR(DuplicateSite);
GRDFIT_ERROR(CollinearInput);
GRDFIT_ERROR(DegenerateTriangle);
GRDFIT_ERROR(ParallelLines);
GRDFIT_ERROR(OutsideConvexHull);
// assembly / fitting
GRDFIT_ERROR(SingularAssembly);
GRDFIT_ERROR(QualityOutOfRange);
GRDFIT_ERROR(UnknownDevice);
// model documents
GRDFIT_ERROR(VersionMismatch);
GRDFIT_ERROR(CorruptDocument);
// measurement / corpus files
GRDFIT_ERROR(ParseError);
GRDFIT_ERROR(DuplicateKey);
GRDFIT_ERROR(RangeError);
GRDFIT_ERROR(SynthSpecError);
// sampler
GRDFIT_ERROR(GridMismatch);
GRDFIT_ERROR(DegenerateCorpus);
GRDFIT_ERROR(NearSingularPivot);
GRDFIT_ERROR(NoAdmissiblePivot);
// baselines / applications
GRDFIT_ERROR(InsufficientSamples);
GRDFIT_ERROR(NoCoverage);
GRDFIT_ERROR(EmptyCurve);
GRDFIT_ERROR(CoverageError);

#undef GRDFIT_ERROR

// Deterministic uniform doubles from a raw 64-bit stream. std::uniform_real_distribution
// is implementation-defined, which would make seeded corpora differ across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // xorshift* keeps the generator self-contained and stable
    std::uint64_t x = s_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    s_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t s_;
};

}  // namespace grdfit
